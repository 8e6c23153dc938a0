"""Glue from a RunConfig to spectra, potentials and observable series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import RunConfig, serialize_config
from .dynamics import Grid, PropagatorPlan, WaveFunction, init_grid, plan_propagator
from .ensemble import ObservableSeries, build_initial_state, reference_point, run_ensemble, run_single
from .lattice import LatticeParams, WellPartition, partition_wells, potential_1d
from .spectral import BlochSpectrum, compute_spectrum, splitting


@dataclass
class Setup:
    cfg: RunConfig
    params: LatticeParams
    grid: Grid
    spectrum: BlochSpectrum
    partition: WellPartition
    plan: PropagatorPlan

    def initial_state(self) -> WaveFunction:
        return build_initial_state(self.cfg.initial_state.state(), self.spectrum, self.grid, self.partition)


def prepare(cfg: RunConfig) -> Setup:
    params = cfg.lattice_params()
    grid = init_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points)
    spectrum = compute_spectrum(params, cfg.spectrum.n_max)
    partition = partition_wells(params, (grid.x_min, grid.x_max))
    plan = plan_propagator(params, grid, cfg.propagation.dt)
    return Setup(cfg, params, grid, spectrum, partition, plan)


def potential_table(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    grid = init_grid(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points)
    return grid.x, np.asarray(potential_1d(cfg.lattice_params(), grid.x))


def run_evolve(setup: Setup) -> ObservableSeries:
    """Single no-kick trajectory."""
    psi0 = setup.initial_state()
    series = run_single(
        psi0, setup.plan, setup.partition, setup.cfg.propagation.t_final,
        setup.cfg.propagation.record_every(), reference_point(setup.cfg.initial_state.state()),
    )
    if "alpha" in psi0.info:
        series.metadata["alpha"] = psi0.info["alpha"]
    return series


def run_monte_carlo(setup: Setup, keep_kicks: bool = False) -> ObservableSeries:
    return run_ensemble(setup.cfg.ensemble_config(), setup.plan, setup.spectrum, setup.partition, keep_kicks=keep_kicks)


def header_lines(cfg: RunConfig, title: str, rate_unit: str = "hz", extra=()) -> list[str]:
    """Comment header echoing the configuration and the unit interpretation.

    The output directory and worker count are left out so that the bytes of
    an output file depend only on the physics and the seed.
    """
    params = cfg.lattice_params()
    lat = cfg.lattice
    if lat.er_convention == "hbar":
        er = f"E_R quote {lat.er_quote_hz:g} Hz read as E_R/hbar = {params.er_frequency:.12g} 1/s"
    else:
        er = f"E_R quote {lat.er_quote_hz:g} Hz read as E_R/h; E_R/hbar = {params.er_frequency:.12g} 1/s"
    lines = [f"dwlattice {__version__}: {title}", er]
    k = cfg.kick
    if k.enabled:
        rate = cfg.kick_params().rate
        hz = k.rate_hz if k.rate_hz is not None else rate * params.er_frequency
        if rate_unit == "dimensionless":
            lines.append(f"kick rate {rate:.12g} per 1/E_R ({hz:.12g} Hz), strength m = {k.strength_m:g}")
        else:
            lines.append(f"kick rate {hz:.12g} Hz ({rate:.12g} per 1/E_R), strength m = {k.strength_m:g}")
    else:
        lines.append("kicks disabled")
    lines.extend(extra)
    lines.append("")
    text = serialize_config(cfg, skip=("output", "ensemble.workers"))
    lines.extend(text.rstrip("\n").splitlines())
    return lines


def spectrum_lines(setup: Setup) -> list[str]:
    return [f"splitting E_1 - E_0 = {splitting(setup.spectrum):.12g} E_R"]
