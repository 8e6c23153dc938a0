"""Monte Carlo ensembles of kicked trajectories and their observables.

The ensemble density matrix is rho = (1/N) sum_k |psi_k><psi_k|.  Every
observable here is evaluated from the trajectory array without forming rho:
probabilities and the survival probability are linear in rho, and the purity
follows from the Gram matrix G_kl = <psi_k|psi_l> as sum |G_kl|^2 / N^2.
The direct rho-based forms are kept for cross-checks on small grids.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .decoherence import (
    KickParams,
    TrajectorySeed,
    n_steps_for,
    propagate_batch,
    record_steps,
    trajectory_kicks,
)
from .dynamics import Grid, PropagatorPlan, WaveFunction, evolve
from .errors import ValidationError
from .lattice import EDGE_TOL, WellPartition
from .spectral import (
    BlochSpectrum,
    SuperpositionSpec,
    gaussian_on_grid,
    make_L_state,
    make_superposition,
)

INITIAL_KINDS = ("L", "gaussian", "coefficients")


@dataclass(frozen=True)
class InitialState:
    kind: str = "L"
    sigma: float = 0.1
    center: float = 0.0
    coefficients: Optional[SuperpositionSpec] = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValidationError("initial_state.kind", f"must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValidationError("initial_state.sigma", f"must be positive, got {self.sigma}")
        if self.kind == "coefficients" and not self.coefficients:
            raise ValidationError("initial_state.coefficients", "required for kind 'coefficients'")


def build_initial_state(init: InitialState, spectrum: BlochSpectrum, grid: Grid, partition: WellPartition) -> WaveFunction:
    if init.kind == "L":
        return make_L_state(spectrum, grid, partition)
    if init.kind == "gaussian":
        psi = gaussian_on_grid(grid, init.sigma, init.center)
        psi.info.update(kind="gaussian", sigma=init.sigma, center=init.center)
        return psi
    return make_superposition(init.coefficients.normalized(), spectrum, grid)


def reference_point(init: InitialState) -> float:
    """Position whose cell is the designated 'initial' well."""
    return init.center if init.kind == "gaussian" else 0.0


@dataclass(frozen=True)
class EnsembleConfig:
    t_final: float
    n_trajectories: int = 50
    base_seed: int = 0
    n_record: Optional[int] = None
    initial_state: InitialState = InitialState()
    kick: KickParams = KickParams(enabled=False)
    workers: int = 1

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValidationError("n_trajectories", f"must be >= 1, got {self.n_trajectories}")
        if not self.t_final > 0:
            raise ValidationError("t_final", f"must be positive, got {self.t_final}")
        if self.n_record is not None and self.n_record < 1:
            raise ValidationError("n_record", f"must be >= 1, got {self.n_record}")
        if self.workers < 1:
            raise ValidationError("workers", f"must be >= 1, got {self.workers}")

    def record_every(self, dt: float) -> int:
        if self.n_record is not None:
            return self.n_record
        return max(1, n_steps_for(self.t_final, dt) // 200)


@dataclass
class ObservableSeries:
    times: np.ndarray
    p_left_total: np.ndarray
    p_initial_well: np.ndarray
    p_right_well: np.ndarray
    survival: np.ndarray
    purity: np.ndarray
    se_p_left: Optional[np.ndarray] = None
    se_survival: Optional[np.ndarray] = None
    trace: Optional[np.ndarray] = None
    max_norm_error: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    COLUMNS = ("t", "p_left_total", "p_initial_well", "p_right_well", "survival", "purity")
    ERROR_COLUMNS = ("se_p_left", "se_survival")

    def __len__(self):
        return len(self.times)

    def columns(self, with_errors: bool = True) -> dict[str, np.ndarray]:
        cols = {
            "t": self.times,
            "p_left_total": self.p_left_total,
            "p_initial_well": self.p_initial_well,
            "p_right_well": self.p_right_well,
            "survival": self.survival,
            "purity": self.purity,
        }
        if with_errors and self.se_p_left is not None:
            cols["se_p_left"] = self.se_p_left
            cols["se_survival"] = self.se_survival
        return cols


# -- observables on a trajectory set ---------------------------------------


def _as_array(trajectories) -> tuple[np.ndarray, Grid]:
    """Stack a WaveFunction or a list of them into an (N, n_points) array."""
    if isinstance(trajectories, WaveFunction):
        return trajectories.amplitudes[None, :], trajectories.grid
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("empty trajectory set")
    grid = trajectories[0].grid
    if any(t.grid.n_points != grid.n_points or t.grid.dx != grid.dx for t in trajectories):
        raise ValueError("trajectories must share one grid")
    return np.array([t.amplitudes for t in trajectories]), grid


def interval_mask(grid: Grid, interval: tuple[float, float]) -> np.ndarray:
    """Grid points in (lo, hi] on the periodic domain, edges resolved to the lower-x side."""
    lo, hi = interval
    if hi - lo >= grid.length - EDGE_TOL:
        return np.ones(grid.n_points, dtype=bool)
    u = np.mod(grid.x - lo, grid.length)
    u = np.where(u > grid.length - EDGE_TOL, u - grid.length, u)
    return (u > EDGE_TOL) & (u <= hi - lo + EDGE_TOL)


def probabilities_array(amps: np.ndarray, dx: float, mask: np.ndarray) -> np.ndarray:
    """Per-trajectory probability of the masked region."""
    return np.sum(np.abs(amps[:, mask]) ** 2, axis=1) * dx


def prob_in_interval(trajectories, interval: tuple[float, float]) -> float:
    amps, grid = _as_array(trajectories)
    return float(np.mean(probabilities_array(amps, grid.dx, interval_mask(grid, interval))))


def prob_left_total(trajectories, partition: WellPartition) -> float:
    amps, grid = _as_array(trajectories)
    return float(np.mean(probabilities_array(amps, grid.dx, partition.left_mask(grid.x))))


def overlaps_array(amps: np.ndarray, psi0: np.ndarray, dx: float) -> np.ndarray:
    return amps @ psi0.conj() * dx


def survival(trajectories, psi0: WaveFunction) -> float:
    amps, grid = _as_array(trajectories)
    return float(np.mean(np.abs(overlaps_array(amps, psi0.amplitudes, grid.dx)) ** 2))


def gram_array(amps: np.ndarray, dx: float) -> np.ndarray:
    g = amps.conj() @ amps.T * dx
    return 0.5 * (g + g.conj().T)


def gram_matrix(trajectories) -> np.ndarray:
    amps, grid = _as_array(trajectories)
    return gram_array(amps, grid.dx)


def purity_from_gram(g: np.ndarray) -> float:
    n = g.shape[0]
    return float(np.sum(np.abs(g) ** 2) / n**2)


def purity(trajectories) -> float:
    return purity_from_gram(gram_matrix(trajectories))


def density_matrix(trajectories) -> np.ndarray:
    """Full grid-basis rho(x_j, x_j') = (1/N) sum_k psi_k(x_j) psi_k*(x_j')."""
    amps, _ = _as_array(trajectories)
    return amps.T @ amps.conj() / amps.shape[0]


def purity_direct(rho: np.ndarray, dx: float) -> float:
    """Double sum of rho(x, x') rho(x', x) dx dx'."""
    total = 0.0 + 0.0j
    n = rho.shape[0]
    for j in range(n):
        for jp in range(n):
            total += rho[j, jp] * rho[jp, j]
    return float((total * dx * dx).real)


def survival_direct(rho: np.ndarray, psi0: np.ndarray, dx: float) -> float:
    return float((psi0.conj() @ rho @ psi0).real * dx * dx)


def prob_direct(rho: np.ndarray, mask: np.ndarray, dx: float) -> float:
    return float(np.sum(np.diag(rho)[mask].real) * dx)


# -- ensemble runner --------------------------------------------------------


@dataclass(frozen=True)
class _Masks:
    left: np.ndarray
    initial: np.ndarray
    right: np.ndarray


def _masks(grid: Grid, partition: WellPartition, x0: float) -> _Masks:
    cell = partition.cell_containing(x0)
    return _Masks(
        partition.left_mask(grid.x),
        partition.interval_mask(grid.x, cell, "left"),
        partition.interval_mask(grid.x, cell, "right"),
    )


def observe(amps: np.ndarray, psi0: np.ndarray, dx: float, masks: _Masks) -> dict[str, float]:
    """All record-time observables for an (N, n_points) trajectory array."""
    n = amps.shape[0]
    norms = np.sum(np.abs(amps) ** 2, axis=1) * dx
    p_left = probabilities_array(amps, dx, masks.left)
    f = np.abs(overlaps_array(amps, psi0, dx)) ** 2
    se = (lambda v: float(np.std(v, ddof=1) / np.sqrt(n))) if n > 1 else (lambda v: 0.0)
    return {
        "p_left_total": float(np.mean(p_left)),
        "p_initial_well": float(np.mean(probabilities_array(amps, dx, masks.initial))),
        "p_right_well": float(np.mean(probabilities_array(amps, dx, masks.right))),
        "survival": float(np.mean(f)),
        "purity": purity_from_gram(gram_array(amps, dx)),
        "se_p_left": se(p_left),
        "se_survival": se(f),
        "trace": float(np.mean(norms)),
        "max_norm_error": float(np.max(np.abs(norms - 1.0))),
    }


def _run_chunk(psi0, plan, kp, n_steps, n_record, seeds):
    kicks = [trajectory_kicks(kp, s, plan, n_steps, n_record) for s in seeds]
    batch = np.repeat(psi0[None, :], len(seeds), axis=0)
    snaps = []
    propagate_batch(batch, plan, n_steps, kp, kicks, n_record, lambda i, t, a: snaps.append(a.copy()))
    return np.asarray(snaps), kicks


def _chunks(n: int, k: int) -> list[range]:
    k = max(1, min(k, n))
    bounds = np.linspace(0, n, k + 1).round().astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]


def run_ensemble(
    cfg: EnsembleConfig,
    plan: PropagatorPlan,
    spectrum: BlochSpectrum,
    partition: WellPartition,
    psi0: Optional[WaveFunction] = None,
    keep_kicks: bool = False,
) -> ObservableSeries:
    """Evolve ``cfg.n_trajectories`` kicked trajectories and reduce observables.

    Trajectory ``k`` draws its kicks from ``TrajectorySeed(cfg.base_seed, k)``
    so the result does not depend on ``cfg.workers``.
    """
    grid = plan.grid
    if psi0 is None:
        psi0 = build_initial_state(cfg.initial_state, spectrum, grid, partition)
    n_steps = n_steps_for(cfg.t_final, plan.dt)
    n_record = cfg.record_every(plan.dt)
    seeds = [TrajectorySeed(cfg.base_seed, k) for k in range(cfg.n_trajectories)]
    masks = _masks(grid, partition, reference_point(cfg.initial_state))
    steps = record_steps(n_steps, n_record)
    rows: list[dict[str, float]] = []
    kick_log = []

    if cfg.workers == 1:
        kicks = [trajectory_kicks(cfg.kick, s, plan, n_steps, n_record) for s in seeds]
        batch = np.repeat(psi0.amplitudes[None, :], len(seeds), axis=0)
        propagate_batch(
            batch, plan, n_steps, cfg.kick, kicks, n_record,
            lambda i, t, a: rows.append(observe(a, psi0.amplitudes, grid.dx, masks)),
        )
        kick_log = kicks
    else:
        parts = _chunks(len(seeds), cfg.workers)
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_run_chunk, psi0.amplitudes, plan, cfg.kick, n_steps, n_record, [seeds[k] for k in part])
                for part in parts
            ]
            results = [f.result() for f in futures]
        # Reassemble in trajectory order so the reduction is order-independent.
        snaps = np.concatenate([r[0] for r in results], axis=1)
        for r in results:
            kick_log.extend(r[1])
        for a in snaps:
            rows.append(observe(a, psi0.amplitudes, grid.dx, masks))

    col = lambda name: np.array([r[name] for r in rows])  # noqa: E731
    series = ObservableSeries(
        times=np.array(steps, dtype=float) * plan.dt,
        p_left_total=col("p_left_total"),
        p_initial_well=col("p_initial_well"),
        p_right_well=col("p_right_well"),
        survival=col("survival"),
        purity=col("purity"),
        se_p_left=col("se_p_left"),
        se_survival=col("se_survival"),
        trace=col("trace"),
        max_norm_error=col("max_norm_error"),
    )
    series.metadata["n_kicks"] = int(sum(len(k) for k in kick_log))
    if keep_kicks:
        series.metadata["kicks"] = kick_log
    if "alpha" in psi0.info:
        series.metadata["alpha"] = psi0.info["alpha"]
    return series


def run_single(
    psi0: WaveFunction,
    plan: PropagatorPlan,
    partition: WellPartition,
    t_final: float,
    n_record: Optional[int] = None,
    reference: float = 0.0,
) -> ObservableSeries:
    """No-kick single-trajectory series via the plain propagator."""
    n_steps = n_steps_for(t_final, plan.dt)
    if n_record is None:
        n_record = max(1, n_steps // 200)
    masks = _masks(plan.grid, partition, reference)
    rows, times = [], []

    def obs(i, t, amps):
        times.append(t)
        rows.append(observe(amps[None, :], psi0.amplitudes, plan.grid.dx, masks))

    evolve(psi0, plan, n_steps, obs, n_record)
    col = lambda name: np.array([r[name] for r in rows])  # noqa: E731
    return ObservableSeries(
        times=np.asarray(times),
        p_left_total=col("p_left_total"),
        p_initial_well=col("p_initial_well"),
        p_right_well=col("p_right_well"),
        survival=col("survival"),
        purity=col("purity"),
        trace=col("trace"),
        max_norm_error=col("max_norm_error"),
    )
