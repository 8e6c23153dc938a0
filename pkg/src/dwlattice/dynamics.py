"""Periodic grid, wavefunctions and the split-operator Fourier propagator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadDomain, NonHermitianResidual
from .lattice import K_LATTICE, WAVELENGTH, LatticeParams, potential_1d

DEFAULT_DT = 1e-3
DEFAULT_RECORD_POINTS = 200


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int
    x: np.ndarray = field(repr=False, compare=False)
    wavenumbers: np.ndarray = field(repr=False, compare=False)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def n_cells(self) -> int:
        return round(self.length / WAVELENGTH)


def init_grid(x_min: float = -9.75, x_max: float = 10.25, n_points: int = 512) -> Grid:
    width = x_max - x_min
    n_cells = round(width / WAVELENGTH)
    if n_cells < 1 or abs(width - n_cells * WAVELENGTH) > 1e-9:
        raise BadDomain(f"domain width {width} is not a positive integer multiple of lambda")
    if n_points < 2 or n_points & (n_points - 1):
        raise BadDomain(f"n_points must be a power of two, got {n_points}")
    dx = width / n_points
    x = x_min + np.arange(n_points) * dx
    p = 2 * np.pi * np.fft.fftfreq(n_points, d=dx)
    x.setflags(write=False)
    p.setflags(write=False)
    return Grid(float(x_min), float(x_max), int(n_points), x, p)


@dataclass
class WaveFunction:
    amplitudes: np.ndarray
    grid: Grid
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise ValueError(f"amplitudes must have shape ({self.grid.n_points},), got {self.amplitudes.shape}")

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx)

    def inner(self, other: "WaveFunction") -> complex:
        """<self|other> with the grid measure."""
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.dx)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes / np.sqrt(self.norm()), self.grid, dict(self.info))

    def probability(self, mask) -> float:
        return float(np.sum(np.abs(self.amplitudes[mask]) ** 2) * self.grid.dx)

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.amplitudes.copy(), self.grid, dict(self.info))


@dataclass(frozen=True)
class PropagatorPlan:
    dt: float
    grid: Grid
    potential: np.ndarray = field(repr=False)
    kinetic: np.ndarray = field(repr=False)
    half_potential_phase: np.ndarray = field(repr=False)
    kinetic_phase: np.ndarray = field(repr=False)

    def phases(self, tau: float) -> tuple[np.ndarray, np.ndarray]:
        """Half-potential and kinetic phase vectors for a step of length ``tau``."""
        if tau == self.dt:
            return self.half_potential_phase, self.kinetic_phase
        return np.exp(-0.5j * self.potential * tau), np.exp(-1j * self.kinetic * tau)


def kinetic_energies(grid: Grid) -> np.ndarray:
    """Spectral kinetic energy (p/k)**2 in units of E_R, in DFT order."""
    return (grid.wavenumbers / K_LATTICE) ** 2


def plan_propagator(params: LatticeParams, grid: Grid, dt: float = DEFAULT_DT) -> PropagatorPlan:
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    v = np.asarray(potential_1d(params, grid.x))
    t = kinetic_energies(grid)
    half_v = np.exp(-0.5j * v * dt)
    kin = np.exp(-1j * t * dt)
    for a in (v, t, half_v, kin):
        a.setflags(write=False)
    return PropagatorPlan(float(dt), grid, v, t, half_v, kin)


def strang(amps: np.ndarray, half_v: np.ndarray, kin: np.ndarray) -> np.ndarray:
    """One symmetric split step on the last axis of ``amps``."""
    out = np.fft.fft(amps * half_v, axis=-1)
    out *= kin
    out = np.fft.ifft(out, axis=-1)
    out *= half_v
    return out


def step(psi: WaveFunction, plan: PropagatorPlan) -> WaveFunction:
    return WaveFunction(strang(psi.amplitudes, plan.half_potential_phase, plan.kinetic_phase), psi.grid)


Observer = Callable[[int, float, np.ndarray], None]


def evolve(
    psi: WaveFunction,
    plan: PropagatorPlan,
    n_steps: int,
    observer: Optional[Observer] = None,
    n_record: int = 1,
) -> WaveFunction:
    """Apply ``n_steps`` split steps.

    ``observer(step_index, time, amplitudes)`` is called at step 0, every
    ``n_record`` steps and after the final step.  The amplitudes passed to it
    are a read-only view.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    if n_record < 1:
        raise ValueError("n_record must be >= 1")
    amps = psi.amplitudes
    hv, kin = plan.half_potential_phase, plan.kinetic_phase

    def emit(i):
        if observer is not None:
            view = amps.view()
            view.setflags(write=False)
            observer(i, i * plan.dt, view)

    emit(0)
    for i in range(1, n_steps + 1):
        amps = strang(amps, hv, kin)
        if i % n_record == 0 or i == n_steps:
            emit(i)
    if n_steps == 0:
        return psi
    return WaveFunction(amps, psi.grid, dict(psi.info))


def apply_hamiltonian(amps: np.ndarray, grid: Grid, potential: np.ndarray) -> np.ndarray:
    return np.fft.ifft(kinetic_energies(grid) * np.fft.fft(amps, axis=-1), axis=-1) + potential * amps


def expectation_energy(psi: WaveFunction, params: LatticeParams) -> float:
    """<psi|H|psi> / <psi|psi> with the kinetic term evaluated spectrally."""
    v = potential_1d(params, psi.grid.x)
    h_psi = apply_hamiltonian(psi.amplitudes, psi.grid, v)
    value = np.vdot(psi.amplitudes, h_psi) / np.vdot(psi.amplitudes, psi.amplitudes)
    if abs(value.imag) > 1e-8:
        raise NonHermitianResidual(f"imaginary part {value.imag:.3e} of <H> exceeds 1e-8")
    return float(value.real)
