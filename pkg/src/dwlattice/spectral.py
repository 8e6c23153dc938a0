"""Zero-quasi-momentum band structure in a plane-wave basis.

Eigenstates are expanded as phi(x) = sum_n d_n exp(i n k x) with
n = -n_max..n_max.  The lattice potential only has first and second
harmonics, so the Hamiltonian is banded with half-bandwidth 2.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dynamics import Grid, WaveFunction
from .errors import ConvergenceFailure, PoorOverlap, ValidationError
from .lattice import K_LATTICE, WAVELENGTH, LatticeParams, WellPartition, potential_1d

DEFAULT_N_MAX = 32
DEFAULT_N_LEVELS = 10
MAX_HARMONIC = 2
POOR_OVERLAP_RESIDUAL = 0.05
# Relative slack when choosing the largest coefficient for the phase gauge.
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class PlaneWaveBasis:
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        if self.n_max < MAX_HARMONIC:
            raise ValidationError("n_max", f"must be >= {MAX_HARMONIC}, got {self.n_max}")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def dim(self) -> int:
        return 2 * self.n_max + 1


@dataclass(frozen=True)
class BlochState:
    energy: float
    coeffs: np.ndarray = field(repr=False)
    basis: PlaneWaveBasis = field(repr=False)


@dataclass(frozen=True)
class BlochSpectrum:
    states: tuple[BlochState, ...]
    params_fingerprint: str = ""

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i) -> BlochState:
        return self.states[i]


@dataclass(frozen=True)
class SuperpositionSpec:
    coefficients: tuple[tuple[int, complex], ...]
    residual: float = 0.0

    @classmethod
    def from_amplitudes(cls, amplitudes, residual=0.0) -> "SuperpositionSpec":
        return cls(tuple((l, complex(c)) for l, c in enumerate(amplitudes)), residual)

    @property
    def levels(self) -> list[int]:
        return [l for l, _ in self.coefficients]

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c for _, c in self.coefficients], dtype=complex)

    def normalized(self) -> "SuperpositionSpec":
        norm = np.sqrt(np.sum(np.abs(self.amplitudes) ** 2))
        return SuperpositionSpec(tuple((l, c / norm) for l, c in self.coefficients), self.residual)


def fingerprint(params: LatticeParams, n_max: int) -> str:
    return hashlib.sha256(repr((params, n_max)).encode()).hexdigest()[:16]


def potential_harmonics(params: LatticeParams, samples: int = 64) -> np.ndarray:
    """Fourier coefficients v_j, j = 0..MAX_HARMONIC, of the 1D potential over one period."""
    xs = np.arange(samples) / samples * WAVELENGTH
    vh = np.fft.fft(potential_1d(params, xs)) / samples
    # Exponential convention: V(x) = sum_j v_j exp(i j k x).
    return vh[: MAX_HARMONIC + 1]


def build_hamiltonian(params: LatticeParams, basis: PlaneWaveBasis = PlaneWaveBasis()) -> np.ndarray:
    n = basis.indices
    v = potential_harmonics(params)
    h = np.diag(n.astype(float) ** 2 + v[0].real).astype(complex)
    for j in range(1, MAX_HARMONIC + 1):
        # <n|V|n-j> = v_j ; the lower triangle is its exact conjugate.
        upper = np.full(basis.dim - j, v[j])
        h += np.diag(upper, -j) + np.diag(upper.conj(), j)
    return h


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    mod = np.abs(vec)
    i = int(np.argmax(mod >= mod.max() * (1 - _TIE_TOL)))
    out = vec * (np.conj(vec[i]) / mod[i])
    out[i] = mod[i]  # exactly real, not just to rounding
    return out


def solve_spectrum(h: np.ndarray, basis: PlaneWaveBasis | None = None, fingerprint: str = "") -> BlochSpectrum:
    if basis is None:
        basis = PlaneWaveBasis((h.shape[0] - 1) // 2)
    try:
        energies, vecs = scipy.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    states = []
    for e, v in zip(energies, vecs.T):
        c = _fix_phase(v)
        c.setflags(write=False)
        states.append(BlochState(float(e), c, basis))
    return BlochSpectrum(tuple(states), fingerprint)


def compute_spectrum(params: LatticeParams, n_max: int = DEFAULT_N_MAX) -> BlochSpectrum:
    basis = PlaneWaveBasis(n_max)
    return solve_spectrum(build_hamiltonian(params, basis), basis, fingerprint(params, n_max))


def splitting(spec: BlochSpectrum) -> float:
    if len(spec) < 2:
        raise ValueError("need at least two states")
    return spec[1].energy - spec[0].energy


def tail_mass(state: BlochState, n_cut: int | None = None) -> float:
    """Weight of the coefficient vector on |n| > n_cut (default n_max // 2)."""
    n = state.basis.indices
    if n_cut is None:
        n_cut = state.basis.n_max // 2
    return float(np.sum(np.abs(state.coeffs[np.abs(n) > n_cut]) ** 2))


def _sample(state: BlochState, grid: Grid) -> np.ndarray:
    phase = np.exp(1j * K_LATTICE * np.outer(grid.x, state.basis.indices))
    return phase @ state.coeffs


def synthesize_on_grid(state: BlochState, grid: Grid) -> WaveFunction:
    return WaveFunction(_sample(state, grid), grid).normalized()


def eigenstates_on_grid(spec: BlochSpectrum, grid: Grid, n_levels: int) -> np.ndarray:
    """Grid-normalized eigenstates as rows of an (n_levels, n_points) array."""
    rows = np.array([_sample(spec[l], grid) for l in range(n_levels)])
    return rows / np.sqrt(np.sum(np.abs(rows) ** 2, axis=1, keepdims=True) * grid.dx)


def make_L_state(spec: BlochSpectrum, grid: Grid, partition: WellPartition) -> WaveFunction:
    """(|0> + exp(i alpha)|1>)/sqrt(2) with alpha in {0, pi} chosen to load the left wells."""
    phi0, phi1 = eigenstates_on_grid(spec, grid, 2)
    left = partition.left_mask(grid.x)
    best = None
    for alpha in (0.0, np.pi):
        psi = WaveFunction((phi0 + np.exp(1j * alpha) * phi1) / np.sqrt(2), grid).normalized()
        p_left = psi.probability(left)
        if best is None or p_left > best[1]:
            best = (psi, p_left, alpha)
    psi, p_left, alpha = best
    psi.info.update(kind="L", alpha=alpha, p_left=p_left)
    return psi


def gaussian_on_grid(grid: Grid, sigma: float, center: float = 0.0, periodize: bool = False) -> WaveFunction:
    """Normalized exp(-(x-center)**2 / 2 sigma**2) on the grid.

    The single packet uses the minimum-image distance on the periodic domain.
    With ``periodize`` one copy is placed in every lattice cell, which is the
    projection of the packet onto the zero-quasi-momentum sector.
    """
    if sigma <= 0:
        raise ValidationError("sigma", f"must be positive, got {sigma}")
    if not grid.x_min <= center < grid.x_max:
        raise ValidationError("center", f"{center} lies outside the domain")
    if periodize:
        period = WAVELENGTH
        images = int(np.ceil(8 * sigma / period)) + 1
    else:
        period = grid.length
        images = 1
    d = np.mod(grid.x - center + period / 2, period) - period / 2
    shifts = np.arange(-images, images + 1) * period
    amps = np.exp(-((d[:, None] + shifts[None, :]) ** 2) / (2 * sigma**2)).sum(axis=1)
    return WaveFunction(amps.astype(complex), grid).normalized()


def project(psi: WaveFunction, spec: BlochSpectrum, n_levels: int = DEFAULT_N_LEVELS) -> np.ndarray:
    """Overlaps <l|psi> with the first ``n_levels`` grid-normalized eigenstates."""
    rows = eigenstates_on_grid(spec, psi.grid, n_levels)
    return rows.conj() @ psi.amplitudes * psi.grid.dx


def project_gaussian(
    spec: BlochSpectrum,
    grid: Grid,
    sigma: float = 0.1,
    center: float = 0.0,
    n_levels: int = DEFAULT_N_LEVELS,
) -> SuperpositionSpec:
    """Expansion coefficients of a lattice-periodized Gaussian in the q = 0 eigenstates."""
    g = gaussian_on_grid(grid, sigma, center, periodize=True)
    c = project(g, spec, n_levels)
    residual = float(1.0 - np.sum(np.abs(c) ** 2))
    if residual > POOR_OVERLAP_RESIDUAL:
        raise PoorOverlap(f"first {n_levels} levels miss {residual:.3f} of the Gaussian weight")
    return SuperpositionSpec.from_amplitudes(c, residual)


def make_superposition(sspec: SuperpositionSpec, spec: BlochSpectrum, grid: Grid) -> WaveFunction:
    levels = sspec.levels
    if levels and max(levels) >= len(spec):
        raise ValidationError("coefficients", f"level {max(levels)} beyond spectrum of {len(spec)} states")
    rows = eigenstates_on_grid(spec, grid, max(levels) + 1)
    amps = sum(c * rows[l] for l, c in sspec.coefficients)
    psi = WaveFunction(amps, grid)
    psi.info["raw_norm"] = psi.norm()
    out = psi.normalized()
    out.info.update(kind="superposition", raw_norm=psi.info["raw_norm"])
    return out
