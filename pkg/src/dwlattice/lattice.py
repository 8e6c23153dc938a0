"""Double-well lattice potential and its partition into left/right sub-wells.

Units: hbar = 1, lengths in lattice wavelengths (lambda = 1), energies in the
recoil energy E_R, times in 1/E_R.  With these units the lattice wavevector is
k = 2*pi and a plane wave exp(i*n*k*x) has kinetic energy n**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateWell, ValidationError

WAVELENGTH = 1.0
K_LATTICE = 2 * np.pi / WAVELENGTH

# Quoted recoil scale "3.5 kHz", read as E_R/hbar = 3500 1/s unless the
# cyclic convention is selected.
DEFAULT_ER_QUOTE_HZ = 3500.0
ER_CONVENTIONS = ("hbar", "h")

# Extremum location tolerance in units of lambda.
REFINE_TOL = 1e-9
# Grid points within this distance of an interval edge count as on the edge.
EDGE_TOL = 1e-8


def er_frequency_from_quote(quote_hz: float, convention: str = "hbar") -> float:
    """Return E_R/hbar in 1/s for a recoil energy quoted as a frequency.

    ``convention="hbar"`` takes the quote as E_R/hbar directly; ``"h"`` takes
    it as E_R/h, so the angular value is 2*pi times larger.
    """
    if convention == "hbar":
        return float(quote_hz)
    if convention == "h":
        return 2 * np.pi * float(quote_hz)
    raise ValueError(f"unknown E_R convention {convention!r}; expected one of {ER_CONVENTIONS}")


@dataclass(frozen=True)
class LatticeParams:
    v_xy: float = 36.0
    z_f: float = 0.1
    theta_xy: float = 0.0
    theta_z: float = np.pi / 2
    phi_xy: float = 0.0
    phi_z: float = 0.0
    er_frequency: float = DEFAULT_ER_QUOTE_HZ

    def __post_init__(self):
        if not 0.0 <= self.z_f <= 1.0:
            raise ValidationError("z_f", f"must lie in [0, 1], got {self.z_f}")
        if not self.v_xy >= 0.0:
            # v_xy = 0 is allowed as the free-particle limit used in checks.
            raise ValidationError("v_xy", f"must be non-negative, got {self.v_xy}")
        if not self.er_frequency > 0.0:
            raise ValidationError("er_frequency", f"must be positive, got {self.er_frequency}")
        for name in ("theta_xy", "theta_z", "phi_xy", "phi_z"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(name, "must be finite")

    @classmethod
    def from_differences(cls, delta_theta=np.pi / 2, delta_phi=0.0, **kwargs) -> "LatticeParams":
        """Build parameters from phase differences with theta_xy = phi_xy = 0."""
        return cls(theta_xy=0.0, theta_z=delta_theta, phi_xy=0.0, phi_z=delta_phi, **kwargs)

    @property
    def delta_theta(self) -> float:
        return self.theta_z - self.theta_xy

    @property
    def delta_phi(self) -> float:
        return self.phi_z - self.phi_xy

    def replace(self, **changes) -> "LatticeParams":
        from dataclasses import replace

        return replace(self, **changes)


def potential_2d(params: LatticeParams, x, y):
    """Two-dimensional lattice potential in units of E_R.

    ``x`` and ``y`` may be scalars or broadcastable arrays (units of lambda).
    """
    k = K_LATTICE
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    txy, tz, pxy, pz = params.theta_xy, params.theta_z, params.phi_xy, params.phi_z
    v1 = 4 + 2 * np.cos(2 * k * x - 2 * txy - 2 * pxy) + 2 * np.cos(2 * k * y + 2 * pxy)
    v2 = (
        4
        + 4 * np.cos(k * x + k * y - tz)
        + 4 * np.cos(k * x - k * y - tz - 2 * pz)
        + 2 * np.cos(2 * k * x - 2 * tz - 2 * pz)
        + 2 * np.cos(2 * k * y + 2 * pz)
    )
    out = -params.v_xy / 4 * ((1 - params.z_f) * v1 + params.z_f * v2)
    return out if out.ndim else float(out)


def potential_1d(params: LatticeParams, x):
    """The y = 0 cut of :func:`potential_2d`."""
    return potential_2d(params, x, 0.0)


def potential_1d_gradient(params: LatticeParams, x):
    """Analytic dV/dx of :func:`potential_1d`."""
    k = K_LATTICE
    x = np.asarray(x, dtype=float)
    txy, tz, pxy, pz = params.theta_xy, params.theta_z, params.phi_xy, params.phi_z
    d1 = -4 * k * np.sin(2 * k * x - 2 * txy - 2 * pxy)
    d2 = (
        -4 * k * np.sin(k * x - tz)
        - 4 * k * np.sin(k * x - tz - 2 * pz)
        - 4 * k * np.sin(2 * k * x - 2 * tz - 2 * pz)
    )
    out = -params.v_xy / 4 * ((1 - params.z_f) * d1 + params.z_f * d2)
    return out if out.ndim else float(out)


def convert_rate(params: LatticeParams, rate_hz: float) -> float:
    """Convert a laboratory rate in 1/s to expected events per 1/E_R of time."""
    if rate_hz < 0:
        raise ValidationError("rate_hz", f"must be non-negative, got {rate_hz}")
    return rate_hz / params.er_frequency


@dataclass(frozen=True)
class Cell:
    left_interval: tuple[float, float]
    right_interval: tuple[float, float]
    barrier_position: float
    left_minimum: float
    right_minimum: float


@dataclass(frozen=True)
class WellPartition:
    """Ordered lattice cells covering a periodic domain.

    Cells are laid out in unwrapped coordinates starting at the first
    inter-cell maximum at or above ``domain[0]``; the last cell may extend
    past ``domain[1]`` and wraps around periodically.
    """

    cells: tuple[Cell, ...]
    domain: tuple[float, float]
    edges: np.ndarray = field(repr=False, compare=False)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        out = []
        for c in self.cells:
            out.extend([c.left_interval, c.right_interval])
        return out

    def interval_index(self, x) -> np.ndarray:
        """Index into :attr:`intervals` for each position in ``x``.

        Even indices are left sub-wells, odd indices right sub-wells.  A point
        on an interval edge belongs to the lower-x interval.
        """
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        start = self.edges[0]
        u = np.mod(x - start, hi - lo)
        idx = np.searchsorted(self.edges - start, u - EDGE_TOL, side="left") - 1
        return np.mod(idx, 2 * len(self.cells))

    def cell_containing(self, x0: float) -> int:
        return int(self.interval_index(x0)) // 2

    def left_mask(self, x) -> np.ndarray:
        return self.interval_index(x) % 2 == 0

    def interval_mask(self, x, cell: int, side: str) -> np.ndarray:
        target = 2 * cell + (0 if side == "left" else 1)
        return self.interval_index(x) == target


def _refine(params, a, c):
    """Root of dV/dx bracketed by [a, c]."""
    g = lambda t: potential_1d_gradient(params, t)  # noqa: E731
    ga, gc = g(a), g(c)
    if ga == 0.0:
        return float(a)
    if gc == 0.0:
        return float(c)
    return float(brentq(g, a, c, xtol=REFINE_TOL * 1e-3, rtol=4 * np.finfo(float).eps))


def _cell_extrema(params: LatticeParams, samples: int):
    """Locate the inter-cell maximum, and the minima and internal barrier of one period."""
    xs = np.arange(samples) / samples * WAVELENGTH
    vs = potential_1d(params, xs)
    # Global maximum of the period marks the boundary between cells.
    j = int(np.argmax(vs))
    h = WAVELENGTH / samples
    start = _refine(params, xs[j] - h, xs[j] + h) if vs[j] > vs.min() else 0.0
    ts = start + np.arange(samples + 1) / samples * WAVELENGTH
    vt = potential_1d(params, ts)
    interior = np.arange(1, samples)
    is_min = (vt[interior] < vt[interior - 1]) & (vt[interior] <= vt[interior + 1])
    is_max = (vt[interior] > vt[interior - 1]) & (vt[interior] >= vt[interior + 1])
    mins = interior[is_min]
    maxs = interior[is_max]
    if len(mins) != 2 or len(maxs) != 1:
        raise DegenerateWell(
            f"expected two minima and one internal barrier per cell, found "
            f"{len(mins)} minima and {len(maxs)} maxima (z_f={params.z_f})"
        )
    refined_min = [_refine(params, ts[i - 1], ts[i + 1]) for i in mins]
    m = maxs[0]
    barrier = _refine(params, ts[m - 1], ts[m + 1])
    return start, refined_min[0] - start, refined_min[1] - start, barrier - start


def partition_wells(params: LatticeParams, domain=(-9.75, 10.25), samples_per_cell: int = 512) -> WellPartition:
    """Split ``domain`` into lambda-wide cells of left and right sub-wells."""
    lo, hi = map(float, domain)
    width = hi - lo
    n_cells = round(width / WAVELENGTH)
    if n_cells < 1 or abs(width - n_cells * WAVELENGTH) > 1e-9:
        raise ValidationError("domain", f"width {width} is not a positive integer multiple of lambda")
    if samples_per_cell < 64:
        raise ValidationError("samples_per_cell", f"must be >= 64, got {samples_per_cell}")

    start, min_l, min_r, barrier = _cell_extrema(params, samples_per_cell)
    first = lo + np.mod(start - lo, WAVELENGTH)
    if first - lo > WAVELENGTH - REFINE_TOL * 10:
        first -= WAVELENGTH
    cells = []
    edges = []
    for j in range(n_cells):
        a = float(first + j * WAVELENGTH)
        b = a + barrier
        cells.append(Cell((a, b), (b, a + WAVELENGTH), b, a + min_l, a + min_r))
        edges.extend([a, b])
    edges.append(first + n_cells * WAVELENGTH)
    return WellPartition(tuple(cells), (lo, hi), np.asarray(edges))
