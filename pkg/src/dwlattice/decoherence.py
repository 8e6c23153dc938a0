"""Spontaneous-emission phase kicks interleaved with unitary propagation.

A kick multiplies the wavefunction by exp(-i m k x sin(theta) cos(phi)),
i.e. a momentum transfer m*k*sin(theta)*cos(phi) along the lattice axis.
Kick times form a homogeneous Poisson process; directions are isotropic
unless the dipole pattern is requested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import PropagatorPlan, WaveFunction, strang
from .errors import ValidationError
from .lattice import K_LATTICE

EMISSION_PATTERNS = ("isotropic", "dipole")


@dataclass(frozen=True)
class KickParams:
    strength_m: float = 10.0
    rate: float = 0.0
    enabled: bool = True
    emission: str = "isotropic"

    def __post_init__(self):
        if not self.strength_m > 0:
            raise ValidationError("strength_m", f"must be positive, got {self.strength_m}")
        if not self.rate >= 0:
            raise ValidationError("rate", f"must be non-negative, got {self.rate}")
        if self.emission not in EMISSION_PATTERNS:
            raise ValidationError("emission", f"must be one of {EMISSION_PATTERNS}, got {self.emission!r}")

    @property
    def active(self) -> bool:
        return self.enabled and self.rate > 0

    @property
    def wavenumber(self) -> float:
        """k' = 2 pi / lambda' with lambda' = lambda / m."""
        return self.strength_m * K_LATTICE


@dataclass(frozen=True)
class KickEvent:
    time: float
    theta: float
    phi: float

    @property
    def x_projection(self) -> float:
        return float(np.sin(self.theta) * np.cos(self.phi))


@dataclass(frozen=True)
class TrajectorySeed:
    base_seed: int
    trajectory_index: int

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.base_seed, spawn_key=(self.trajectory_index,))
        return np.random.Generator(np.random.PCG64(ss))


def sample_kick_times(kp: KickParams, t_start: float, t_end: float, rng: np.random.Generator) -> list[float]:
    if t_end < t_start:
        raise ValueError("t_end must be >= t_start")
    if not kp.active:
        return []
    times = []
    t = t_start
    while True:
        t += rng.exponential(1.0 / kp.rate)
        if t >= t_end:
            return times
        if not times or t > times[-1]:
            times.append(float(t))


def sample_direction(rng: np.random.Generator, emission: str = "isotropic") -> tuple[float, float]:
    """Photon direction (theta, phi); uniform on the sphere or sin^2(theta)-weighted."""
    while True:
        cos_t = rng.uniform(-1.0, 1.0)
        if emission == "isotropic" or rng.uniform() < 1.0 - cos_t**2:
            break
    phi = rng.uniform(0.0, 2 * np.pi)
    return float(np.arccos(cos_t)), float(phi)


def sample_kicks(kp: KickParams, boundaries: Sequence[float], rng: np.random.Generator) -> list[KickEvent]:
    """Kick events for consecutive intervals [b_i, b_{i+1}).

    Within each interval all times are drawn before any direction.
    """
    events = []
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        times = sample_kick_times(kp, a, b, rng)
        for t in times:
            theta, phi = sample_direction(rng, kp.emission)
            events.append(KickEvent(t, theta, phi))
    return events


def kick_phase(x: np.ndarray, kp: KickParams, ev: KickEvent) -> np.ndarray:
    return np.exp(-1j * kp.wavenumber * ev.x_projection * x)


def apply_kick(psi: WaveFunction, kp: KickParams, ev: KickEvent) -> WaveFunction:
    return WaveFunction(psi.amplitudes * kick_phase(psi.grid.x, kp, ev), psi.grid, dict(psi.info))


def record_steps(n_steps: int, n_record: int) -> list[int]:
    steps = list(range(0, n_steps + 1, n_record))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return steps


def _step_of(time: float, dt: float, n_steps: int) -> int:
    """Step index i with (i - 1) * dt <= time < i * dt."""
    i = int(np.floor(time / dt)) + 1
    if (i - 1) * dt > time:
        i -= 1
    elif i * dt <= time:
        i += 1
    return min(max(i, 1), n_steps)


BatchObserver = Callable[[int, float, np.ndarray], None]


def propagate_batch(
    amps: np.ndarray,
    plan: PropagatorPlan,
    n_steps: int,
    kp: KickParams,
    kicks: Sequence[Sequence[KickEvent]],
    n_record: int,
    observer: Optional[BatchObserver] = None,
) -> np.ndarray:
    """Evolve a (batch, n_points) array of independent trajectories.

    ``kicks[r]`` lists the events of row ``r``.  Steps free of kicks are
    applied to the whole batch; a row with kicks inside a step is advanced
    by partial steps that land exactly on each kick time.  Row results do
    not depend on the other rows in the batch.
    """
    amps = np.array(amps, dtype=complex, ndmin=2)
    dt = plan.dt
    x = plan.grid.x
    hv, kin = plan.half_potential_phase, plan.kinetic_phase

    by_step: dict[int, list[tuple[int, KickEvent]]] = {}
    for r, events in enumerate(kicks):
        for ev in events:
            if 0.0 <= ev.time < n_steps * dt:
                by_step.setdefault(_step_of(ev.time, dt, n_steps), []).append((r, ev))

    recorded = set(record_steps(n_steps, n_record))
    if observer is not None:
        observer(0, 0.0, amps)
    for i in range(1, n_steps + 1):
        hits = by_step.get(i)
        if hits is None:
            amps = strang(amps, hv, kin)
        else:
            rows = sorted({r for r, _ in hits})
            free = np.setdiff1d(np.arange(amps.shape[0]), rows)
            new = np.empty_like(amps)
            if free.size:
                new[free] = strang(amps[free], hv, kin)
            t_end = i * dt
            for r in rows:
                row = amps[r]
                t = (i - 1) * dt
                for _, ev in sorted((h for h in hits if h[0] == r), key=lambda h: h[1].time):
                    tau = ev.time - t
                    if tau > 0:
                        row = strang(row, *plan.phases(tau))
                    row = row * kick_phase(x, kp, ev)
                    t = ev.time
                tau = t_end - t
                if tau > 0:
                    row = strang(row, *plan.phases(tau))
                new[r] = row
            amps = new
        if observer is not None and i in recorded:
            observer(i, i * dt, amps)
    return amps


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: np.ndarray = field(repr=False)
    kicks: list[KickEvent]

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]


def n_steps_for(t_final: float, dt: float) -> int:
    n = round(t_final / dt)
    if abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValidationError("t_final", f"{t_final} is not an integer multiple of dt={dt}")
    return n


def trajectory_kicks(kp: KickParams, seed: TrajectorySeed, plan: PropagatorPlan, n_steps: int, n_record: int) -> list[KickEvent]:
    if not kp.active:
        return []
    bounds = [s * plan.dt for s in record_steps(n_steps, n_record)]
    return sample_kicks(kp, bounds, seed.rng())


def evolve_trajectory(
    psi0: WaveFunction,
    plan: PropagatorPlan,
    kp: KickParams,
    t_final: float,
    seed: TrajectorySeed,
    observer: Optional[Callable[[int, float, np.ndarray], None]] = None,
    n_record: Optional[int] = None,
    kicks: Optional[Sequence[KickEvent]] = None,
) -> Trajectory:
    """One kicked trajectory; ``kicks`` overrides sampling from ``seed``."""
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    n_steps = n_steps_for(t_final, plan.dt)
    if n_record is None:
        n_record = max(1, n_steps // 200)
    events = list(kicks) if kicks is not None else trajectory_kicks(kp, seed, plan, n_steps, n_record)
    times, snaps = [], []

    def collect(i, t, amps):
        times.append(t)
        snaps.append(amps[0].copy())
        if observer is not None:
            observer(i, t, amps[0])

    propagate_batch(psi0.amplitudes, plan, n_steps, kp, [events], n_record, collect)
    return Trajectory(np.asarray(times), np.asarray(snaps), events)
