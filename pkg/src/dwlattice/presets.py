"""Figure presets: fixed run configurations for each lattice figure.

Common caption parameters: V_xy = 36 E_R, delta_theta = pi/2, delta_phi = 0,
E_R quoted as 3.5 kHz.  Time windows are not given in the figures and are
chosen per preset:

* no-kick tunnelling runs cover at least one full tunnelling period
  2*pi/delta (about 3270/E_R at z_f = 0.05, 750/E_R at z_f = 0.1);
* kicked population and survival runs cover two periods at z_f = 0.1;
* purity runs extend past t = 40/E_R.

Bump ``PRESET_VERSION`` whenever a preset changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import GridBlock, InitialStateBlock, KickBlock, LatticeBlock, PropagationBlock, RunConfig, validate
from .errors import UnknownPreset

PRESET_VERSION = "1"

PRESET_IDS = (
    "fig1", "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b",
    "fig6", "fig7", "fig8a", "fig8b", "fig9a", "fig9b",
)

T_TUNNEL = {0.05: 3600.0, 0.1: 1600.0}
T_KICKED = 1600.0
T_PURITY = 50.0


@dataclass(frozen=True)
class Preset:
    id: str
    action: str  # "potential" or "ensemble"
    description: str
    runs: dict = field(default_factory=dict)
    observables: tuple = ()
    version: str = PRESET_VERSION


def _base(z_f: float, t_final: float, kind: str, n_trajectories: int = 50) -> RunConfig:
    cfg = RunConfig(
        lattice=LatticeBlock(z_f=z_f),
        grid=GridBlock(),
        propagation=PropagationBlock(t_final=t_final),
        initial_state=InitialStateBlock(kind=kind, sigma=0.1, center=0.0),
    )
    return cfg.with_updates("ensemble", n_trajectories=n_trajectories)


def _kicked(z_f, t_final, kind, m, rate_hz) -> RunConfig:
    return _base(z_f, t_final, kind).with_updates(
        "kick", enabled=True, strength_m=float(m), rate_hz=float(rate_hz)
    )


def _rate_label(rate_hz: float) -> str:
    return f"{rate_hz:g}hz".replace("+", "")


def _fig1():
    runs = {f"zf{z}": _base(z, 1.0, "L", 1) for z in (0.05, 0.1)}
    return Preset("fig1", "potential", "double-well potential V(x) for z_f = 0.05 and 0.1", runs, ("potential",))


def _fig2():
    runs = {f"zf{z}": _base(z, T_TUNNEL[z], "L", 1) for z in (0.05, 0.1)}
    return Preset("fig2", "ensemble", "|L> tunnelling without kicks, z_f = 0.05 and 0.1", runs, ("p_left_total",))


def _fig3(z_f, panel):
    runs = {f"zf{z_f}": _base(z_f, T_TUNNEL[z_f], "gaussian", 1)}
    return Preset(
        f"fig3{panel}", "ensemble", f"sigma = 0.1 Gaussian without kicks, z_f = {z_f}",
        runs, ("p_initial_well", "p_right_well"),
    )


_FIG4_RATES = {10: (10, 100, 1e4), 100: (1, 100, 1e4)}


def _fig45(fig, panel, m, observable):
    runs = {f"m{m}_{_rate_label(r)}": _kicked(0.1, T_KICKED, "L", m, r) for r in _FIG4_RATES[m]}
    return Preset(f"{fig}{panel}", "ensemble", f"|L> with kicks m = {m}, z_f = 0.1", runs, (observable,))


def _fig67(fig, observables):
    runs = {
        f"m{m}_{_rate_label(r)}": _kicked(0.1, T_KICKED, "gaussian", m, r)
        for m in (10, 100)
        for r in (10, 100, 1e4)
    }
    return Preset(fig, "ensemble", "Gaussian with kicks m = 10 and 100, z_f = 0.1", runs, observables)


def _fig89(fig, rate_hz, m):
    runs = {kind_label: _kicked(0.1, T_PURITY, kind, m, rate_hz) for kind_label, kind in (("L", "L"), ("gaussian", "gaussian"))}
    return Preset(fig, "ensemble", f"purity of |L> and the Gaussian, {rate_hz:g} Hz, m = {m}", runs, ("purity",))


_BUILDERS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3a": lambda: _fig3(0.05, "a"),
    "fig3b": lambda: _fig3(0.1, "b"),
    "fig4a": lambda: _fig45("fig4", "a", 10, "p_left_total"),
    "fig4b": lambda: _fig45("fig4", "b", 100, "p_left_total"),
    "fig5a": lambda: _fig45("fig5", "a", 10, "survival"),
    "fig5b": lambda: _fig45("fig5", "b", 100, "survival"),
    "fig6": lambda: _fig67("fig6", ("p_initial_well", "p_right_well")),
    "fig7": lambda: _fig67("fig7", ("survival",)),
    "fig8a": lambda: _fig89("fig8a", 100, 10),
    "fig8b": lambda: _fig89("fig8b", 100, 100),
    "fig9a": lambda: _fig89("fig9a", 1e4, 10),
    "fig9b": lambda: _fig89("fig9b", 1e4, 100),
}


def expand_preset(preset_id: str) -> Preset:
    try:
        preset = _BUILDERS[preset_id]()
    except KeyError:
        raise UnknownPreset(f"unknown preset {preset_id!r}; choose from {', '.join(PRESET_IDS)}") from None
    for cfg in preset.runs.values():
        validate(cfg)
    return preset
