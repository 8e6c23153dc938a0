"""Ensemble purity of |L> and the Gaussian packet under weak kicks, for both E_R readings.

The recoil quote of 3500 can be read as E_R/hbar or E_R/h; the choice rescales
the dimensionless kick rate by 2 pi.  This prints M(t) at a few times for each.
"""

import argparse

from dwlattice.presets import expand_preset
from dwlattice.runner import prepare, run_monte_carlo


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--t-final", type=float, default=40.0)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--trajectories", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args(argv)
    for conv in ("hbar", "h"):
        for label, cfg in expand_preset("fig8a").runs.items():
            cfg = cfg.with_updates("lattice", er_convention=conv)
            cfg = cfg.with_updates("propagation", t_final=args.t_final)
            cfg = cfg.with_updates("ensemble", base_seed=args.seed, n_trajectories=args.trajectories, workers=args.workers)
            s = run_monte_carlo(prepare(cfg))
            picks = [i * (len(s.times) - 1) // 4 for i in range(5)]
            values = "  ".join(f"M({s.times[i]:.3g})={s.purity[i]:.4f}" for i in picks)
            print(f"E_R/{conv:4s} {label:8s} {values}", flush=True)


if __name__ == "__main__":
    main()
