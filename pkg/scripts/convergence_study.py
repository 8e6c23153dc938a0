"""Convergence of the Bloch solver in n_max and of the split-operator step in dt.

Prints the low-lying energies against n_max, then the error of a propagated
two-level superposition against its exact evolution as dt is halved.
"""

import argparse

import numpy as np

from dwlattice.dynamics import WaveFunction, evolve, init_grid, plan_propagator
from dwlattice.lattice import LatticeParams
from dwlattice.spectral import compute_spectrum, eigenstates_on_grid, splitting


def basis_study(params, sizes):
    ref = compute_spectrum(params, max(sizes)).energies[:10]
    print(f"n_max   max |E_l - E_l(ref)| (l < 10)   splitting")
    for n in sizes:
        spec = compute_spectrum(params, n)
        print(f"{n:5d}   {np.max(np.abs(spec.energies[:10] - ref)):.3e}                   {splitting(spec):.10f}")


def step_study(params, t_final, steps):
    grid = init_grid()
    spec = compute_spectrum(params)
    rows = eigenstates_on_grid(spec, grid, 4)
    c = np.array([0.6, 0.5j, -0.4, 0.3 + 0.3j])
    c /= np.linalg.norm(c)
    exact = (c * np.exp(-1j * spec.energies[:4] * t_final)) @ rows
    print(f"\ndt         max pointwise error at t = {t_final}   ratio")
    prev = None
    for dt in steps:
        plan = plan_propagator(params, grid, dt)
        psi = evolve(WaveFunction(c @ rows, grid), plan, round(t_final / dt))
        err = np.max(np.abs(psi.amplitudes - exact))
        ratio = "" if prev is None else f"{prev / err:.2f}"
        print(f"{dt:.2e}   {err:.3e}                       {ratio}")
        prev = err


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--z-f", type=float, default=0.1)
    p.add_argument("--t-final", type=float, default=1.0)
    args = p.parse_args(argv)
    params = LatticeParams(z_f=args.z_f)
    basis_study(params, [16, 24, 32, 48, 64])
    step_study(params, args.t_final, [4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4])


if __name__ == "__main__":
    main()
