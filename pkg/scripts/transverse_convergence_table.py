#!/usr/bin/env python3
"""Tabulate terminal differences between transverse truncation levels.

Runs the coupled N-mode system for each mode count and prints the L2
difference between consecutive levels together with the spectral tail mass
the finest run leaves above each level.
"""

import argparse

import numpy as np

from kbstrip.galerkin import convergence_study
from kbstrip.geometry import StripGeometry, base_grid_field, to_spectral
from kbstrip.timestepping import SimConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Ns", default="2,4,8,16", help="comma-separated levels")
    ap.add_argument("--Nx", type=int, default=128)
    ap.add_argument("--Ny", type=int, default=16)
    ap.add_argument("--dt", type=float, default=2e-3)
    ap.add_argument("--T", type=float, default=0.5)
    args = ap.parse_args()
    Ns = [int(s) for s in args.Ns.split(",")]

    g = StripGeometry(B=np.pi, L=20.0, Nx=args.Nx, Ny=args.Ny)
    X = g.x_nodes()[:, None]
    Y = g.y_nodes()[None, :]
    vals = 0.3 * np.exp(-(X**2)) * (np.sin(Y) + 0.5 * np.sin(2 * Y))
    u0 = to_spectral(base_grid_field(g, vals))

    rep = convergence_study(u0, SimConfig(dt=args.dt, T=args.T), Ns)
    print(f"{'N_lo -> N_hi':<14} {'terminal diff':>14} {'tail above N_lo':>16}")
    for (lo, hi), err, tail in zip(zip(rep.Ns, rep.Ns[1:]), rep.errors,
                                   rep.tail_norms):
        print(f"{lo:>4} -> {hi:<5} {err:14.3e} {tail:16.3e}")


if __name__ == "__main__":
    main()
