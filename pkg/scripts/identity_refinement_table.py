#!/usr/bin/env python3
"""Tabulate energy-identity residuals under grid refinement.

For a fixed smooth state, prints the relative residual of each instantaneous
identity at a base resolution and after doubling Nx and Ny, plus the drop
factor.  Residuals are limited by spatial truncation, so the drops measure
spectral convergence of the analysis pipeline.
"""

import argparse

import numpy as np

from kbstrip.energy import WeightParams, identity_residual
from kbstrip.geometry import StripGeometry, base_grid_field, to_spectral

IDENTITIES = ("E2", "E3", "E4", "ELEV")


def make_state(Nx, Ny, L, width):
    g = StripGeometry(B=np.pi, L=L, Nx=Nx, Ny=Ny)
    X = g.x_nodes()[:, None]
    Y = g.y_nodes()[None, :]
    vals = 0.3 * np.exp(-((X / width) ** 2)) * (
        np.sin(Y) + 0.6 * np.sin(2 * Y) + 0.36 * np.sin(3 * Y)
        + 0.216 * np.sin(4 * Y)
    )
    return to_spectral(base_grid_field(g, vals))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--Nx", type=int, default=512)
    ap.add_argument("--Ny", type=int, default=32)
    ap.add_argument("--L", type=float, default=30.0)
    ap.add_argument("--width", type=float, default=0.4)
    ap.add_argument("--b", type=float, default=0.1)
    args = ap.parse_args()

    b = WeightParams(b=args.b)
    base = make_state(args.Nx, args.Ny, args.L, args.width)
    fine = make_state(2 * args.Nx, 2 * args.Ny, args.L, args.width)

    print(f"{'identity':<8} {'base':>12} {'refined':>12} {'drop':>10}")
    for ident in IDENTITIES:
        r0 = identity_residual(base, b, ident).relative()
        r1 = identity_residual(fine, b, ident).relative()
        drop = r0 / max(r1, 1e-300)
        print(f"{ident:<8} {r0:12.3e} {r1:12.3e} {drop:10.1f}")


if __name__ == "__main__":
    main()
