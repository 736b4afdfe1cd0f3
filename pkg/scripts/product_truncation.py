"""Genus choice, certified truncation and zero audits for a few zero families.

Prints, per family and working radius, the chosen genus, the truncation N,
the certified tail bound and the drift of log|P| on |u| = R when N grows by 25%.
"""
import math

import numpy as np

from ghlab.entire import MINIMAL_GENUS, build_product, log_product, zero_audit, zeros_inside

FAMILIES = {
    "i 2^k": [(1j * 2.0**k, 1) for k in range(1, 200)],
    "1.5^k e^{ik}": [(1.5**k * complex(math.cos(k), math.sin(k)), 1) for k in range(1, 300)],
    "k (double)": [(float(k), 2) for k in range(1, 2000)],
    "k^2 i": [(1j * k * k, 1) for k in range(1, 2000)],
}


def main():
    print(f"{'family':14} {'R':>5} {'genus':>5} {'N':>5} {'tail':>9} {'drift':>9} audit")
    for name, zeros in FAMILIES.items():
        for R in (1.3, 4.5):
            P = build_product(zeros, MINIMAL_GENUS, radius=R, tol=1e-8)
            N = P.truncation
            u = R * np.exp(2j * np.pi * np.arange(64) / 64)
            up = min(len(P.zeros), math.ceil(1.25 * N))
            drift = float(np.max(np.abs(log_product(P, u, upto=N).real - log_product(P, u, upto=up).real)))
            c = complex(P.zeros[0])
            r = 0.25 * abs(P.zeros[1] - P.zeros[0])
            audit = f"{zero_audit(P, c, r)}/{zeros_inside(P, c, r)}"
            print(f"{name:14} {R:5.1f} {int(P.genus[0]):5d} {N:5d} {P.tail_log_bound:9.2e} {drift:9.2e} {audit}")


if __name__ == "__main__":
    main()
