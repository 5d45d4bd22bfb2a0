"""Entropy brackets for the absolutely convex hull of a diagonal set.

Generators sigma_k e_k with sigma_k = 1/k in l_2^6. Brackets come from a
coefficient net whose Hausdorff gap delta shrinks with the mesh. The
TT03(4, 2, 0) ratio compares the dyadic net radii with the dyadic entropy
numbers of the generators; it moves little between meshes even though
the brackets themselves tighten.
"""

import numpy as np

from entlab.hull import diag_set, l02_lower
from entlab.seqspace import MonotoneSeq
from entlab.verify import tt03_ratio


def main():
    sigma = MonotoneSeq(1.0 / np.arange(1, 65))
    spec = diag_set(sigma, 2.0, 6)
    for mesh in (0.1, 0.05):
        ratio, prof = tt03_ratio(spec, mesh)
        print(f"mesh {mesh}: net {prof.net_size} points, delta {prof.delta:.2f}, TT03 ratio {ratio:.4f}")
        for n in (1, 2, 4, 8, 16):
            lo, up = prof.lower[n - 1], prof.upper[n - 1]
            extra = f"   l02 lower {l02_lower(sigma, 2.0, n).value:.4f}" if n <= 2 else ""
            print(f"  eps_{n:<3d} in [{lo:.4f}, {up:.4f}]{extra}")


if __name__ == "__main__":
    main()
