"""Singular values of discretized Riemann-Liouville operators.

For each order alpha the grid-256 spectrum is fitted to C n^-p over
n = 8..64 and compared with p = alpha. The semigroup identity
R_1/2 R_1/2 1 = R_1 1 is checked on the same grid.
"""

import numpy as np

from entlab.operator import RL, DiscretizedOperator, semigroup_check, singular_values
from entlab.rates import fit_power_law


def main():
    print("alpha  fitted p   s_1")
    for alpha in (0.25, 0.5, 0.75, 1.0, 1.5):
        s = singular_values(DiscretizedOperator(RL(alpha), 256)).values
        p, _ = fit_power_law(np.arange(8, 65), s[7:64])
        print(f"{alpha:5.2f}  {p:8.3f}   {s[0]:.4f}")
    err = semigroup_check(0.5, 0.5, [1.0], 256)
    print(f"\nsemigroup error at grid 256: {err:.1e}")


if __name__ == "__main__":
    main()
