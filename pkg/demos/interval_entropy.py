"""Entropy numbers of [0, 1] and of [0, 1] under a kernel metric.

Prints the exact in-set entropy numbers of a 1001-point grid next to
1/(2n), then the same for the 65-point sample of ([0,1], d) induced by
the kernel x^-1/4 with q = 2, with the fitted decay exponent.
"""

import warnings

import numpy as np

from entlab.kernel import KernelSpec, interval_rate_under_d, sampled_interval_metric
from entlab.metricspace import PointCloud, entropy_numbers
from entlab.rates import fit_power_law


def main():
    grid = PointCloud(np.linspace(0.0, 1.0, 1001))
    e = entropy_numbers(grid, 10).values
    print(" n   eps_n     1/(2n)")
    for n, v in enumerate(e, start=1):
        print(f"{n:2d}  {v:.4f}   {1 / (2 * n):.4f}")

    spec = KernelSpec.power(0.25)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cloud = sampled_interval_metric(spec, 2.0, 65)
    d = entropy_numbers(cloud, 32, solver="milp").values
    p, C = fit_power_law(np.arange(1, 33), d)
    want = interval_rate_under_d(spec, 2.0)
    print(f"\nkernel metric: eps_n ~ {C:.3f} n^-{p:.3f}; predicted exponent {want.p0:.3f}")


if __name__ == "__main__":
    main()
