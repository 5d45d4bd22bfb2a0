"""Net lower bounds against upper rate formulas.

For the kernel x^-1/4 with p = 2, prints the Rademacher, kernel-atom and
means constructions for a few sizes, then the largest lower/upper ratio
over n <= 1024 once the upper formula's constant is fitted.
"""

from entlab.kernel import KernelSpec
from entlab.oracle import Table, rate_oracle
from entlab.operator import net_lower_kernel_atoms, net_lower_means, net_lower_rademacher
from entlab.verify import net_regimes, net_ratios


def main():
    k = KernelSpec.power(0.25)
    print("kind           size   bound    entropy index")
    for n in (1, 2, 4, 8):
        b = net_lower_rademacher(k, n)
        print(f"rademacher   {n:6d}   {b.bound:.4f}   {b.entropy_index}")
    for m in (4, 16, 64):
        b = net_lower_kernel_atoms(k, 2.0, m)
        print(f"atoms        {m:6d}   {b.bound:.4f}   {b.entropy_index}")
        b = net_lower_means(k, 2.0, m)
        print(f"means        {m:6d}   {b.bound:.4f}   {b.entropy_index}")
    print("\ncase  fitted C  max ratio/C for n <= 1024")
    for case, _, params, build in net_regimes():
        r = net_ratios(build, rate_oracle(Table.TH04, params))
        C = float(r[511:].max())
        print(f"{case:4s}  {C:8.4f}  {r.max() / C:.4f}")


if __name__ == "__main__":
    main()
