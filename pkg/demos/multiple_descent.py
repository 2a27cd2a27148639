"""Multiple descent: interpolation variance against sample size.

Learning pure noise with a cubic polynomial kernel on spheres of growing
dimension.  The variance curve peaks whenever n crosses the cumulative
count of harmonics up to a degree (1 + d, then 1 + d + N(d, 2), ...) and
dips in between; the dips deepen as the dimension grows.  Desk-scale
version of the `krrlab fig1` output.
"""

from krrlab.experiments import multiple_descent_curves
from krrlab.sphere import harmonic_dim_cumulative

for d in (8, 16):
    boundaries = [harmonic_dim_cumulative(d, l) for l in (1, 2, 3)]
    print(f"\nd = {d}: harmonic boundaries at n = {boundaries}")
    rows = multiple_descent_curves("poly3", d_values=(d,),
                                   n_values=(8, 16, 32, 64, 128, 256, 512),
                                   num_seeds=10, m_test=500)
    print(f"{'n':>5} {'median variance':>16} {'95% band':>22}")
    for _, _, n, med, lo, hi, _ in rows:
        marker = " <- near boundary" if any(0.6 < n / b < 1.6 for b in boundaries) else ""
        print(f"{n:>5} {med:>16.3f} [{lo:>9.3f}, {hi:>9.3f}]{marker}")
