"""Interpolation variance on the unit disk keeps growing with n.

The depth-3 network kernel in fixed dimension 2 has a heavy polynomial
spectral tail; fitting pure noise without regularization produces a
variance that grows with the sample size instead of stabilizing.  Medians
over seeds are reported because individual fits produce extreme values.
Desk-scale version of the `krrlab fig2` output.
"""

from krrlab.experiments import disk_variance_curves

rows = disk_variance_curves(n_values=(64, 128, 256, 512), num_seeds=10,
                            m_test=500)
print(f"{'n':>5} {'median variance':>16} {'95% band':>24}")
for n, med, lo, hi, _ in rows:
    print(f"{n:>5} {med:>16.1f} [{lo:>10.1f}, {hi:>10.1f}]")
print("\nnote the growth: a Gaussian-features heuristic would predict a flat curve")
