"""Per-degree spectra of dot-product kernels on the sphere.

Computes the harmonic decomposition of the depth-3 network kernels and a
cubic polynomial kernel, shows the trace accounting (how much mass hides
above the computed degrees), and the tail effective ranks that drive
every bound downstream.
"""

from krrlab import (KernelSpec, effective_ranks, eval_dot_kernel,
                    mercer_spectrum)

d = 16
l_max = 10

for spec in (KernelSpec.ntk(3), KernelSpec.gpk(3),
             KernelSpec.polynomial(3, inner_scale=1 / d, offset=1.0)):
    profile = mercer_spectrum(spec, d, l_max)
    h1 = eval_dot_kernel(spec, 1.0)
    print(f"\n{spec.label()} on the {d - 1}-sphere, h(1) = {h1:.6g}")
    print(f"{'degree':>6} {'mass':>12} {'multiplicity':>14} {'per-eigenvalue':>16}")
    for l, mass, mult in profile.degrees:
        print(f"{l:>6} {mass:>12.5g} {mult:>14} {mass / mult:>16.4e}")
    print(f"mass above degree {l_max}: {profile.tail_remainder:.4g} "
          f"({profile.tail_remainder / h1:.2%} of the trace)")

    # effective ranks of the tail after the degree-1 block: repeated
    # eigenvalues make these large, which is what tames interpolation
    k = profile.boundary_index(1)
    ranks = effective_ranks(profile, k)
    print(f"tail after k={k}: r_k = {ranks.r_k:.1f}, R_k = {ranks.R_k:.1f}")
