"""End to end: fit, measure bias/variance, compare with the closed-form
bounds, and read off the predicted limiting rates.

The bounds are evaluated at absolute constants = 1, so they are shape
calibrations rather than certified inequalities; the interesting part is
that they track the measured risk across n at all.
"""

from krrlab import (KernelSpec, TargetSpec, concentration, estimate_bias,
                    estimate_variance, mercer_spectrum, rate_predictions,
                    risk_bounds, sample_sphere)

d = 16
spec = KernelSpec.ntk(3)
profile = mercer_spectrum(spec, d, 12)
k = profile.boundary_index(1)
target = TargetSpec(coeffs=((0, 1.0), (1, 0.5), (2, 0.25)),
                    anchor=sample_sphere(1, d, 99)[0])
sigma_eps = 1.0

print(f"{spec.label()}, d={d}, k={k}, min-norm interpolation, noise 1")
print(f"{'n':>5} {'bias':>10} {'B bound':>10} {'variance':>10} {'V bound':>10} {'rho':>6}")
for n in (64, 128, 256):
    X = sample_sphere(n, d, seed=n)
    T = sample_sphere(1000, d, seed=n + 1)
    bias, _ = estimate_bias(spec, X, target, 0.0, T)
    variance, _ = estimate_variance(spec, X, 0.0, sigma_eps, T)
    rho = concentration(spec, X, profile, k, 0.0).rho
    bounds = risk_bounds(profile, n, k, 0.0, rho, sigma_eps, target=target)
    print(f"{n:>5} {bias:>10.4f} {bounds.b_bound:>10.3f} "
          f"{variance:>10.4f} {bounds.v_bound:>10.3f} {rho:>6.2f}")

print("\npredicted limiting exponents:")
for regime, params in [("high_dim", {"tau": "3/2"}),
                       ("fixed_dim_interp", {"a": "1/15", "r": "3/2"}),
                       ("fixed_dim_reg", {"a": "1/2", "b": 0, "r": 1}),
                       ("time_mapped", {"a": "1/2", "r": 2, "s": 1})]:
    pred = rate_predictions(regime, **params)
    kind = "growth" if pred.variance_grows else "decay"
    print(f"  {regime:>18}: variance {kind} exponent(s) "
          f"{tuple(str(e) for e in pred.variance_exponents)} on {pred.axis}, "
          f"bias decay {pred.bias_exponent}")
