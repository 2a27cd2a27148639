"""Kernel ridge regression, risk estimation, risk bounds, rate table.

Everything stays in the dual (Gram) representation: a fit is the
coefficient vector a = (K + n*gamma*I)^{-1} y and predictions are
K(x, X) a, so the feature dimension never has to be finite.  At gamma = 0
the fit is the minimum-norm interpolator, realized by a pseudo-inverse
with a relative eigenvalue cutoff.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import linalg as sla

from .eigenbounds import BoundConstants
from .kernels import KernelSpec, cross_gram, gram
from .spectrum import SpectralProfile, effective_ranks
from .sphere import TargetSpec, synthesize_target

log = logging.getLogger(__name__)

MIN_NORM_RCOND = 1e-10      # relative eigenvalue cutoff of the pseudo-inverse
JITTER_SCALE = 1e-12        # diagonal jitter, times tr(K)/n, if factorization fails


class GramSolver:
    """Reusable solver for (K + n*gamma*I) a = b.

    gamma > 0 uses a Cholesky factorization (with a logged diagonal jitter
    retry if the matrix is numerically indefinite).  gamma = 0 uses the
    pseudo-inverse with relative cutoff ``MIN_NORM_RCOND`` by default;
    ``interpolator="direct_solve"`` instead solves the raw linear system,
    which keeps directions the spectral cutoff would drop and is the
    honest choice when interpolation is pushed past float64 conditioning.
    """

    def __init__(self, G: np.ndarray, gamma: float,
                 interpolator: str = "pseudoinverse"):
        if gamma < 0:
            raise ValueError("need gamma >= 0")
        if interpolator not in ("pseudoinverse", "direct_solve"):
            raise ValueError(f"unknown interpolator {interpolator!r}")
        G = np.asarray(G, dtype=float)
        self.n = G.shape[0]
        self.gamma = gamma
        self.rank = self.n
        self._mode = "cholesky"
        if gamma > 0.0:
            shifted = G + self.n * gamma * np.eye(self.n)
            try:
                self._factor = sla.cho_factor(shifted)
            except np.linalg.LinAlgError:
                jitter = JITTER_SCALE * np.trace(G) / self.n
                log.warning("factorization failed; retrying with jitter %.3g", jitter)
                self._factor = sla.cho_factor(shifted + jitter * np.eye(self.n))
        elif interpolator == "direct_solve":
            self._mode = "lu"
            self._factor = sla.lu_factor(G)
        else:
            self._mode = "pinv"
            w, V = np.linalg.eigh(G)
            keep = w > MIN_NORM_RCOND * max(w[-1], 0.0)
            self.rank = int(np.count_nonzero(keep))
            if self.rank == 0:
                raise ArithmeticError("Gram matrix has no eigenvalue above the "
                                      "pseudo-inverse cutoff")
            self._w = w[keep]
            self._V = V[:, keep]

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._mode == "cholesky":
            return sla.cho_solve(self._factor, b)
        if self._mode == "lu":
            return sla.lu_solve(self._factor, b)
        return self._V @ ((self._V.T @ b).T / self._w).T


@dataclass(frozen=True, eq=False)
class FittedPredictor:
    """Dual-form KRR predictor: f(x) = sum_i coefficients_i K(x, x_i)."""

    spec: KernelSpec
    train: np.ndarray
    coefficients: np.ndarray
    gamma: float
    rank: int               # eigenvalues kept by the solve (n unless min-norm truncated)
    zonal: bool = False

    def predict(self, T) -> np.ndarray:
        return cross_gram(self.spec, np.atleast_2d(T), self.train,
                          zonal=self.zonal) @ self.coefficients


def fit_gram(G: np.ndarray, y: np.ndarray, gamma: float,
             interpolator: str = "pseudoinverse") -> tuple[np.ndarray, int]:
    """Dual coefficients (K + n*gamma*I)^{-1} y and the rank used."""
    solver = GramSolver(G, gamma, interpolator)
    return solver.solve(np.asarray(y, dtype=float)), solver.rank


def fit(spec: KernelSpec, X, y, gamma: float, zonal: bool = False,
        interpolator: str = "pseudoinverse") -> FittedPredictor:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    coef, rank = fit_gram(gram(spec, X, zonal=zonal), y, gamma, interpolator)
    return FittedPredictor(spec=spec, train=X, coefficients=coef,
                           gamma=gamma, rank=rank, zonal=zonal)


def estimate_variance(spec: KernelSpec, X, gamma: float, sigma_eps: float, test,
                      mode: str = "closed_form", trials: int = 400, seed=0,
                      zonal: bool = False, interpolator: str = "pseudoinverse"
                      ) -> tuple[float, float]:
    """Variance of the fit under label noise, with its standard error.

    closed_form averages the exact per-test-point noise variance
    sigma^2 ||(K + n*gamma*I)^{-1} k(x_t)||^2, so the only randomness left
    is the test sample.  monte_carlo follows the learning-pure-noise
    protocol: draw noise labels, fit, average squared predictions, and
    repeat over ``trials`` draws.
    """
    if sigma_eps < 0:
        raise ValueError("need sigma_eps >= 0")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    test = np.atleast_2d(np.asarray(test, dtype=float))
    if sigma_eps == 0.0:
        return 0.0, 0.0
    solver = GramSolver(gram(spec, X, zonal=zonal), gamma, interpolator)
    C = cross_gram(spec, test, X, zonal=zonal)
    m = test.shape[0]
    if mode == "closed_form":
        S = solver.solve(C.T)
        per_point = sigma_eps ** 2 * np.sum(S * S, axis=0)
        return float(np.mean(per_point)), float(np.std(per_point, ddof=1) / math.sqrt(m))
    if mode == "monte_carlo":
        if trials < 2:
            raise ValueError("need trials >= 2 for a standard error")
        rng = np.random.default_rng(seed)
        E = sigma_eps * rng.standard_normal((X.shape[0], trials))
        P = C @ solver.solve(E)
        per_trial = np.mean(P * P, axis=0)
        return float(np.mean(per_trial)), float(np.std(per_trial, ddof=1) / math.sqrt(trials))
    raise ValueError(f"unknown mode {mode!r}")


def estimate_bias(spec: KernelSpec, X, target: TargetSpec, gamma: float, test,
                  zonal: bool = False, interpolator: str = "pseudoinverse"
                  ) -> tuple[float, float]:
    """Squared error of the noiseless fit against the target, over test points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    test = np.atleast_2d(np.asarray(test, dtype=float))
    f_star = synthesize_target(target)
    coef, _ = fit_gram(gram(spec, X, zonal=zonal), f_star(X), gamma, interpolator)
    preds = cross_gram(spec, test, X, zonal=zonal) @ coef
    sq = (preds - f_star(test)) ** 2
    return float(np.mean(sq)), float(np.std(sq, ddof=1) / math.sqrt(test.shape[0]))


def variance_from_features(features: np.ndarray, eigenvalues, gamma: float,
                           sigma_eps: float, interpolator: str = "pseudoinverse"
                           ) -> float:
    """Exact variance for an explicit finite feature map.

    With phi(x_i) as rows and population covariance diag(eigenvalues), the
    variance of the fit is sigma^2 tr(A Phi diag(lambda) Phi^T A) for
    A = (K + n*gamma*I)^{-1}; exact over both noise and input measure.
    """
    phi = np.atleast_2d(np.asarray(features, dtype=float))
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size != phi.shape[1]:
        raise ValueError("eigenvalues must match the feature dimension")
    solver = GramSolver(phi @ phi.T, gamma, interpolator)
    S = solver.solve(phi)
    return float(sigma_eps ** 2 * np.sum(lam * np.sum(S * S, axis=0)))


# -- closed-form risk bounds ---------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """Variance/bias upper bounds with every ingredient echoed."""

    k: int
    n: int
    rho: float
    v_bound: float
    b_bound: float
    sigma_eps: float
    gamma: float
    delta: float
    alpha_k: float
    beta_k: float
    r_k_squared: float          # effective rank of the squared tail spectrum
    R_k: float
    tail_trace: float
    head_norm_sq: float         # target head norm, inverse-eigenvalue weighted
    tail_norm_sq: float         # target tail norm, eigenvalue weighted
    status: str                 # "ok", or "advisory" if the k log k precondition fails
    constants: BoundConstants = field(default_factory=BoundConstants)


def target_degree_norms(profile: SpectralProfile, target: TargetSpec, k: int
                        ) -> tuple[float, float]:
    """(head, tail) norms of an anchored target split at the boundary k.

    The degree-l component of the target carries squared L2 mass c_l^2
    spread uniformly over the degree-l eigenspace, so the inverse-weighted
    head norm is sum_{l <= split} c_l^2 / sigma_l^2 with
    sigma_l = sigma_hat_l / N(d, l), and the weighted tail norm is simply
    sum_{l > split} c_l^2.
    """
    l_split = profile.degree_at_boundary(k)
    masses = {l: (s, mult) for l, s, mult in profile.degrees}
    head = 0.0
    tail = 0.0
    for l, c in target.coeffs:
        if c == 0.0:
            continue
        if l <= l_split:
            if l not in masses or masses[l][0] <= 0.0:
                raise ValueError(f"target has mass at degree {l} where the kernel has none")
            s, mult = masses[l]
            sigma_l = s / mult
            head += c * c / sigma_l ** 2
        else:
            tail += c * c
    return head, tail


def theta_norms(eigenvalues, theta, k: int) -> tuple[float, float]:
    """(head, tail) norms for an explicit coefficient vector."""
    lam = np.asarray(eigenvalues, dtype=float)
    theta = np.asarray(theta, dtype=float)
    head = float(np.sum(theta[:k] ** 2 / lam[:k])) if k > 0 else 0.0
    tail = float(np.sum(theta[k:] ** 2 * lam[k:]))
    return head, tail


def risk_bounds(profile: SpectralProfile, n: int, k: int, gamma: float, rho: float,
                sigma_eps: float, delta: float = 0.1,
                alpha_k: float = 1.0, beta_k: float = 1.0,
                target: TargetSpec | None = None, theta=None,
                constants: BoundConstants = BoundConstants()) -> BoundReport:
    """Closed-form variance and bias bounds at cutoff k.

    V <= C1 rho^2 sigma^2 (k/n + min(r_k(squared tail)/n, n/(alpha^2 R_k)))
    B <= C2 rho^3 (tail_norm/delta
                   + head_norm (gamma + beta tr(tail)/n)^2)

    With alpha_k = 0 the min degrades to its first argument.  If the
    precondition C beta_k k log k <= n fails the report is still produced,
    flagged as advisory.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    tail_trace = profile.tail_trace(k)
    if k < profile.size and tail_trace > 0.0:
        ranks = effective_ranks(profile, k)
        r_k_sq = ranks.tail_trace_sq / profile.tail_sup(k) ** 2
        R_k = ranks.R_k
    else:           # finite-rank spectrum fully inside the head
        tail_trace, r_k_sq, R_k = 0.0, 0.0, float("inf")
    if alpha_k > 0.0:
        min_term = min(r_k_sq / n, n / (alpha_k ** 2 * R_k))
    else:
        min_term = r_k_sq / n
    v_bound = constants.C1 * rho ** 2 * sigma_eps ** 2 * (k / n + min_term)

    if target is not None:
        head, tail = target_degree_norms(profile, target, k)
    elif theta is not None:
        head, tail = theta_norms(profile.flatten(len(np.atleast_1d(theta))), theta, k)
    else:
        head, tail = 0.0, 0.0
    ridge_like = gamma + beta_k * tail_trace / n
    b_bound = constants.C2 * rho ** 3 * (tail / delta + head * ridge_like ** 2)

    log_k = math.log(k) if k > 1 else 0.0
    status = "ok" if constants.C * beta_k * k * log_k <= n else "advisory"
    return BoundReport(k=k, n=n, rho=rho, v_bound=v_bound, b_bound=b_bound,
                       sigma_eps=sigma_eps, gamma=gamma, delta=delta,
                       alpha_k=alpha_k, beta_k=beta_k, r_k_squared=r_k_sq,
                       R_k=R_k, tail_trace=tail_trace,
                       head_norm_sq=head, tail_norm_sq=tail, status=status,
                       constants=constants)


# -- regime rate table ----------------------------------------------------------

REGIMES = ("high_dim", "fixed_dim_interp", "fixed_dim_reg", "time_mapped")


@dataclass(frozen=True)
class RatePrediction:
    """Predicted decay/growth exponents for a limiting regime.

    Exponents are exact rationals.  ``variance_exponents`` lists the decay
    exponents of the variance on the regime's axis (dimension d for
    high_dim, sample count n otherwise); for fixed_dim_interp the single
    entry is a growth exponent, flagged by ``variance_grows``.
    """

    regime: str
    params: dict
    variance_exponents: tuple[Fraction, ...]
    bias_exponent: Fraction
    axis: str
    variance_grows: bool = False
    log_factors: bool = False


def _frac(name, value) -> Fraction:
    if isinstance(value, float) and not value.is_integer():
        # exact binary value of the float; pass a string or Fraction for
        # non-dyadic rationals like 1/15
        return Fraction(value).limit_denominator(10**12)
    try:
        return Fraction(value)
    except (TypeError, ValueError) as err:
        raise ValueError(f"parameter {name} is not a rational number: {value!r}") from err


def rate_predictions(regime: str, **params) -> RatePrediction:
    """Exponent table for the four limiting regimes, in exact rationals.

    high_dim(tau):          n and d tied by n = d^tau, tau positive and not
                            an integer; variance decays in d with exponents
                            (tau - floor(tau), floor(tau) + 1 - tau) and the
                            bias term with 2(tau - floor(tau)).
    fixed_dim_interp(a, r): eigenvalue decay i^{-1-a}, target decay i^{-r},
                            no regularization; variance grows at most n^{2a},
                            bias decays n^{-min(2(r-a), 2-a)}; needs r > a.
    fixed_dim_reg(a, b, r): ridge gamma_n = n^{-1-b} with b in (-1, a);
                            variance decays n^{-(a-b)/(1+a)}, bias
                            n^{-(1+b) min((2r+a)/(1+a), 2)}.
    time_mapped(a, r, s):   gradient-flow time t = n^s, s in (0, 1+a),
                            mapped through gamma = 1/t; variance decays
                            n^{-(1-s/(1+a))}, bias n^{-s min((2r+a)/(1+a), 2)}.
    """
    if regime == "high_dim":
        tau = _frac("tau", params.pop("tau"))
        _reject_extras(params)
        if tau <= 0:
            raise ValueError("constraint violated: tau > 0")
        if tau.denominator == 1:
            raise ValueError("constraint violated: tau must not be an integer")
        frac_part = tau - math.floor(tau)
        return RatePrediction(regime=regime, params={"tau": tau},
                              variance_exponents=(frac_part, 1 - frac_part),
                              bias_exponent=2 * frac_part, axis="d")
    if regime == "fixed_dim_interp":
        a = _frac("a", params.pop("a"))
        r = _frac("r", params.pop("r"))
        _reject_extras(params)
        if a <= 0:
            raise ValueError("constraint violated: a > 0")
        if r <= a:
            raise ValueError("constraint violated: r > a")
        return RatePrediction(regime=regime, params={"a": a, "r": r},
                              variance_exponents=(2 * a,),
                              bias_exponent=min(2 * (r - a), 2 - a),
                              axis="n", variance_grows=True, log_factors=True)
    if regime == "fixed_dim_reg":
        a = _frac("a", params.pop("a"))
        b = _frac("b", params.pop("b"))
        r = _frac("r", params.pop("r"))
        _reject_extras(params)
        if a <= 0:
            raise ValueError("constraint violated: a > 0")
        if not -1 < b < a:
            raise ValueError("constraint violated: b in (-1, a)")
        if 2 * r + a <= 0:
            raise ValueError("constraint violated: 2r + a > 0 (square-summable target)")
        return RatePrediction(regime=regime, params={"a": a, "b": b, "r": r},
                              variance_exponents=((a - b) / (1 + a),),
                              bias_exponent=(1 + b) * min((2 * r + a) / (1 + a), Fraction(2)),
                              axis="n", log_factors=(r == 1 + a / 2))
    if regime == "time_mapped":
        a = _frac("a", params.pop("a"))
        r = _frac("r", params.pop("r"))
        s = _frac("s", params.pop("s"))
        _reject_extras(params)
        if a <= 0:
            raise ValueError("constraint violated: a > 0")
        if not 0 < s < 1 + a:
            raise ValueError("constraint violated: s in (0, 1 + a)")
        return RatePrediction(regime=regime, params={"a": a, "r": r, "s": s},
                              variance_exponents=(1 - s / (1 + a),),
                              bias_exponent=s * min((2 * r + a) / (1 + a), Fraction(2)),
                              axis="n")
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def _reject_extras(params):
    if params:
        raise ValueError(f"unexpected parameters: {sorted(params)}")
