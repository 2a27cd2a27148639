"""Mercer spectra, effective ranks, feature-regularity diagnostics.

A spectral profile stores kernel eigenvalues either explicitly (a
truncated nonincreasing list, optionally with analytic mass beyond the
truncation) or per harmonic degree as (l, sigma_hat_l, N(d, l)) triples,
where sigma_hat_l is the total eigenvalue mass of degree l and each of the
N(d, l) eigenfunctions carries sigma_hat_l / N(d, l).

The per-degree spectra of dot-product kernels are computed by Gauss-Jacobi
quadrature against the weight (1 - u^2)^{(d-3)/2}, normalized to a
probability density so that the degree masses sum to h(1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, special

from .kernels import KernelSpec, eval_dot_kernel
from .sphere import gegenbauer_series, harmonic_dim

log = logging.getLogger(__name__)

TRACE_SLACK = 1e-6          # quadrature degeneracy guard on sum(sigma_hat) vs h(1)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Ordered kernel eigenvalues, explicit or per harmonic degree."""

    eigenvalues: np.ndarray | None = None
    degrees: tuple[tuple[int, float, int], ...] | None = None   # (l, sigma_hat, mult)
    d: int | None = None
    tail_remainder: float = 0.0     # per-degree: kernel mass beyond the last degree
    beyond_trace: float = 0.0       # explicit: analytic tail mass past the truncation
    beyond_trace_sq: float = 0.0

    def __post_init__(self):
        if (self.eigenvalues is None) == (self.degrees is None):
            raise ValueError("exactly one of eigenvalues / degrees must be given")
        if self.eigenvalues is not None:
            lam = np.asarray(self.eigenvalues, dtype=float)
            if lam.ndim != 1 or lam.size == 0:
                raise ValueError("explicit profile needs a nonempty 1-d eigenvalue array")
            if np.any(lam < 0):
                raise ValueError("eigenvalues must be nonnegative")
            if np.any(np.diff(lam) > 0):
                raise ValueError("explicit eigenvalues must be nonincreasing")
            object.__setattr__(self, "eigenvalues", lam)
        else:
            if self.d is None:
                raise ValueError("per-degree profile needs the ambient dimension d")

    # -- constructors ------------------------------------------------------

    @classmethod
    def explicit(cls, eigenvalues, beyond_trace=0.0, beyond_trace_sq=0.0):
        return cls(eigenvalues=np.sort(np.asarray(eigenvalues, dtype=float))[::-1],
                   beyond_trace=float(beyond_trace),
                   beyond_trace_sq=float(beyond_trace_sq))

    @classmethod
    def per_degree(cls, d, sigma_hats, tail_remainder=0.0):
        """Build from degree masses; sigma_hats is a sequence indexed by degree."""
        total = float(np.sum(np.abs(sigma_hats))) + abs(tail_remainder)
        rows = []
        for l, s in enumerate(sigma_hats):
            s = float(s)
            if s < 0.0:
                if s < -TRACE_SLACK * max(total, 1.0):
                    raise ValueError(f"degree {l} mass {s} is negative beyond quadrature noise")
                log.warning("clamping negative degree-%d mass %.3g to 0", l, s)
                s = 0.0
            rows.append((l, s, harmonic_dim(d, l)))
        return cls(degrees=tuple(rows), d=d, tail_remainder=float(max(tail_remainder, 0.0)))

    # -- block view: distinct values with multiplicities, value-descending ---
    # per-degree profiles are never materialized eigenvalue by eigenvalue;
    # multiplicities like N(32, 12) would not fit in memory

    @cached_property
    def _blocks(self):
        if self.eigenvalues is not None:
            vals = self.eigenvalues
            counts = np.ones(vals.size, dtype=np.int64)
        else:
            pairs = sorted(((s / mult, mult) for _, s, mult in self.degrees if s > 0.0),
                           reverse=True)
            if not pairs:
                pairs = [(0.0, 1)]
            vals = np.array([v for v, _ in pairs])
            counts = np.array([c for _, c in pairs], dtype=np.int64)
        cum_counts = np.cumsum(counts)
        # reversed cumulative sums avoid total-minus-head cancellation,
        # which matters for the tails of fast decays
        rev_trace = np.cumsum((vals * counts)[::-1])[::-1]
        rev_trace_sq = np.cumsum((vals * vals * counts)[::-1])[::-1]
        return vals, counts, cum_counts, rev_trace, rev_trace_sq

    def flatten(self, count: int | None = None) -> np.ndarray:
        """Leading eigenvalues as an explicit nonincreasing array."""
        vals, counts, cum_counts, _, _ = self._blocks
        total = int(cum_counts[-1])
        count = total if count is None else count
        if count > total:
            raise ValueError(f"only {total} eigenvalues available, asked for {count}")
        if count > 20_000_000:
            raise ValueError(f"refusing to materialize {count} eigenvalues; "
                             "use the tail summaries instead")
        idx = int(np.searchsorted(cum_counts, count, side="left"))
        before = int(cum_counts[idx - 1]) if idx > 0 else 0
        head = np.repeat(vals[:idx], counts[:idx])
        if count == before:
            return head
        return np.concatenate([head, np.full(count - before, vals[idx])])

    @property
    def size(self) -> int:
        return int(self._blocks[2][-1])

    def eigenvalue(self, k: int) -> float:
        """k-th largest eigenvalue (1-based)."""
        vals, _, cum_counts, _, _ = self._blocks
        if not 1 <= k <= cum_counts[-1]:
            raise ValueError(f"need 1 <= k <= {cum_counts[-1]}")
        return float(vals[np.searchsorted(cum_counts, k, side="left")])

    # -- tail summaries ------------------------------------------------------

    def _tail_sums(self, k: int) -> tuple[float, float]:
        """(trace, squared trace) of the eigenvalues strictly after index k."""
        vals, _, cum_counts, rev_trace, rev_trace_sq = self._blocks
        if k <= 0:
            return float(rev_trace[0]), float(rev_trace_sq[0])
        if k >= cum_counts[-1]:
            return 0.0, 0.0
        idx = int(np.searchsorted(cum_counts, k, side="left"))
        remaining = int(cum_counts[idx]) - k       # entries of block idx past k
        tr = (rev_trace[idx + 1] if idx + 1 < vals.size else 0.0) + remaining * vals[idx]
        sq = (rev_trace_sq[idx + 1] if idx + 1 < vals.size else 0.0) \
            + remaining * vals[idx] ** 2
        return float(tr), float(sq)

    def trace(self) -> float:
        return float(self._blocks[3][0]) + self.tail_remainder + self.beyond_trace

    def tail_trace(self, k: int) -> float:
        """Eigenvalue mass strictly after index k (0 <= k <= size)."""
        tr, _ = self._tail_sums(k)
        return tr + self.tail_remainder + self.beyond_trace

    def tail_trace_sq(self, k: int) -> float:
        # mass beyond the stored range is spread over huge multiplicities;
        # its squared contribution is negligible except via beyond_trace_sq
        _, sq = self._tail_sums(k)
        return sq + self.beyond_trace_sq

    def tail_sup(self, k: int) -> float:
        """Largest eigenvalue of the tail after index k, i.e. lambda_{k+1}."""
        if k >= self.size:
            raise ValueError(f"tail after k={k} is empty (profile holds {self.size})")
        return self.eigenvalue(k + 1)

    # -- degree bookkeeping ---------------------------------------------------

    def degree_boundaries(self) -> list[tuple[int, int]]:
        """(degree l, cumulative index N(d, <=l)) for degrees with mass > 0."""
        if self.degrees is None:
            raise ValueError("degree boundaries only exist for per-degree profiles")
        out, k = [], 0
        for l, s, mult in self.degrees:
            if s > 0.0:
                k += mult
                out.append((l, k))
        return out

    def boundary_index(self, l: int) -> int:
        for degree, k in self.degree_boundaries():
            if degree == l:
                return k
        raise ValueError(f"degree {l} has no mass in this profile")

    def degree_at_boundary(self, k: int) -> int:
        for degree, boundary in self.degree_boundaries():
            if boundary == k:
                return degree
        raise ValueError(f"k={k} is not a degree boundary "
                         f"(boundaries: {[b for _, b in self.degree_boundaries()]})")

    def degree_mass(self, l: int) -> float:
        for degree, s, _ in self.degrees or ():
            if degree == l:
                return s
        return 0.0

    def csv_rows(self):
        if self.degrees is not None:
            header = ("degree", "sigma_hat", "multiplicity")
            rows = [(l, s, mult) for l, s, mult in self.degrees]
        else:
            header = ("index", "lambda")
            rows = list(enumerate(self.eigenvalues, start=1))
        return header, rows


@dataclass(frozen=True)
class RankReport:
    """Tail effective ranks after cutoff k."""

    k: int
    r_k: float                # tr / sup of the tail
    R_k: float                # tr^2 / tr of the squared tail
    tail_trace: float
    tail_trace_sq: float
    tail_norm: float


def effective_ranks(profile: SpectralProfile, k: int) -> RankReport:
    """Effective ranks r_k = tr(tail)/||tail|| and R_k = tr(tail)^2/tr(tail^2)."""
    if k < 0:
        raise ValueError("need k >= 0")
    sup = profile.tail_sup(k)
    if sup <= 0.0:
        raise ValueError(f"tail after k={k} has no mass")
    tr = profile.tail_trace(k)
    tr_sq = profile.tail_trace_sq(k)
    return RankReport(k=k, r_k=tr / sup, R_k=tr * tr / tr_sq,
                      tail_trace=tr, tail_trace_sq=tr_sq, tail_norm=sup)


# -- quadrature spectra of dot-product kernels -------------------------------

def mercer_spectrum(spec: KernelSpec, d: int, l_max: int,
                    quad_nodes: int | None = None) -> SpectralProfile:
    """Per-degree spectrum of a dot-product kernel on S^{d-1}.

    sigma_hat_l = N(d, l) * E[h(u) P_l^d(u)] under the density proportional
    to (1 - u^2)^{(d-3)/2} on [-1, 1].  Polynomial-type profiles use a fixed
    Gauss-Jacobi rule; for the arccos families the node count is doubled
    until every degree mass moves by less than 1e-8.
    """
    if not spec.is_dot_product:
        raise ValueError("mercer spectra are computed for dot-product kernels only")
    if d < 3:
        raise ValueError("need d >= 3")
    nodes = quad_nodes if quad_nodes is not None else 2 * l_max + 32
    if nodes < 2 * l_max + 32:
        raise ValueError("need quad_nodes >= 2 * l_max + 32")

    def masses(num_nodes):
        x, w = special.roots_jacobi(num_nodes, (d - 3) / 2.0, (d - 3) / 2.0)
        w = w / np.sum(w)
        P = gegenbauer_series(d, l_max, x)
        h = eval_dot_kernel(spec, x)
        mults = np.array([harmonic_dim(d, l) for l in range(l_max + 1)], dtype=float)
        return mults * (P @ (w * h))

    sig = masses(nodes)
    if spec.family in ("gpk", "ntk"):
        for _ in range(8):
            refined = masses(2 * nodes)
            if np.max(np.abs(refined - sig)) < 1e-8:
                sig = refined
                break
            nodes *= 2
            sig = refined
        else:
            raise ArithmeticError("degree masses did not converge under node doubling")

    h1 = eval_dot_kernel(spec, 1.0)
    total = float(np.sum(sig))
    if total > h1 * (1.0 + TRACE_SLACK):
        raise ArithmeticError(
            f"quadrature degeneracy: degree masses sum to {total} > h(1) = {h1}")
    remainder = max(h1 - total, 0.0)
    return SpectralProfile.per_degree(d, sig, tail_remainder=remainder)


# -- parametric decay profiles ------------------------------------------------

def decay_profile(family: str, a: float, p_max: int, scale: float = 1.0) -> SpectralProfile:
    """Truncated profile for a parametric eigenvalue decay, with analytic tail.

    family: "polynomial" (lambda_i = i^{-1-a}), "log_polynomial"
    (lambda_i = 1/(i log^{1+a} i), first entry pinned to the i=2 value so
    the list stays finite and nonincreasing), or "exponential"
    (lambda_i = exp(-a i)).  Mass past p_max enters trace and squared-trace
    tails analytically, so effective ranks of slow decays are not
    truncation-limited.
    """
    if a <= 0:
        raise ValueError("need decay parameter a > 0")
    if p_max < 2:
        raise ValueError("need p_max >= 2")
    i = np.arange(1, p_max + 1, dtype=float)
    if family == "polynomial":
        lam = i ** (-1.0 - a)
        beyond = float(special.zeta(1.0 + a, p_max + 1))            # exact Hurwitz tail
        beyond_sq = float(special.zeta(2.0 + 2.0 * a, p_max + 1))
    elif family == "log_polynomial":
        lam = 1.0 / (i * np.log(np.maximum(i, 2.0)) ** (1.0 + a))
        # midpoint integral tail: int_P dx / (x log^{1+a} x) = 1 / (a log^a P)
        beyond = 1.0 / (a * math.log(p_max + 0.5) ** a)
        # squared tail via t = 1/x, finite interval so quad converges
        beyond_sq = integrate.quad(lambda t: 1.0 / (-math.log(t)) ** (2.0 + 2.0 * a),
                                   0.0, 1.0 / (p_max + 0.5))[0]
    elif family == "exponential":
        lam = np.exp(-a * i)
        beyond = math.exp(-a * (p_max + 1)) / (1.0 - math.exp(-a))  # exact geometric tail
        beyond_sq = math.exp(-2.0 * a * (p_max + 1)) / (1.0 - math.exp(-2.0 * a))
    else:
        raise ValueError(f"unknown decay family {family!r}")
    return SpectralProfile.explicit(scale * lam,
                                    beyond_trace=scale * beyond,
                                    beyond_trace_sq=scale * scale * beyond_sq)


def lemma_rank_bracket(family: str, a: float, k: int,
                       c_lower: float = 1.0, c_upper: float = 1.0) -> tuple[float, float]:
    """Closed-form bracket [lo, hi] containing r_k for the decay families.

    For eigenvalues pinched between c_lower and c_upper times the family
    shape: log_polynomial gives (k+1)log(k+1)/a, polynomial gives (k+1)/a,
    exponential gives 1/a, each bracketed by the constant ratio on the left
    and 1 + the inverse ratio on the right.
    """
    ratio = c_lower / c_upper
    if family == "log_polynomial":
        base = (k + 1) * math.log(k + 1) / a
    elif family == "polynomial":
        base = (k + 1) / a
    elif family == "exponential":
        base = 1.0 / a
    else:
        raise ValueError(f"unknown decay family {family!r}")
    return ratio * base, 1.0 + base / ratio


# -- feature regularity (alpha/beta) ------------------------------------------

def alpha_beta(k: int, profile: SpectralProfile, features: np.ndarray | None = None
               ) -> tuple[float, float]:
    """Empirical regularity ratios (alpha_hat_k, beta_hat_k).

    For a per-degree profile with k at a degree boundary the feature-norm
    ratios are identically 1 on the sphere (the harmonic addition theorem
    makes the relevant sums constant), so (1.0, 1.0) is returned exactly.

    Otherwise ``features`` must hold rows phi(x_i) for a sample, scaled so
    that column j has second moment profile.flatten()[j]; the three
    norm-to-expectation ratios are evaluated per row, alpha_hat is the
    sample minimum of the tail-mass ratio and beta_hat the sample maximum
    over all three.
    """
    if profile.degrees is not None:
        boundaries = {b for _, b in profile.degree_boundaries()}
        if k in boundaries:
            return 1.0, 1.0
        if features is None:
            raise ValueError(
                f"k={k} is not a degree boundary and no feature sample was given; "
                "closed-form ratios only exist at boundaries")
        log.warning("k=%d is not a degree boundary; falling back to sampled ratios", k)
    if features is None:
        raise ValueError("explicit profiles need a feature sample")
    phi = np.atleast_2d(np.asarray(features, dtype=float))
    p = phi.shape[1]
    if not 0 <= k < p:
        raise ValueError(f"need 0 <= k < {p}")
    lam = profile.flatten(p)
    tail_tr = float(np.sum(lam[k:]))
    tail_tr_sq = float(np.sum(lam[k:] ** 2))
    tail_ratio = np.sum(phi[:, k:] ** 2, axis=1) / tail_tr
    weighted_ratio = np.sum(lam[k:] * phi[:, k:] ** 2, axis=1) / tail_tr_sq
    beta = max(float(tail_ratio.max()), float(weighted_ratio.max()))
    if k > 0:
        head_ratio = np.sum(phi[:, :k] ** 2 / lam[:k], axis=1) / k
        beta = max(beta, float(head_ratio.max()))
    return float(tail_ratio.min()), beta


def gaussian_features(eigenvalues, n: int, seed) -> np.ndarray:
    """Sample rows phi(x_i) = sqrt(lambda) * z_i with z_i standard normal.

    The surrogate feature map whose population covariance is exactly
    diag(eigenvalues); Gram matrices are phi @ phi.T.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, lam.size)) * np.sqrt(lam)


# -- Hermite eigenfunctions of the 1-d Gaussian-input RBF kernel ---------------

def hermite_features(x, count: int) -> np.ndarray:
    """First ``count`` orthonormal Hermite eigenfunctions at points x.

    psi_0(x) = 2^{1/4} exp(-x^2/4), psi_{i+1} = x sqrt(2/(i+1)) psi_i
    - sqrt(i/(i+1)) psi_{i-1}; the normalized values are carried directly,
    so no factorials or raw Hermite polynomials ever appear.  Returns shape
    (len(x), count); orthonormal under the standard normal input measure.
    """
    if count < 1:
        raise ValueError("need count >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((count, x.size))
    out[0] = 2.0 ** 0.25 * np.exp(-x * x / 4.0)
    if count > 1:
        out[1] = x * math.sqrt(2.0) * out[0]
    for i in range(1, count - 1):
        out[i + 1] = x * math.sqrt(2.0 / (i + 1)) * out[i] \
            - math.sqrt(i / (i + 1.0)) * out[i - 1]
    if np.any(np.abs(out) > 1e300):
        raise OverflowError("hermite recurrence overflowed; inputs far outside "
                            "the oscillatory range")
    return out.T


def hermite_feature(i: int, x):
    """Single orthonormal Hermite eigenfunction psi_i at points x."""
    if i < 0:
        raise ValueError("need i >= 0")
    scalar = np.isscalar(x) or np.ndim(x) == 0
    vals = hermite_features(np.atleast_1d(x), i + 1)[:, i]
    return float(vals[0]) if scalar else vals


def hermite_moment(i: int, p: float, mc_samples: int, seed) -> tuple[float, float]:
    """Monte Carlo estimate of (E|psi_i(x)|^p)^{1/p} under x ~ N(0, 1).

    Returns (estimate, standard error); the error is mapped through the
    p-th root by the delta method.
    """
    if p <= 0:
        raise ValueError("need moment order p > 0")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(mc_samples)
    vals = np.abs(hermite_feature(i, x)) ** p
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(mc_samples))
    est = mean ** (1.0 / p)
    if mean <= 0.0:
        return est, 0.0
    return est, se * est / (p * mean)


def rbf_hermite_eigenvalues(count: int) -> np.ndarray:
    """Eigenvalues (2/3) * 3^{-i} pairing with the Hermite eigenfunctions.

    Closed-form Mercer eigenvalues of exp(-3/8 (x - y)^2) under standard
    normal inputs; they sum to 1 = K(x, x).
    """
    if count < 1:
        raise ValueError("need count >= 1")
    return (2.0 / 3.0) * (1.0 / 3.0) ** np.arange(count)


def rbf_hermite_profile(count: int) -> SpectralProfile:
    eig = rbf_hermite_eigenvalues(count)
    beyond = (2.0 / 3.0) * (1.0 / 3.0) ** count * 1.5
    beyond_sq = (4.0 / 9.0) * (1.0 / 9.0) ** count * (9.0 / 8.0)
    return SpectralProfile.explicit(eig, beyond_trace=beyond, beyond_trace_sq=beyond_sq)
