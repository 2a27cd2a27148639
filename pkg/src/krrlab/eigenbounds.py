"""Empirical kernel-matrix spectra, eigenvalue envelopes, concentration.

The kernel matrix splits as K = K_low + K_high, where K_low carries the
harmonic degrees up to a boundary and K_high the rest.  On the sphere the
split is exact: the addition theorem turns the low part into a Gegenbauer
series in the pairwise inner products.  The envelope machinery brackets
the eigenvalues of K/n between

    upper_k = c2 * beta_k * ((1 + k log k / n) lambda_k
                             + log(k+1) tr(tail_k) / n)
    lower_k = c1 * I_{k,n} lambda_k
              + alpha_k * (1 - sqrt(n^2 / R_{k'}) / delta) tr(tail_{k'}) / n

with I_{k,n} = [C beta_k k log k <= n].  The absolute constants are not
pinned by the theory; they default to 1 and are echoed in every report so
the envelopes stay falsifiable in shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, gram
from .spectrum import SpectralProfile, effective_ranks
from .sphere import gegenbauer_series

NEGATIVE_CLAMP = 1e-10      # relative round-off clamp for eigenvalues
LOWER_VACUOUS = float("-inf")


@dataclass(frozen=True)
class BoundConstants:
    """Absolute constants left free by the theory; all default to 1."""

    c1: float = 1.0     # lower envelope head
    c2: float = 1.0     # upper envelope
    C: float = 1.0      # indicator threshold C * beta_k * k * log k <= n
    C1: float = 1.0     # variance bound
    C2: float = 1.0     # bias bound

    @classmethod
    def from_string(cls, text: str) -> "BoundConstants":
        vals = [float(v) for v in text.split(",")]
        if len(vals) != 5:
            raise ValueError("constants must be 'c1,c2,C,C1,C2'")
        return cls(*vals)

    def as_tuple(self):
        return (self.c1, self.c2, self.C, self.C1, self.C2)


def empirical_spectrum(G: np.ndarray, n: int | None = None) -> np.ndarray:
    """Eigenvalues of G/n, nonincreasing, with round-off negatives clamped.

    G must be exactly symmetric (as produced by mirrored assembly).
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("G must be square")
    if not np.array_equal(G, G.T):
        raise ValueError("G is not exactly symmetric")
    n = n if n is not None else G.shape[0]
    try:
        mu = np.linalg.eigvalsh(G / n)
    except np.linalg.LinAlgError as err:
        cond = float(np.linalg.norm(G, 2) / max(np.abs(np.diag(G)).min(), 1e-300))
        raise ArithmeticError(
            f"eigensolve did not converge (condition estimate {cond:.3g})") from err
    mu = mu[::-1]
    top = mu[0] if mu[0] > 0 else 1.0
    mu[(mu < 0) & (mu >= -NEGATIVE_CLAMP * top)] = 0.0
    return mu


def split_gram(spec: KernelSpec, X, profile: SpectralProfile, k: int
               ) -> tuple[np.ndarray, np.ndarray]:
    """Split K(X, X) = K_low + K_high at the degree boundary k.

    K_low[i, j] = sum of degree masses up to the boundary times the
    matching Gegenbauer values of <x_i, x_j>; K_high is the remainder.
    Its diagonal is exactly h(1) minus the included mass.
    """
    if profile.degrees is None:
        raise ValueError("split_gram needs a per-degree profile; use "
                         "split_gram_projection for explicit profiles")
    l_split = profile.degree_at_boundary(k)      # raises for non-boundary k
    X = np.atleast_2d(np.asarray(X, dtype=float))
    G = gram(spec, X)
    U = np.clip(X @ X.T, -1.0, 1.0)
    P = gegenbauer_series(profile.d, l_split, U)
    included = 0.0
    G_low = np.zeros_like(G)
    for l, s, _ in profile.degrees:
        if l <= l_split and s > 0.0:
            G_low += s * P[l]
            included += s
    G_low = np.triu(G_low, 1) + np.triu(G_low, 1).T
    # on the sphere every diagonal entry of the low part is the included
    # mass itself; setting it exactly keeps the high diagonal at h(1) - mass
    np.fill_diagonal(G_low, included)
    return G_low, G - G_low


def split_gram_projection(G: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Rank-k spectral split of a Gram matrix (top-k eigenvector projection)."""
    G = np.asarray(G, dtype=float)
    w, V = np.linalg.eigh(G)
    top = V[:, -k:] if k > 0 else V[:, :0]
    G_low = (top * w[-k:]) @ top.T if k > 0 else np.zeros_like(G)
    G_low = np.triu(G_low, 1) + np.triu(G_low, 1).T + np.diag(np.diag(G_low))
    return G_low, G - G_low


def split_feature_gram(features: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact split for explicit feature maps: phi[:, :k] and phi[:, k:]."""
    phi = np.atleast_2d(np.asarray(features, dtype=float))
    return phi[:, :k] @ phi[:, :k].T, phi[:, k:] @ phi[:, k:].T


@dataclass(frozen=True)
class Envelope:
    """Upper/lower eigenvalue envelope for mu_k(K/n)."""

    k: int
    k_prime: int
    n: int
    upper: float
    lower: float
    indicator: int              # 1 iff C * beta_k * k * log(k) <= n
    gamma_tilde: float          # tr(tail after k') / n, the self-regularization level
    vacuous: bool               # lower bound degenerated to -inf
    delta: float
    alpha_k: float
    beta_k: float
    constants: BoundConstants = field(default_factory=BoundConstants)


def eigenvalue_envelopes(profile: SpectralProfile, n: int, k: int,
                         k_prime: int | None = None, delta: float = 0.1,
                         alpha_k: float = 1.0, beta_k: float = 1.0,
                         constants: BoundConstants = BoundConstants()) -> Envelope:
    """Envelope pair for the k-th eigenvalue of K/n.

    k_prime defaults to k and may exceed n (tail summaries of a profile do
    not care about the sample size).  When the indicator is off and the
    k'-tail term is negative the lower bound carries no information; it is
    then reported as -inf with ``vacuous`` set instead of a misleading
    negative number.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    k_prime = k if k_prime is None else k_prime
    if k_prime < k:
        raise ValueError("need k <= k_prime")
    if k_prime > profile.size:
        raise ValueError(f"k_prime={k_prime} exceeds the stored spectrum "
                         f"({profile.size} eigenvalues); extend the profile")
    if not 0.0 < delta < 1.0:
        raise ValueError("need delta in (0, 1)")
    lam_k = profile.eigenvalue(k)
    log_k = math.log(k) if k > 1 else 0.0
    upper = constants.c2 * beta_k * ((1.0 + k * log_k / n) * lam_k
                                     + math.log(k + 1) * profile.tail_trace(k) / n)
    indicator = 1 if constants.C * beta_k * k * log_k <= n else 0
    tail_prime = profile.tail_trace(k_prime)
    gamma_tilde = tail_prime / n
    R_kp = effective_ranks(profile, k_prime).R_k if tail_prime > 0 else float("inf")
    markov = 1.0 - math.sqrt(n * n / R_kp) / delta
    tail_term = alpha_k * markov * gamma_tilde
    vacuous = False
    if indicator == 0 and tail_term < 0.0:
        lower = LOWER_VACUOUS
        vacuous = True
    else:
        lower = constants.c1 * indicator * lam_k + tail_term
    return Envelope(k=k, k_prime=k_prime, n=n, upper=upper, lower=lower,
                    indicator=indicator, gamma_tilde=gamma_tilde, vacuous=vacuous,
                    delta=delta, alpha_k=alpha_k, beta_k=beta_k, constants=constants)


@dataclass(frozen=True)
class ConcentrationReport:
    """Condition-number-like ratio of the regularized tail kernel matrix."""

    k: int
    n: int
    rho: float
    tail_sup: float             # largest tail eigenvalue of the population spectrum
    mu_top: float               # mu_1(K_high / n)
    mu_bottom: float            # mu_n(K_high / n)
    gamma: float


def concentration_from_parts(tail_sup: float, mu_top: float, mu_bottom: float,
                             gamma: float, k: int = 0, n: int = 0) -> ConcentrationReport:
    denom = mu_bottom + gamma
    rho = float("inf") if denom <= 0.0 else (tail_sup + mu_top + gamma) / denom
    return ConcentrationReport(k=k, n=n, rho=rho, tail_sup=tail_sup,
                               mu_top=mu_top, mu_bottom=mu_bottom, gamma=gamma)


def concentration(spec: KernelSpec, X, profile: SpectralProfile, k: int,
                  gamma: float = 0.0) -> ConcentrationReport:
    """Concentration coefficient at the degree boundary k.

    rho = (lambda_{k+1} + mu_1(K_high/n) + gamma) / (mu_n(K_high/n) + gamma);
    values near 1 mean the tail of the kernel acts like a ridge of level
    tr(tail)/n.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    _, G_high = split_gram(spec, X, profile, k)
    mu = empirical_spectrum(G_high, n)
    return concentration_from_parts(profile.tail_sup(k), float(mu[0]), float(mu[-1]),
                                    gamma, k=k, n=n)
