"""Sampling on the sphere, harmonic combinatorics, and synthetic targets.

Degree-l harmonic structure on S^{d-1} enters through two quantities: the
dimension N(d, l) of the degree-l eigenspace and the normalized Gegenbauer
polynomial P_l^d with P_l^d(1) = 1.  Target functions are built from a
single anchor point, which places a chosen amount of squared L2 mass at
each degree without ever materializing a harmonic basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_INT63 = 2**63 - 1


def sample_sphere(n: int, d: int, seed) -> np.ndarray:
    """Draw n i.i.d. points uniformly on S^{d-1}.

    Gaussian vectors normalized to unit length; deterministic given the
    seed.  Requires d >= 3 (the per-degree machinery assumes it).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if d < 3:
        raise ValueError("need d >= 3 for spherical-harmonic structure")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return X / norms


def sample_disk(n: int, seed) -> np.ndarray:
    """Draw n points uniformly on the unit disk in R^2 (radius sqrt(U))."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(size=n))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def harmonic_dim(d: int, l: int) -> int:
    """Number N(d, l) of degree-l spherical harmonics on S^{d-1}.

    N(d, 0) = 1 and otherwise ((2l + d - 2) / l) * binom(l + d - 3, d - 2),
    evaluated in exact integer arithmetic.  Raises OverflowError past the
    64-bit range, where downstream index bookkeeping would silently break.
    """
    if d < 3:
        raise ValueError("need d >= 3")
    if l < 0:
        raise ValueError("need l >= 0")
    if l == 0:
        out = 1
    else:
        out = (2 * l + d - 2) * math.comb(l + d - 3, d - 2) // l
    if out > _INT63:
        raise OverflowError(f"N({d},{l}) = {out} exceeds the 64-bit integer range")
    return out


def harmonic_dim_cumulative(d: int, l: int) -> int:
    """N(d, <=l), the number of harmonics of degree at most l."""
    return sum(harmonic_dim(d, j) for j in range(l + 1))


def gegenbauer_series(d: int, l_max: int, u) -> np.ndarray:
    """All normalized Gegenbauer values P_0..P_{l_max} at u, stacked.

    Three-term recurrence with P_0 = 1, P_1 = u,
    P_l = ((2l + d - 4) u P_{l-1} - (l - 1) P_{l-2}) / (l + d - 3),
    which keeps P_l(1) = 1 exact.
    """
    if d < 3:
        raise ValueError("need d >= 3")
    u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
    P = np.zeros((l_max + 1,) + u.shape)
    P[0] = 1.0
    if l_max >= 1:
        P[1] = u
    for l in range(2, l_max + 1):
        P[l] = ((2 * l + d - 4) * u * P[l - 1] - (l - 1) * P[l - 2]) / (l + d - 3)
    return P


def gegenbauer(d: int, l: int, u):
    """Normalized Gegenbauer polynomial P_l^d(u) with P_l^d(1) = 1."""
    scalar = np.isscalar(u) or np.ndim(u) == 0
    out = gegenbauer_series(d, l, u)[l]
    return float(out) if scalar else out


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """Target function with prescribed harmonic mass per degree.

    f*(x) = sum_l c_l sqrt(N(d, l)) P_l^d(<anchor, x>), which carries
    squared L2 norm exactly sum_l c_l^2, with the degree-l component
    owning c_l^2 of it.
    """

    coeffs: tuple[tuple[int, float], ...]
    anchor: np.ndarray

    def __post_init__(self):
        anchor = np.asarray(self.anchor, dtype=float)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "coeffs",
                           tuple((int(l), float(c)) for l, c in self.coeffs))
        if anchor.ndim != 1 or anchor.size < 3:
            raise ValueError("anchor must be a d-vector with d >= 3")
        if abs(np.linalg.norm(anchor) - 1.0) > 1e-8:
            raise ValueError("anchor must have unit norm")
        degrees = [l for l, _ in self.coeffs]
        if len(set(degrees)) != len(degrees):
            raise ValueError("duplicate degree in target coefficients")
        if any(l < 0 for l in degrees):
            raise ValueError("degrees must be nonnegative")

    @property
    def d(self) -> int:
        return self.anchor.size

    def degree_masses(self) -> dict[int, float]:
        """Squared L2 mass per degree: {l: c_l^2}."""
        return {l: c * c for l, c in self.coeffs}

    def l2_norm_sq(self) -> float:
        return float(sum(c * c for _, c in self.coeffs))

    @classmethod
    def from_config(cls, block: dict, d: int) -> "TargetSpec":
        anchor_seed = block.get("anchor_seed", 0)
        anchor = sample_sphere(1, d, anchor_seed)[0]
        coeffs = tuple((int(l), float(c)) for l, c in block["coeffs"])
        return cls(coeffs=coeffs, anchor=anchor)

    def to_config(self) -> dict:
        return {"coeffs": [[l, c] for l, c in self.coeffs]}


def synthesize_target(target: TargetSpec):
    """Evaluator for f*; accepts a single d-vector or an (m, d) array."""
    d = target.d
    if not target.coeffs:
        return lambda X: np.zeros(np.atleast_2d(X).shape[0])
    l_max = max(l for l, _ in target.coeffs)
    weights = np.zeros(l_max + 1)
    for l, c in target.coeffs:
        weights[l] = c * math.sqrt(harmonic_dim(d, l))

    def evaluate(X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        u = np.clip(np.atleast_2d(X) @ target.anchor, -1.0, 1.0)
        P = gegenbauer_series(d, l_max, u)
        vals = np.tensordot(weights, P, axes=(0, 0))
        return float(vals[0]) if single else vals

    return evaluate
