"""Kernel families and Gram-matrix assembly.

Supported families:

* ``rbf``                 -- exp(-bandwidth * ||x - x'||^2)
* ``laplace``             -- exp(-scale * ||x - x'||)
* ``polynomial``          -- (offset + inner_scale * <x, x'>)^degree
* ``dot_product_series``  -- sum_i a_i * <x, x'>^i with a_i >= 0
* ``gpk``                 -- infinite-width fully-connected ReLU network,
                             last-layer training limit, via the arccos map
* ``ntk``                 -- same network, all-layers training limit

The last four are dot-product kernels h(<x, x'>) defined on the unit
sphere; ``gpk`` and ``ntk`` extend to all of R^d through their
1-homogeneous (zonal) form, available with ``zonal=True``.  The network
kernels follow the bias-free fully-connected convention; variants with
bias terms have different low-degree masses and are not validated here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DOT_PRODUCT_FAMILIES = ("polynomial", "dot_product_series", "gpk", "ntk")
FAMILIES = ("rbf", "laplace") + DOT_PRODUCT_FAMILIES

# arguments within this distance of +-1 are snapped onto the boundary;
# arccos has infinite slope there and deep recursions compound the error
BOUNDARY_BAND = 1e-12
UNIT_NORM_TOL = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    """Immutable closed-form description of a kernel.

    Construct through the classmethods (``KernelSpec.ntk(3)`` etc.) rather
    than positionally; only the fields relevant to ``family`` are set.
    """

    family: str
    bandwidth: float | None = None      # rbf
    scale: float | None = None          # laplace
    degree: int | None = None           # polynomial
    inner_scale: float = 1.0            # polynomial
    offset: float = 0.0                 # polynomial
    coefficients: tuple[float, ...] | None = None   # dot_product_series
    depth: int | None = None            # gpk / ntk

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "rbf" and not (self.bandwidth and self.bandwidth > 0):
            raise ValueError("rbf kernel needs bandwidth > 0")
        if self.family == "laplace" and not (self.scale and self.scale > 0):
            raise ValueError("laplace kernel needs scale > 0")
        if self.family == "polynomial":
            if self.degree is None or self.degree < 0 or int(self.degree) != self.degree:
                raise ValueError("polynomial kernel needs integer degree >= 0")
            if self.inner_scale <= 0 or self.offset < 0:
                raise ValueError("polynomial kernel needs inner_scale > 0 and offset >= 0")
        if self.family == "dot_product_series":
            if not self.coefficients:
                raise ValueError("dot_product_series needs at least one coefficient")
            if any(c < 0 for c in self.coefficients):
                raise ValueError("dot_product_series coefficients must be nonnegative")
        if self.family in ("gpk", "ntk") and (self.depth is None or self.depth < 1):
            raise ValueError(f"{self.family} kernel needs depth >= 1")

    # -- constructors ------------------------------------------------------

    @classmethod
    def rbf(cls, bandwidth):
        return cls(family="rbf", bandwidth=float(bandwidth))

    @classmethod
    def laplace(cls, scale):
        return cls(family="laplace", scale=float(scale))

    @classmethod
    def polynomial(cls, degree, inner_scale=1.0, offset=0.0):
        return cls(family="polynomial", degree=int(degree),
                   inner_scale=float(inner_scale), offset=float(offset))

    @classmethod
    def dot_product_series(cls, coefficients):
        return cls(family="dot_product_series",
                   coefficients=tuple(float(c) for c in coefficients))

    @classmethod
    def gpk(cls, depth):
        return cls(family="gpk", depth=int(depth))

    @classmethod
    def ntk(cls, depth):
        return cls(family="ntk", depth=int(depth))

    # -- properties --------------------------------------------------------

    @property
    def is_dot_product(self) -> bool:
        return self.family in DOT_PRODUCT_FAMILIES

    def label(self) -> str:
        if self.family in ("gpk", "ntk"):
            return f"{self.family}{self.depth}"
        if self.family == "polynomial":
            return f"poly{self.degree}"
        return self.family

    # -- config serialization ----------------------------------------------

    def to_config(self) -> dict:
        out = {"family": self.family}
        if self.family == "rbf":
            out["bandwidth"] = self.bandwidth
        elif self.family == "laplace":
            out["scale"] = self.scale
        elif self.family == "polynomial":
            out.update(degree=self.degree, inner_scale=self.inner_scale,
                       offset=self.offset)
        elif self.family == "dot_product_series":
            out["coefficients"] = list(self.coefficients)
        else:
            out["depth"] = self.depth
        return out

    @classmethod
    def from_config(cls, block: dict) -> "KernelSpec":
        block = dict(block)
        family = block.pop("family", None)
        if family is None:
            raise ValueError("kernel block needs a 'family' key")
        if family == "rbf":
            return cls.rbf(block.pop("bandwidth"))
        if family == "laplace":
            return cls.laplace(block.pop("scale"))
        if family == "polynomial":
            return cls.polynomial(block.pop("degree"),
                                  block.pop("inner_scale", 1.0),
                                  block.pop("offset", 0.0))
        if family == "dot_product_series":
            return cls.dot_product_series(block.pop("coefficients"))
        if family in ("gpk", "ntk"):
            return cls(family=family, depth=int(block.pop("depth")))
        raise ValueError(f"unknown kernel family {family!r}")


# -- arccos maps of the infinite-width ReLU network ------------------------

def kappa0(u):
    """Zeroth arccos map: 1 - arccos(u)/pi, clamped onto [-1, 1]."""
    u = _clamp(u)
    return 1.0 - np.arccos(u) / np.pi


def kappa1(u):
    """First arccos map: (u*(pi - arccos u) + sqrt(1 - u^2)) / pi.

    Maps [-1, 1] into [0, 1] with kappa1(1) = 1; applied once per network
    layer, so boundary inputs are snapped before evaluation.
    """
    u = _clamp(u)
    return (u * (np.pi - np.arccos(u)) + np.sqrt(np.maximum(0.0, 1.0 - u * u))) / np.pi


def _clamp(u):
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0 + BOUNDARY_BAND):
        worst = float(np.max(np.abs(u)))
        raise ValueError(f"dot-product argument magnitude {worst} exceeds 1 + {BOUNDARY_BAND}")
    # snap the band onto the endpoints, then clip round-off
    u = np.where(u > 1.0 - BOUNDARY_BAND, 1.0, u)
    u = np.where(u < -1.0 + BOUNDARY_BAND, -1.0, u)
    return u


def eval_dot_kernel(spec: KernelSpec, u):
    """Evaluate the scalar profile h(u) of a dot-product kernel.

    ``u`` may be a scalar or array with entries in [-1, 1] (a 1e-12 band
    outside is clamped).  Raises for rbf/laplace, which are evaluated
    through :func:`eval_pair` on point pairs.
    """
    if not spec.is_dot_product:
        raise ValueError(f"{spec.family} is not a dot-product family; use eval_pair")
    scalar = np.isscalar(u) or np.ndim(u) == 0
    u = _clamp(u)
    if spec.family == "polynomial":
        out = (spec.offset + spec.inner_scale * u) ** spec.degree
    elif spec.family == "dot_product_series":
        out = np.polynomial.polynomial.polyval(u, np.asarray(spec.coefficients))
    elif spec.family == "gpk":
        out = u
        for _ in range(spec.depth):
            out = kappa1(out)
    else:  # ntk
        g = u
        out = np.array(u, copy=True)
        for _ in range(spec.depth):
            out = out * kappa0(g) + kappa1(g)
            g = kappa1(g)
    return float(out) if scalar else out


def _check_unit_rows(X, what):
    norms = np.linalg.norm(np.atleast_2d(X), axis=1)
    worst = int(np.argmax(np.abs(norms - 1.0)))
    off = abs(norms[worst] - 1.0)
    if off > UNIT_NORM_TOL:
        raise ValueError(
            f"{what} must lie on the unit sphere for dot-product kernels "
            f"(row {worst} has norm deviation {off:.3g}); pass zonal=True to "
            "use the 1-homogeneous extension")


def eval_pair(spec: KernelSpec, x, y, zonal: bool = False) -> float:
    """Kernel value K(x, y) for a single pair of d-vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"input shapes {x.shape} and {y.shape} do not match")
    if spec.family == "rbf":
        return float(np.exp(-spec.bandwidth * np.sum((x - y) ** 2)))
    if spec.family == "laplace":
        return float(np.exp(-spec.scale * np.linalg.norm(x - y)))
    if zonal:
        nx = np.linalg.norm(x)
        ny = np.linalg.norm(y)
        if nx == 0.0 or ny == 0.0:
            return 0.0
        return float(nx * ny * eval_dot_kernel(spec, float(x @ y) / (nx * ny)))
    _check_unit_rows(x[None, :], "x")
    _check_unit_rows(y[None, :], "y")
    return float(eval_dot_kernel(spec, float(x @ y)))


def cross_gram(spec: KernelSpec, A, B, zonal: bool = False) -> np.ndarray:
    """Rectangular kernel matrix K(A, B) with shape (len(A), len(B))."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.family in ("rbf", "laplace"):
        sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :]
              - 2.0 * A @ B.T)
        np.maximum(sq, 0.0, out=sq)
        if spec.family == "rbf":
            return np.exp(-spec.bandwidth * sq)
        return np.exp(-spec.scale * np.sqrt(sq))
    if zonal:
        na = np.linalg.norm(A, axis=1)
        nb = np.linalg.norm(B, axis=1)
        sa = np.where(na == 0.0, 1.0, na)
        sb = np.where(nb == 0.0, 1.0, nb)
        U = (A @ B.T) / np.outer(sa, sb)
        vals = eval_dot_kernel(spec, np.clip(U, -1.0, 1.0))
        return np.outer(na, nb) * vals
    _check_unit_rows(A, "rows of A")
    _check_unit_rows(B, "rows of B")
    return eval_dot_kernel(spec, A @ B.T)


def gram(spec: KernelSpec, X, zonal: bool = False) -> np.ndarray:
    """Symmetric kernel matrix K(X, X).

    Only the upper triangle is formed and then mirrored, so the result is
    exactly symmetric.  For dot-product kernels on unit-norm inputs the
    diagonal is the constant h(1), set exactly.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    try:
        G = cross_gram(spec, X, X, zonal=zonal)
    except ValueError as err:
        raise ValueError(f"gram assembly failed: {err}") from err
    upper = np.triu(G, k=1)
    G = upper + upper.T + np.diag(np.diag(G))
    if spec.is_dot_product and not zonal:
        np.fill_diagonal(G, eval_dot_kernel(spec, 1.0))
    return G
