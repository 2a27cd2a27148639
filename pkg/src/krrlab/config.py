"""Experiment configuration: a flat key-table text file (TOML subset).

Example::

    d = 8
    n = [32, 64]
    gamma = [0.0]
    sigma_eps = 1.0
    seeds = [0, 1]
    m_test = 500
    delta = 0.1
    l_max = 10
    kernel = { family = "ntk", depth = 3 }
    target = { anchor_seed = 7, coeffs = [[0, 1.0], [2, 0.5]] }

Every run is fully determined by the config plus its seed list.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:        # python < 3.11
    import tomli as tomllib

from .eigenbounds import BoundConstants
from .kernels import KernelSpec
from .sphere import TargetSpec


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    kernel: KernelSpec
    d: int = 8
    n_values: tuple[int, ...] = (32,)
    gamma_values: tuple[float, ...] = (0.0,)
    sigma_eps: float = 1.0
    seeds: tuple[int, ...] = (0,)
    m_test: int = 256
    target: TargetSpec | None = None
    k: int | None = None            # bound cutoff; defaults to the degree-1 boundary
    k_prime: int | None = None
    delta: float = 0.1
    l_max: int = 10
    constants: BoundConstants = field(default_factory=BoundConstants)
    text: str = ""                  # raw config text, hashed into every output row

    def config_hash(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]


def parse_config(text: str, constants: BoundConstants | None = None) -> ExperimentConfig:
    table = tomllib.loads(text)
    kernel = KernelSpec.from_config(table.get("kernel", {"family": "ntk", "depth": 3}))
    d = int(table.get("d", 8))
    target = None
    if "target" in table:
        target = TargetSpec.from_config(table["target"], d)
    if constants is None:
        cblock = table.get("constants", {})
        constants = BoundConstants(**{key: float(val) for key, val in cblock.items()})
    return ExperimentConfig(
        kernel=kernel,
        d=d,
        n_values=tuple(int(n) for n in _as_list(table.get("n", [32]))),
        gamma_values=tuple(float(g) for g in _as_list(table.get("gamma", [0.0]))),
        sigma_eps=float(table.get("sigma_eps", 1.0)),
        seeds=tuple(int(s) for s in _as_list(table.get("seeds", [0]))),
        m_test=int(table.get("m_test", 256)),
        target=target,
        k=int(table["k"]) if "k" in table else None,
        k_prime=int(table["k_prime"]) if "k_prime" in table else None,
        delta=float(table.get("delta", 0.1)),
        l_max=int(table.get("l_max", 10)),
        constants=constants,
        text=text,
    )


def load_config(path, constants: BoundConstants | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), constants)


def _as_list(value):
    return value if isinstance(value, (list, tuple)) else [value]
