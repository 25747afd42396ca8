"""Scenario configuration for the simulation harness.

The JSON form mirrors the dataclass with snake_case keys, except that
the penalty level travels as "lambda" (a Python keyword, stored on the
dataclass as ``lam``) and the coefficient pattern is a small tagged
object.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

_PATTERNS = ("half_ones_over_sqrt_n", "alternating")


@dataclass(frozen=True)
class ScenarioConfig:
    n: int
    p: int
    lam: float
    reps: int
    seed: int
    rho: float = 0.2
    beta_pattern: tuple = ("half_ones_over_sqrt_n",)
    alpha: float = 0.05
    cap: int = 20

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        kind = self.beta_pattern[0] if self.beta_pattern else None
        if kind not in _PATTERNS:
            raise ValueError(f"unknown beta pattern {kind!r}")
        if kind == "alternating":
            if len(self.beta_pattern) != 2 or not math.isfinite(
                float(self.beta_pattern[1])
            ):
                raise ValueError("alternating pattern needs a finite scale")


def beta_vector(cfg: ScenarioConfig) -> np.ndarray:
    """Coefficient vector described by the scenario's pattern."""
    beta = np.zeros(cfg.p)
    kind = cfg.beta_pattern[0]
    if kind == "half_ones_over_sqrt_n":
        beta[: cfg.p // 2] = 1.0 / math.sqrt(cfg.n)
    else:
        beta[0::2] = float(cfg.beta_pattern[1])
    return beta


def to_json_dict(cfg: ScenarioConfig) -> dict:
    pattern: dict = {"kind": cfg.beta_pattern[0]}
    if cfg.beta_pattern[0] == "alternating":
        pattern["scale"] = float(cfg.beta_pattern[1])
    return {
        "n": cfg.n,
        "p": cfg.p,
        "lambda": cfg.lam,
        "reps": cfg.reps,
        "seed": cfg.seed,
        "rho": cfg.rho,
        "beta_pattern": pattern,
        "alpha": cfg.alpha,
        "cap": cfg.cap,
    }


def from_json_dict(d: dict) -> ScenarioConfig:
    try:
        pattern_obj = d.get("beta_pattern", {"kind": "half_ones_over_sqrt_n"})
        kind = pattern_obj["kind"]
        if kind == "alternating":
            pattern = (kind, float(pattern_obj["scale"]))
        else:
            pattern = (kind,)
        return ScenarioConfig(
            n=int(d["n"]),
            p=int(d["p"]),
            lam=float(d["lambda"]),
            reps=int(d["reps"]),
            seed=int(d["seed"]),
            rho=float(d.get("rho", 0.2)),
            beta_pattern=pattern,
            alpha=float(d.get("alpha", 0.05)),
            cap=int(d.get("cap", 20)),
        )
    except KeyError as missing:
        raise ValueError(f"config is missing key {missing}") from None


def config_hash(resolved: dict) -> str:
    """Stable hex digest of a JSON-serializable configuration."""
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
