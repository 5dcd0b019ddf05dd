"""Coefficient families a(n) on [1, N]."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError
from .ntcore import SIEVE_CAP, RoughSpec, iter_rough

FAMILIES = ("dense", "all_ones", "rough", "interval", "additive_char", "geometric")


@dataclass(frozen=True, eq=False)
class CoefficientSpec:
    """A weight family; ``materialize()`` gives a complex array ``a`` of length
    N + 1 with ``a[0] == 0`` and ``a[n]`` the weight of n."""

    family: str
    params: dict[str, Any] = field(default_factory=dict)
    values: np.ndarray | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def dense(cls, values) -> CoefficientSpec:
        """``values[i]`` is a(i + 1)."""
        v = np.asarray(values, dtype=np.complex128).ravel()
        if v.size < 1:
            raise DomainError("need at least one coefficient")
        a = np.zeros(v.size + 1, dtype=np.complex128)
        a[1:] = v
        a.setflags(write=False)
        return cls("dense", {"N": int(v.size)}, a)

    @classmethod
    def all_ones(cls, N: int) -> CoefficientSpec:
        return cls("all_ones", {"N": _positive(N, "N")})

    @classmethod
    def rough(cls, x: int, R: float) -> CoefficientSpec:
        RoughSpec(int(x), R)
        return cls("rough", {"x": _positive(x, "x"), "R": float(R)})

    @classmethod
    def interval(cls, x: int, y: int) -> CoefficientSpec:
        """Indicator of the integers in (x, x + y]."""
        if x < 0:
            raise DomainError("x must be >= 0")
        return cls("interval", {"x": int(x), "y": _positive(y, "y")})

    @classmethod
    def additive_char(cls, N: int, theta: float) -> CoefficientSpec:
        return cls("additive_char", {"N": _positive(N, "N"), "theta": float(theta)})

    @classmethod
    def geometric(cls, p: int, K: int) -> CoefficientSpec:
        """Indicator of {p, p^2, ..., p^K}."""
        if p < 2 or K < 1:
            raise DomainError("need p >= 2 and K >= 1")
        if p**K > SIEVE_CAP:
            raise DomainError(f"p^K = {p}^{K} exceeds the sieve cap")
        return cls("geometric", {"p": int(p), "K": int(K)})

    @classmethod
    def from_config(cls, cfg: dict[str, Any]) -> CoefficientSpec:
        cfg = dict(cfg)
        name = cfg.pop("family")
        if name == "dense":
            re = np.asarray(cfg["real"], dtype=float)
            im = np.asarray(cfg.get("imag", np.zeros_like(re)), dtype=float)
            return cls.dense(re + 1j * im)
        builders = {
            "all_ones": cls.all_ones,
            "rough": cls.rough,
            "interval": cls.interval,
            "additive_char": cls.additive_char,
            "geometric": cls.geometric,
        }
        if name not in builders:
            raise DomainError(f"unknown coefficient family {name!r}")
        return builders[name](**cfg)

    def to_config(self) -> dict[str, Any]:
        if self.family == "dense":
            v = self.values[1:]
            return {"family": "dense", "real": v.real.tolist(), "imag": v.imag.tolist()}
        return {"family": self.family, **self.params}

    @property
    def N(self) -> int:
        p = self.params
        if self.family in ("dense", "all_ones", "additive_char"):
            return p["N"]
        if self.family == "rough":
            return p["x"]
        if self.family == "interval":
            return p["x"] + p["y"]
        return p["p"] ** p["K"]

    def materialize(self) -> np.ndarray:
        if self.values is not None:
            return self.values
        if "a" not in self._cache:
            a = self._build()
            a.setflags(write=False)
            self._cache["a"] = a
        return self._cache["a"]

    def _build(self) -> np.ndarray:
        N = self.N
        a = np.zeros(N + 1, dtype=np.complex128)
        p = self.params
        if self.family == "all_ones":
            a[1:] = 1.0
        elif self.family == "rough":
            a[iter_rough(RoughSpec(p["x"], p["R"]))] = 1.0
        elif self.family == "interval":
            a[p["x"] + 1 :] = 1.0
        elif self.family == "additive_char":
            n = np.arange(1, N + 1, dtype=np.float64)
            frac = np.mod(n * p["theta"], 1.0)
            a[1:] = np.exp(2j * math.pi * frac)
        elif self.family == "geometric":
            for k in range(1, p["K"] + 1):
                a[p["p"] ** k] = 1.0
        return a

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.materialize())


def _positive(v, name: str) -> int:
    v = int(v)
    if v < 1:
        raise DomainError(f"{name} must be >= 1, got {v}")
    return v
