"""Run configuration: a single JSON document, validated with field paths."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from optrace.errors import ConfigurationError
from optrace.galerkin import TruncationSpec
from optrace.potential import TrigOperatorPotential
from optrace.resolvent import ContourOptions

COMMANDS = ("check", "spectrum", "theorem21", "identities", "remainder", "verify")
FORMATS = ("csv", "json")
MAX_K = 4


class ConfigError(ConfigurationError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunConfig:
    dim: int
    k: int
    cos_terms: dict[int, list[list[float]]] = field(default_factory=dict)
    sin_terms: dict[int, list[list[float]]] = field(default_factory=dict)
    p_list: list[int] = field(default_factory=lambda: [2, 4, 8])
    m_max: int | None = None
    buffer: int | None = None
    small_radius: float = 0.25
    small_nodes: int = 128
    big_nodes: int | None = None
    scale_small_radius: bool = True
    command: str = "verify"
    output_path: str | None = None
    output_format: str = "csv"
    allow_large_k: bool = False

    def potential(self) -> TrigOperatorPotential:
        return TrigOperatorPotential(self.dim, self.cos_terms, self.sin_terms)

    def truncation(self) -> TruncationSpec:
        return TruncationSpec.for_potential(self.potential(), max(self.p_list), self.buffer, self.m_max)

    def contour(self) -> ContourOptions:
        return ContourOptions(self.small_radius, self.small_nodes, self.big_nodes, self.scale_small_radius)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "k": self.k,
            "cos_terms": {str(r): a for r, a in sorted(self.cos_terms.items())},
            "sin_terms": {str(s): b for s, b in sorted(self.sin_terms.items())},
            "p_list": list(self.p_list),
            "truncation": {"m_max": self.m_max, "buffer": self.buffer},
            "contour": {
                "small_radius": self.small_radius,
                "small_nodes": self.small_nodes,
                "big_nodes": self.big_nodes,
                "scale_small_radius": self.scale_small_radius,
            },
            "command": self.command,
            "output": {"path": self.output_path, "format": self.output_format},
            "allow_large_k": self.allow_large_k,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict, allow_large_k: bool | None = None) -> RunConfig:
        if not isinstance(data, dict):
            raise ConfigError("$", "config must be a JSON object")
        known = {"dim", "k", "cos_terms", "sin_terms", "p_list", "truncation", "contour",
                 "command", "output", "allow_large_k"}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        dim = _int(data, "dim", "dim", minimum=1)
        k = _int(data, "k", "k", minimum=2)
        large = bool(data.get("allow_large_k", False)) if allow_large_k is None else allow_large_k
        if k > MAX_K and not large:
            raise ConfigError("k", f"k = {k} exceeds {MAX_K}; pass --allow-large-k to override")
        cos_terms = _terms(data.get("cos_terms", {}), "cos_terms", dim, minimum=0)
        sin_terms = _terms(data.get("sin_terms", {}), "sin_terms", dim, minimum=1)

        p_list = data.get("p_list", [2, 4, 8])
        if not isinstance(p_list, list) or not p_list:
            raise ConfigError("p_list", "must be a nonempty list of integers")
        for i, p in enumerate(p_list):
            if not isinstance(p, int) or isinstance(p, bool) or p < 0:
                raise ConfigError(f"p_list[{i}]", "must be an integer >= 0")
        if any(b <= a for a, b in zip(p_list, p_list[1:])):
            raise ConfigError("p_list", "must be strictly ascending")

        trunc = _section(data, "truncation")
        m_max = _opt_int(trunc, "m_max", "truncation.m_max", minimum=0)
        buffer = _opt_int(trunc, "buffer", "truncation.buffer", minimum=0)
        contour = _section(data, "contour")
        small_radius = contour.get("small_radius", 0.25)
        if not isinstance(small_radius, (int, float)) or isinstance(small_radius, bool) \
                or not 0 < small_radius < 0.5:
            raise ConfigError("contour.small_radius", "must be a number in (0, 0.5)")
        small_nodes = _opt_int(contour, "small_nodes", "contour.small_nodes", minimum=16)
        big_nodes = _opt_int(contour, "big_nodes", "contour.big_nodes", minimum=16)
        scale = contour.get("scale_small_radius", True)
        if not isinstance(scale, bool):
            raise ConfigError("contour.scale_small_radius", "must be true or false")

        command = data.get("command", "verify")
        if command not in COMMANDS:
            raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}")
        output = _section(data, "output")
        path = output.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigError("output.path", "must be a string or null")
        fmt = output.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError("output.format", "must be csv or json")

        cfg = cls(
            dim=dim, k=k, cos_terms=cos_terms, sin_terms=sin_terms, p_list=list(p_list),
            m_max=m_max, buffer=buffer, small_radius=float(small_radius),
            small_nodes=128 if small_nodes is None else small_nodes, big_nodes=big_nodes,
            scale_small_radius=scale, command=command, output_path=path, output_format=fmt,
            allow_large_k=bool(data.get("allow_large_k", False)),
        )
        try:
            cfg.truncation()
        except ConfigurationError as exc:
            raise ConfigError("truncation", str(exc)) from exc
        return cfg

    @classmethod
    def from_json(cls, text: str, allow_large_k: bool | None = None) -> RunConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON: {exc}") from exc
        return cls.from_dict(data, allow_large_k)

    @classmethod
    def load(cls, path: str | Path, allow_large_k: bool | None = None) -> RunConfig:
        return cls.from_json(Path(path).read_text(), allow_large_k)


def _section(data: dict, name: str) -> dict:
    sec = data.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be an object")
    return sec


def _int(data: dict, key: str, path: str, minimum: int) -> int:
    if key not in data:
        raise ConfigError(path, "is required")
    return _opt_int(data, key, path, minimum)


def _opt_int(data: dict, key: str, path: str, minimum: int) -> int | None:
    val = data.get(key)
    if val is None:
        return None
    if not isinstance(val, int) or isinstance(val, bool) or val < minimum:
        raise ConfigError(path, f"must be an integer >= {minimum}")
    return val


def _terms(raw, path: str, dim: int, minimum: int) -> dict[int, list[list[float]]]:
    if not isinstance(raw, dict):
        raise ConfigError(path, "must map harmonic index to a matrix")
    out = {}
    for key, entries in raw.items():
        where = f"{path}.{key}"
        try:
            r = int(key)
        except (TypeError, ValueError):
            raise ConfigError(where, "harmonic index must be an integer") from None
        if r < minimum:
            raise ConfigError(where, f"harmonic index must be >= {minimum}")
        try:
            a = np.array(entries, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(where, "matrix entries must be numbers") from None
        if a.ndim == 1 and a.size == dim * dim:
            a = a.reshape(dim, dim)
        if a.shape != (dim, dim):
            raise ConfigError(where, f"expected a {dim}x{dim} matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ConfigError(where, "matrix entries must be finite")
        if not np.array_equal(a, a.T):
            raise ConfigError(where, "matrix is not symmetric")
        out[r] = a.tolist()
    return dict(sorted(out.items()))
