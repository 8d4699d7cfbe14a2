"""Experiment configuration.

A config file is a JSON object whose keys are the field names of
:class:`ExperimentConfig`; command-line flags override file values.
Seeds may be written as integers or as decimal/hex strings.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from ..env import parse_seed
from ..errors import InvalidParameter

KINDS = ("simulate", "growth-check", "gauss-check", "confinement", "min-cyl", "torus-moments", "exponent-fit", "calibrate-a")
GEOMETRIES = ("square", "tube", "torus", "cylinder")


@dataclass
class ExperimentConfig:
    kind: str = "simulate"
    n: list = field(default_factory=list)
    replicas: int = 100
    seed: int = 0
    c: float = 0.2
    geometry: str = "tube"
    K: int | None = None
    alpha: list = field(default_factory=lambda: [0.8])
    alpha1: float = 0.85
    alpha2: float = 0.9
    k: list = field(default_factory=lambda: [2, 4, 8, 13])
    window_factor: float = 2.0
    quantile_level: float = 1e-3
    check_orderings: bool = False
    unit_weights: bool = False
    workers: int = 1
    output: str | None = None
    input: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown experiment kind {self.kind!r}")
        self.seed = parse_seed(self.seed)
        self.n = sorted(int(v) for v in self.n)
        if any(v < 1 for v in self.n):
            raise InvalidParameter("every n must be >= 1")
        if int(self.replicas) < 1:
            raise InvalidParameter("replicas must be >= 1")
        self.replicas = int(self.replicas)
        if not 0 < self.c < 0.5:
            raise InvalidParameter(f"c must lie in (0, 1/2), got {self.c}")
        if not 0.75 < self.alpha1 < self.alpha2 < 1:
            raise InvalidParameter(f"need 3/4 < alpha1 < alpha2 < 1, got {self.alpha1}, {self.alpha2}")
        self.alpha = [float(a) for a in self.alpha]
        if any(not 0 < a < 1 for a in self.alpha):
            raise InvalidParameter("alpha values must lie in (0, 1)")
        if self.geometry not in GEOMETRIES:
            raise InvalidParameter(f"geometry must be one of {GEOMETRIES}")
        if int(self.workers) < 1:
            raise InvalidParameter("workers must be >= 1")
        self.workers = int(self.workers)
        if self.window_factor <= 0:
            raise InvalidParameter("window_factor must be positive")
        return self

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("workers")  # results never depend on it
        return out


def load_config(path: str) -> dict:
    with open(path) as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise InvalidParameter("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(obj) - known
    if unknown:
        raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
    return obj
