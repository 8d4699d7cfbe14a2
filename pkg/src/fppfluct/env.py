"""Edge-weight environments on the planar integer lattice.

Weights are never stored: each one is a pure function of ``(seed, edge)``
obtained by hashing the canonical edge key and mapping the hash to an
Exp(1) variate through ``-log(U)``.  A periodic environment folds every
edge onto the fundamental domain ``E(n)^o`` before hashing, which makes the
i.i.d. and periodic environments built from one seed agree exactly on
``E(n)^o``; this is how :func:`couple` is realised.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple

import numpy as np

from . import _kernels
from .errors import InvalidParameter

HORIZONTAL = 0
VERTICAL = 1


class Vertex(NamedTuple):
    x: int
    y: int


class Edge(NamedTuple):
    """Nearest-neighbour edge stored by its lower-left endpoint and axis."""

    x: int
    y: int
    d: int  # HORIZONTAL: (x, y)-(x+1, y); VERTICAL: (x, y)-(x, y+1)

    @classmethod
    def between(cls, u, v) -> "Edge":
        (ux, uy), (vx, vy) = u, v
        dx, dy = vx - ux, vy - uy
        if abs(dx) + abs(dy) != 1:
            raise InvalidParameter(f"{tuple(u)} and {tuple(v)} are not lattice neighbours")
        if (vx, vy) < (ux, uy):
            ux, uy = vx, vy
        return cls(int(ux), int(uy), HORIZONTAL if dx != 0 else VERTICAL)

    @property
    def endpoints(self) -> tuple[Vertex, Vertex]:
        a = Vertex(self.x, self.y)
        if self.d == HORIZONTAL:
            return a, Vertex(self.x + 1, self.y)
        return a, Vertex(self.x, self.y + 1)

    def shifted(self, dx: int, dy: int) -> "Edge":
        return Edge(self.x + dx, self.y + dy, self.d)


def in_fundamental_domain(e: Edge, n: int) -> bool:
    """Membership in E(n)^o: edges of B(n) with an endpoint in B(n-1)."""
    a, b = e.endpoints
    inside = all(0 <= c <= n for c in (*a, *b))
    touches = any(0 <= v.x <= n - 1 and 0 <= v.y <= n - 1 for v in (a, b))
    return inside and touches


class Mode(str, Enum):
    IID = "iid"
    PERIODIC = "periodic"
    UNIT = "unit"  # every weight equal to 1; debugging and degenerate checks


def parse_seed(value) -> int:
    """Accept ints or decimal/hex strings; reduce to an unsigned 64-bit key."""
    if isinstance(value, str):
        value = int(value.strip(), 0)
    value = int(value)
    if value < 0:
        raise InvalidParameter(f"seed must be nonnegative, got {value}")
    return value & 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class Environment:
    mode: Mode
    n: int
    seed: int
    overrides: Mapping[Edge, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameter(f"n must be >= 1, got {self.n}")
        for e, w in self.overrides.items():
            if not w > 0:
                raise InvalidParameter(f"override weight for {e} must be positive")

    @property
    def period(self) -> int:
        return self.n if self.mode is Mode.PERIODIC else 0

    def canonical(self, e: Edge) -> Edge:
        if self.mode is Mode.PERIODIC:
            return Edge(e.x % self.n, e.y % self.n, e.d)
        return e

    def weight(self, e) -> float:
        if not isinstance(e, Edge):
            e = Edge.between(*e)
        return float(self.weights(np.array([e.x]), np.array([e.y]), np.array([e.d]))[0])

    def weights(self, xs, ys, ds) -> np.ndarray:
        """Vectorised lookup for canonical edges given as parallel arrays."""
        xs = np.ascontiguousarray(xs, dtype=np.int64).ravel()
        ys = np.ascontiguousarray(ys, dtype=np.int64).ravel()
        ds = np.ascontiguousarray(ds, dtype=np.int64).ravel()
        if self.mode is Mode.UNIT:
            out = np.ones(xs.shape[0])
        else:
            out = _kernels.exp_weights(np.uint64(self.seed), xs, ys, ds, self.period)
        for e, w in self.overrides.items():
            c = self.canonical(e)
            if self.mode is Mode.PERIODIC:
                hit = (xs % self.n == c.x) & (ys % self.n == c.y) & (ds == c.d)
            else:
                hit = (xs == c.x) & (ys == c.y) & (ds == c.d)
            out[hit] = w
        return out

    def with_override(self, e: Edge, w: float) -> "Environment":
        table = dict(self.overrides)
        table[self.canonical(e)] = float(w)
        return Environment(self.mode, self.n, self.seed, table)

    def to_dict(self) -> dict:
        return {"mode": self.mode.value, "n": self.n, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: Mapping) -> "Environment":
        return sample_environment(obj["mode"], obj["n"], parse_seed(obj["seed"]))


@dataclass(frozen=True)
class CoupledEnvironment:
    iid: Environment
    periodic: Environment

    @property
    def n(self) -> int:
        return self.periodic.n


def sample_environment(mode, n: int, seed=0) -> Environment:
    """Build an environment; ``n`` is the period (periodic) or window size."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    try:
        mode = Mode(mode)
    except ValueError:
        raise InvalidParameter(f"unknown environment mode {mode!r}") from None
    return Environment(mode, int(n), parse_seed(seed))


def couple(n: int, seed=0) -> CoupledEnvironment:
    """I.i.d. and n-periodic environments sharing their weights on E(n)^o.

    Both members hash the same ``(seed, edge)`` keys; the periodic member
    first reduces coordinates mod n, which is the identity on E(n)^o, so
    agreement there is exact while the i.i.d. member stays independent
    elsewhere.
    """
    seed = parse_seed(seed)
    return CoupledEnvironment(
        iid=sample_environment(Mode.IID, n, seed),
        periodic=sample_environment(Mode.PERIODIC, n, seed),
    )


def fundamental_edges(n: int) -> list[Edge]:
    """All 2n^2 edges of E(n)^o."""
    return [Edge(x, y, d) for x in range(n) for y in range(n) for d in (HORIZONTAL, VERTICAL)]
