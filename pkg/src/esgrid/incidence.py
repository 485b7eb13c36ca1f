"""Incidence bounds, Szemeredi-Trotter type exponents and the exponent catalog.

Exponent arithmetic is exact (``fractions.Fraction``); floats appear only
when a bound is evaluated at concrete sizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from esgrid.errors import ResourceLimitError
from esgrid.relation import FiniteRelation, Grid, count_on_grid, fiber_degree, star_transform

# Largest m*n accepted by the exhaustive extremal search.
EXTREMAL_CELL_LIMIT = 36


def fmt_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


# --- Kovari-Sos-Turan --------------------------------------------------------

def kst_bound(m: int, n: int, d: int, nu: int) -> float:
    """``nu^(1/d) * m * n^(1 - 1/d) + d * n``, an upper bound on the edges of a
    K_{d,nu}-free bipartite graph with parts of sizes ``m`` and ``n``."""
    if d < 1 or nu < 1:
        raise ValueError("d and nu must be positive")
    if m < 0 or n < 0:
        raise ValueError("part sizes must be non-negative")
    if n == 0:
        return 0.0
    return nu ** (1 / d) * m * n ** (1 - 1 / d) + d * n


@dataclass(frozen=True)
class BipartiteGraph:
    m: int
    n: int
    edges: tuple = ()

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("part sizes must be non-negative")
        edges = sorted({(int(i), int(j)) for i, j in self.edges})
        for i, j in edges:
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise ValueError(f"edge {(i, j)} out of range for a {self.m}x{self.n} graph")
        object.__setattr__(self, "edges", tuple(edges))

    @classmethod
    def from_biadjacency(cls, matrix) -> "BipartiteGraph":
        a = np.asarray(matrix, dtype=bool)
        return cls(a.shape[0], a.shape[1], tuple(map(tuple, np.argwhere(a).tolist())))

    @classmethod
    def complete(cls, m: int, n: int) -> "BipartiteGraph":
        return cls(m, n, tuple((i, j) for i in range(m) for j in range(n)))

    def __len__(self):
        return len(self.edges)

    def neighborhoods(self) -> list:
        """Right neighborhoods of the left vertices as integer bitmasks."""
        masks = [0] * self.m
        for i, j in self.edges:
            masks[i] |= 1 << j
        return masks

    def add_edges(self, extra) -> "BipartiteGraph":
        return BipartiteGraph(self.m, self.n, self.edges + tuple(extra))


@dataclass(frozen=True)
class KFreeResult:
    free: bool
    witness: tuple | None = None     # (left vertices, right vertices)

    def __bool__(self):
        return self.free


def _bits(mask: int) -> list:
    out, j = [], 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def is_kdnu_free(g: BipartiteGraph, d: int, nu: int) -> KFreeResult:
    """Decide whether ``g`` avoids K_{d,nu} (d left vertices, nu right vertices).

    Searches d-subsets of left vertices of degree at least ``nu``, intersecting
    neighborhoods and stopping at the first common neighborhood of size ``nu``.
    Meant for small ``d`` and a few thousand vertices.
    """
    if d < 1 or nu < 1:
        raise ValueError("d and nu must be positive")
    if d > g.m or nu > g.n:
        return KFreeResult(True)
    masks = g.neighborhoods()
    heavy = [i for i in range(g.m) if masks[i].bit_count() >= nu]

    def extend(chosen, common, start):
        if len(chosen) == d:
            return chosen
        for k in range(start, len(heavy)):
            c = common & masks[heavy[k]]
            if c.bit_count() >= nu:
                found = extend(chosen + [heavy[k]], c, k + 1)
                if found:
                    return found
        return None

    full = (1 << g.n) - 1
    for k in range(len(heavy)):
        found = extend([heavy[k]], full & masks[heavy[k]], k + 1)
        if found:
            common = full
            for i in found:
                common &= masks[i]
            return KFreeResult(False, (tuple(found), tuple(_bits(common)[:nu])))
    return KFreeResult(True)


def max_kdnu_free_edges(m: int, n: int, d: int, nu: int) -> int:
    """Exact maximum edge count of a K_{d,nu}-free subgraph of K_{m,n}.

    Exhaustive over row neighborhoods taken in nondecreasing bitmask order
    (rows are interchangeable), with a branch-and-bound cut. Limited to
    ``m * n <= EXTREMAL_CELL_LIMIT``.
    """
    if d < 1 or nu < 1:
        raise ValueError("d and nu must be positive")
    if m * n > EXTREMAL_CELL_LIMIT:
        raise ResourceLimitError(f"exhaustive search refused for {m}x{n} "
                                 f"(limit {EXTREMAL_CELL_LIMIT} cells)")
    if m == 0 or n == 0:
        return 0
    if d > m or nu > n:
        return m * n
    pop = [bin(r).count("1") for r in range(1 << n)]
    rows: list = []
    best = 0

    def compatible(r: int) -> bool:
        if d == 1:
            return pop[r] < nu
        if pop[r] < nu:
            return True
        for others in combinations(rows, d - 1):
            c = r
            for o in others:
                c &= o
            if pop[c] >= nu:
                return False
        return True

    def search(start: int, edges: int):
        nonlocal best
        left = m - len(rows)
        if left == 0:
            best = max(best, edges)
            return
        if edges + left * n <= best:
            return
        for r in range(start, 1 << n):
            if compatible(r):
                rows.append(r)
                search(r, edges + pop[r])
                rows.pop()

    search(0, 0)
    return best


# --- Szemeredi-Trotter exponents ---------------------------------------------

@dataclass(frozen=True)
class STExponents:
    d: int
    t: Fraction
    gamma1: Fraction
    gamma2: Fraction
    gamma: Fraction

    def to_dict(self):
        return {"d": self.d, "t": fmt_rational(self.t), "gamma1": fmt_rational(self.gamma1),
                "gamma2": fmt_rational(self.gamma2), "gamma": fmt_rational(self.gamma)}


def st_exponents(d: int, t) -> STExponents:
    """Incidence exponents for a distal cell decomposition of exponent ``t``
    in dimension ``d``: ``gamma1 = (t-1)d/(td-1)``, ``gamma2 = (td-t)/(td-1)``
    and ``gamma = 3 - 2(gamma1 + gamma2)``.

    The composed ``gamma`` comes from K_{2,nu}-free counting, so it is the
    relevant exponent for ``d = 2`` (where it equals ``1/(2t-1)``). For larger
    ``d`` it is reported as computed and may be zero or negative.
    """
    t = Fraction(t)
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d}")
    if t < 2:
        raise ValueError(f"t must be >= 2, got {t}")
    d = int(d)
    g1 = (t - 1) * d / (t * d - 1)
    g2 = (t * d - t) / (t * d - 1)
    assert 0 < g1 <= 1 and 0 < g2 <= 1
    return STExponents(d, t, g1, g2, 3 - 2 * (g1 + g2))


def theorem_d_bound(m: float, n: float, exps: STExponents, nu: int, C: float) -> float:
    """``C * nu * (m^gamma1 * n^gamma2 + m + n)``. ``C`` must come from the caller."""
    if C <= 0:
        raise ValueError("C must be positive")
    if nu < 1:
        raise ValueError("nu must be positive")
    if m < 0 or n < 0:
        raise ValueError("sizes must be non-negative")
    return C * nu * (m ** float(exps.gamma1) * n ** float(exps.gamma2) + m + n)


# --- catalog -----------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    setting: str
    parameters: dict
    gamma: Fraction | None
    source: str
    formula: str
    status: str = "proved"    # "proved", "symbolic" (depends on epsilon) or "open"

    def to_dict(self):
        return {"setting": self.setting, "parameters": dict(self.parameters),
                "gamma": None if self.gamma is None else fmt_rational(self.gamma),
                "formula": self.formula, "status": self.status, "source": self.source}


def _split_s(s, ge4, eq3):
    if s < 3:
        raise ValueError("arity s must be at least 3")
    return ge4 if s >= 4 else eq3


# setting -> (parameter names, gamma function or None, formula, source, status)
_SETTINGS = {
    "ominimal_plane": ((), lambda: Fraction(1, 3), "1/3",
                       "o-minimal expansion of a group, families in M^2 x M^d2; "
                       "distal cell decomposition with t=2", "proved"),
    "ominimal": (("d1",), lambda d1: Fraction(1, 4 * d1 - 5), "1/(4*d1-5)",
                 "o-minimal expansion of a group, families in M^d1 x M^d2; "
                 "distal cell decomposition with t=2*d1-2", "proved"),
    "semialgebraic": (("d1",), lambda d1: Fraction(1, 4 * d1 - 5), "1/(4*d1-5)",
                      "semialgebraic families in R^d1 x R^d2 of bounded description complexity",
                      "proved"),
    "constructible": (("d1",), lambda d1: Fraction(1, 8 * d1 - 5), "1/(8*d1-5)",
                      "constructible families in C^d1 x C^d2 of bounded description complexity, "
                      "viewed as semialgebraic in R^(2*d1)", "proved"),
    "real_algebraic": (("d1",), lambda d1: Fraction(1, 2 * d1 - 1), "1/(2*d1-1)",
                       "real algebraic relations with fibers of bounded degree "
                       "(polynomial partitioning)", "proved"),
    "complex_algebraic": (("d1",), lambda d1: Fraction(1, 4 * d1 - 1), "1/(4*d1-1)",
                          "complex algebraic relations with fibers of bounded degree, "
                          "viewed as real algebraic in R^(2*d1)", "proved"),
    "semilinear": ((), None, "1-eps for every eps > 0",
                   "semilinear families; the constant depends on eps", "symbolic"),
    "dcf0": ((), None, "some gamma > 0, no explicit value",
             "differentially closed fields of characteristic 0; explicit bounds are open",
             "open"),
    "ccm": ((), None, "some gamma > 0, no explicit value",
            "compact complex manifolds; explicit and optimal exponents are open", "open"),
    "real_curves": (("s",), lambda s: _split_s(s, Fraction(1, 3), Fraction(1, 6)),
                    "1/3 if s>=4, 1/6 if s=3",
                    "power saving for semialgebraic Q in R^s with finite-to-one projections",
                    "proved"),
    "complex_curves": (("s",), lambda s: _split_s(s, Fraction(1, 11), Fraction(1, 22)),
                       "1/11 if s>=4, 1/22 if s=3",
                       "power saving for irreducible algebraic Q in C^s with generically "
                       "finite projections", "proved"),
    "acf": (("d", "s"), lambda d, s: _split_s(s, Fraction(1, 16 * d - 5), Fraction(1, 2 * (16 * d - 5))),
            "1/(16*d-5) if s>=4, 1/(2*(16*d-5)) if s=3",
            "power saving over algebraically closed fields of characteristic 0, "
            "varieties of dimension d", "proved"),
    "ominimal_power_saving": (("m", "s"),
                              lambda m, s: _split_s(s, Fraction(1, 8 * m - 5), Fraction(1, 16 * m - 10)),
                              "1/(8*m-5) if s>=4, 1/(16*m-10) if s=3",
                              "power saving in an o-minimal expansion of a group, "
                              "sets of dimension m", "proved"),
    "ominimal_skolem": (("m", "s"),
                        lambda m, s: _split_s(s, Fraction(1, 8 * m - 3), Fraction(1, 16 * m - 6)),
                        "1/(8*m-3) if s>=4, 1/(16*m-6) if s=3",
                        "power saving in an o-minimal structure with definable Skolem functions "
                        "(cell decomposition exponent t=2*d1-1)", "proved"),
}

_MINIMUM = {"d1": 2, "d": 1, "m": 1, "s": 3}


def catalog_settings() -> list:
    return list(_SETTINGS)


def catalog_entry(setting: str, **params) -> CatalogEntry:
    """Instantiate one catalog row; raises on unknown settings or parameters."""
    try:
        names, fn, formula, source, status = _SETTINGS[setting]
    except KeyError:
        raise ValueError(f"unknown setting {setting!r}; known: {', '.join(_SETTINGS)}") from None
    if set(params) != set(names):
        raise ValueError(f"setting {setting!r} takes parameters {names}, got {tuple(params)}")
    for k, v in params.items():
        if int(v) != v or v < _MINIMUM[k]:
            raise ValueError(f"parameter {k} must be an integer >= {_MINIMUM[k]}, got {v}")
    ordered = {k: int(params[k]) for k in names}
    gamma = None if fn is None else fn(**ordered)
    return CatalogEntry(setting, ordered, gamma, source, formula, status)


def exponent_catalog(max_param: int = 10) -> list:
    """The catalog instantiated for every parameter from its minimum up to
    ``max_param`` (``s`` ranges over 3 and 4, which covers both cases)."""
    out = []
    for setting, (names, *_rest) in _SETTINGS.items():
        ranges = [range(3, 5) if k == "s" else range(_MINIMUM[k], max_param + 1) for k in names]
        for values in (np.array(np.meshgrid(*ranges, indexing="ij")).reshape(len(names), -1).T
                       if names else [()]):
            out.append(catalog_entry(setting, **dict(zip(names, map(int, values)))))
    return out


# --- Cauchy-Schwarz count inequality -----------------------------------------

@dataclass(frozen=True)
class CSCheck:
    lhs: int
    rhs: float
    holds: bool
    tight: bool
    star_count: int = 0
    a1_size: int = 0

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds, "tight": self.tight,
                "star_count": self.star_count, "a1_size": self.a1_size}


def cauchy_schwarz_check(q: FiniteRelation, grid: Grid, d: int) -> CSCheck:
    """Compare ``|Q on A|`` with ``d |A1|^(1/2) |Q* on A2 x A2 x A3 x A3|^(1/2)``.

    The comparison ``lhs^2 <= d^2 |A1| count*`` is done in integers, so
    ``holds`` and ``tight`` are exact; ``rhs`` is reported as a float.
    """
    if q.arity != 3:
        raise ValueError("the count inequality is for ternary relations")
    grid.validate_for(q)
    deg = max(fiber_degree(q, i) for i in range(3))
    if deg > d:
        raise ValueError(f"relation has fiber degree {deg} > d = {d}")
    a1, a2, a3 = grid.parts
    lhs = count_on_grid(q, grid)
    star = count_on_grid(star_transform(q), Grid([a2, a2, a3, a3]))
    bound_sq = d * d * len(a1) * star
    rhs = d * math.sqrt(len(a1) * star)
    return CSCheck(lhs, rhs, lhs * lhs <= bound_sq, lhs * lhs == bound_sq, star, len(a1))
