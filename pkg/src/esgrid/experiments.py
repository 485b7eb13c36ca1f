"""Relation generators, grid samplers, count sweeps and exponent fits.

Relation specs may use the token ``"n"`` wherever a size is expected; a
sweep substitutes each ``n`` in turn via :meth:`RelationSpec.at`.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from esgrid.errors import RelationFormatError, ResourceLimitError
from esgrid.groups import abelian_group
from esgrid.relation import FiniteRelation, Grid, count_on_grid

SPEC_HEADER = "#spec v1"
CSV_COLUMNS = ("spec_id", "n", "grid_kind", "seed", "count", "micros")
DEFAULT_MAX_TUPLES = 5_000_000
KINDS = ("group_sum", "polynomial_mod", "polynomial_box", "twisted", "random_fiber_algebraic")
GRID_KINDS = ("full", "arithmetic", "geometric_box", "random")


class TwistWarning(UserWarning):
    """A twist could not preserve the Latin property."""


class ZeroCountWarning(UserWarning):
    """Rows with zero count were left out of a log-log fit."""


def max_tuples_default() -> int:
    """The resource ceiling, overridable through ``ESGRID_MAX_TUPLES``."""
    raw = os.environ.get("ESGRID_MAX_TUPLES")
    if raw is None:
        return DEFAULT_MAX_TUPLES
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"ESGRID_MAX_TUPLES must be an integer, got {raw!r}") from None


# --- specs -------------------------------------------------------------------

def _subst(value, n):
    if value == "n":
        if n is None:
            raise ValueError("spec uses the size token 'n' but no n was given")
        return n
    if isinstance(value, list):
        return [_subst(v, n) for v in value]
    if isinstance(value, RelationSpec):
        return value.at(n)
    return value


def _has_token(value) -> bool:
    if value == "n":
        return True
    if isinstance(value, dict):
        return any(_has_token(v) for v in value.values())
    if isinstance(value, list):
        return any(_has_token(v) for v in value)
    if isinstance(value, RelationSpec):
        return _has_token(value.params)
    return False


@dataclass(frozen=True)
class RelationSpec:
    """A recipe for a relation.

    ``params`` by kind:

    * ``group_sum``: ``factors`` (invariant factors), ``arity``.
    * ``polynomial_mod``: ``terms`` as ``[coef, [e_1, ..., e_s]]`` pairs
      meaning ``sum coef * prod x_i^e_i == 0 (mod modulus)``; ``modulus``.
    * ``polynomial_box``: ``terms``; ``bounds`` with one entry per coordinate,
      ``None`` marking an output coordinate whose domain is ``0..max value``;
      optional ``solve``, a coordinate the polynomial is linear in with
      coefficient +-1, which is then computed instead of enumerated.
    * ``twisted``: ``base`` (a ``group_sum`` spec), ``seed``, ``location``.
    * ``random_fiber_algebraic``: ``sizes``, ``d``, ``density``, ``seed``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown spec kind {self.kind!r}")

    # constructors
    @classmethod
    def group_sum(cls, factors, arity: int) -> "RelationSpec":
        return cls("group_sum", {"factors": list(factors), "arity": arity})

    @classmethod
    def polynomial_mod(cls, terms, modulus) -> "RelationSpec":
        return cls("polynomial_mod", {"terms": [[c, list(e)] for c, e in terms], "modulus": modulus})

    @classmethod
    def polynomial_box(cls, terms, bounds, solve: int | None = None) -> "RelationSpec":
        return cls("polynomial_box", {"terms": [[c, list(e)] for c, e in terms],
                                      "bounds": list(bounds), "solve": solve})

    @classmethod
    def twisted(cls, base: "RelationSpec", seed: int = 0, location: int | None = None) -> "RelationSpec":
        return cls("twisted", {"base": base, "seed": seed, "location": location})

    @classmethod
    def random_fiber_algebraic(cls, sizes, d: int, density: float, seed: int = 0) -> "RelationSpec":
        return cls("random_fiber_algebraic", {"sizes": list(sizes), "d": d,
                                              "density": density, "seed": seed})

    def at(self, n: int | None) -> "RelationSpec":
        """Substitute ``n`` for every size token."""
        return RelationSpec(self.kind, {k: _subst(v, n) for k, v in self.params.items()})

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "params": {k: (v.to_dict() if isinstance(v, RelationSpec) else v)
                           for k, v in sorted(self.params.items())}}

    @classmethod
    def from_dict(cls, d) -> "RelationSpec":
        params = dict(d["params"])
        if isinstance(params.get("base"), dict):
            params["base"] = cls.from_dict(params["base"])
        return cls(d["kind"], params)

    @property
    def spec_id(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return f"{self.kind}-{hashlib.sha256(blob.encode()).hexdigest()[:10]}"

    def validate(self):
        """Raise ``ValueError`` when the parameters are inconsistent."""
        p = self.params
        if _has_token(p):
            raise ValueError("unsubstituted size token 'n'; call .at(n) first")
        if self.kind == "group_sum":
            if p["arity"] < 3:
                raise ValueError("group_sum needs arity >= 3")
            if any(f < 1 for f in p["factors"]):
                raise ValueError("group factors must be positive")
        elif self.kind == "polynomial_mod":
            if p["modulus"] < 2:
                raise ValueError("modulus must be at least 2")
            _check_terms(p["terms"])
        elif self.kind == "polynomial_box":
            s = _check_terms(p["terms"])
            if len(p["bounds"]) != s:
                raise ValueError(f"bounds must have {s} entries")
            free = [k for k, b in enumerate(p["bounds"]) if b is None]
            solve = p.get("solve")
            if len(free) > 1 or (free and solve is not None and free != [solve]):
                raise ValueError("at most one output coordinate, which must be the solved one")
            if free and solve is None:
                solve = free[0]
            if solve is not None:
                _linear_coefficient(p["terms"], solve)
            if any(b is not None and b < 1 for b in p["bounds"]):
                raise ValueError("bounds must be positive")
        elif self.kind == "twisted":
            if p["base"].kind != "group_sum":
                raise ValueError("twisted needs a group_sum base")
            p["base"].validate()
        elif self.kind == "random_fiber_algebraic":
            if len(p["sizes"]) < 3 or any(n < 1 for n in p["sizes"]):
                raise ValueError("random relations need arity >= 3 and positive sizes")
            if p["d"] < 1 or not 0 <= p["density"] <= 1:
                raise ValueError("need d >= 1 and 0 <= density <= 1")

    def predicted_tuples(self) -> int:
        """Number of tuples generation will materialize or enumerate, as
        far as it is known up front."""
        p = self.params
        if self.kind == "group_sum":
            order = math.prod(p["factors"])
            return order ** (p["arity"] - 1)
        if self.kind == "twisted":
            return p["base"].predicted_tuples()
        if self.kind == "random_fiber_algebraic":
            return math.ceil(p["density"] * math.prod(p["sizes"]))
        return 0     # polynomial kinds are guarded while they enumerate


def _check_terms(terms) -> int:
    if not terms:
        raise ValueError("polynomial needs at least one term")
    widths = {len(e) for _, e in terms}
    if len(widths) != 1 or min(widths) < 2:
        raise ValueError("every term needs one exponent per variable (at least 2)")
    for c, e in terms:
        if int(c) != c or any(int(x) != x or x < 0 for x in e):
            raise ValueError(f"bad term {[c, e]}")
    return widths.pop()


def _linear_coefficient(terms, k: int) -> int:
    hits = [(c, e) for c, e in terms if e[k] > 0]
    if len(hits) != 1 or hits[0][1][k] != 1 or sum(hits[0][1]) != 1 or hits[0][0] not in (1, -1):
        raise ValueError(f"polynomial must contain coordinate {k} only as a term +-x_{k}")
    return hits[0][0]


# --- spec files --------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, list):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def _parse_token(tok: str):
    if tok == "null":
        return None
    if tok == "n":
        return "n"
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def dumps_spec(spec: RelationSpec) -> str:
    def lines(sp: RelationSpec, prefix: str):
        out = [f"{prefix}kind {sp.kind}"]
        for key in sorted(sp.params):
            v = sp.params[key]
            if isinstance(v, RelationSpec):
                out += lines(v, prefix + key + ".")
            elif key == "terms":
                out += [f"{prefix}term {c} {_fmt(list(e))}" for c, e in v]
            else:
                out.append(f"{prefix}{key} {_fmt(v)}".rstrip())
        return out
    return "\n".join([SPEC_HEADER] + lines(spec, "")) + "\n"


_LIST_KEYS = {"factors", "bounds", "sizes"}


def loads_spec(text: str) -> RelationSpec:
    """Parse the ``#spec v1`` key-value format; inverse of :func:`dumps_spec`."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != SPEC_HEADER:
        raise RelationFormatError(f"expected header {SPEC_HEADER!r}", 1)
    tree: dict = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        *path, leaf = key.split(".")
        node = tree
        for part in path:
            node = node.setdefault(part, {})
        if leaf == "kind":
            if len(vals) != 1 or vals[0] not in KINDS:
                raise RelationFormatError(f"unknown kind {' '.join(vals)!r}", lineno)
            node["kind"] = vals[0]
            continue
        try:
            toks = [_parse_token(v) for v in vals]
        except ValueError:
            raise RelationFormatError(f"cannot parse {line!r}", lineno) from None
        if leaf == "term":
            if len(toks) < 3:
                raise RelationFormatError("term needs a coefficient and exponents", lineno)
            node.setdefault("terms", []).append([toks[0], toks[1:]])
        elif leaf in _LIST_KEYS:
            node[leaf] = toks
        else:
            if len(toks) != 1:
                raise RelationFormatError(f"{leaf} takes one value", lineno)
            node[leaf] = toks[0]

    def build(node):
        kind = node.pop("kind", None)
        if kind not in KINDS:
            raise RelationFormatError("missing kind line")
        params = {k: build(v) if isinstance(v, dict) else v for k, v in node.items()}
        if kind == "polynomial_box":
            params.setdefault("solve", None)
        if kind == "twisted":
            params.setdefault("location", None)
        return RelationSpec(kind, params)

    return build(tree)


# --- generation --------------------------------------------------------------

def _group_sum(factors, arity: int) -> FiniteRelation:
    g = abelian_group(factors)
    n = g.order
    mesh = np.indices((n,) * (arity - 1)).reshape(arity - 1, -1).T
    acc = np.full(len(mesh), g.identity, dtype=np.int64)
    for i in range(arity - 1):
        acc = g.table[acc, mesh[:, i]]
    return FiniteRelation((n,) * arity, np.column_stack([mesh, g.negation[acc]]))


def _evaluate(terms, cols: Sequence[np.ndarray], modulus: int | None = None) -> np.ndarray:
    """Evaluate the polynomial on columns of equal length.

    Works in int64 when every term provably fits, else falls back to Python
    integers.
    """
    size = len(cols[0])
    if modulus is not None:
        total = np.zeros(size, dtype=np.int64)
        for c, e in terms:
            t = np.full(size, c % modulus, dtype=np.int64)
            for x, k in zip(cols, e):
                if k:
                    t = t * _powmod(x, k, modulus) % modulus
            total = (total + t) % modulus
        return total
    peak = [int(np.abs(x).max(initial=0)) for x in cols]
    bound = sum(abs(c) * math.prod(m ** k for m, k in zip(peak, e)) for c, e in terms)
    dtype = np.int64 if bound < 2 ** 62 else object
    total = np.zeros(size, dtype=dtype)
    for c, e in terms:
        t = np.full(size, c, dtype=dtype)
        for x, k in zip(cols, e):
            if k:
                t = t * x.astype(dtype) ** k
        total = total + t
    return total


def _powmod(x: np.ndarray, k: int, m: int) -> np.ndarray:
    out = np.ones_like(x)
    base = x % m
    while k:
        if k & 1:
            out = out * base % m
        base = base * base % m
        k >>= 1
    return out


def _polynomial_mod(terms, p: int, max_tuples: int) -> FiniteRelation:
    s = len(terms[0][1])
    if p ** s > 50 * max_tuples:
        raise ResourceLimitError(f"enumerating {p}^{s} points exceeds the ceiling")
    chunks = []
    head = np.indices((p,) * (s - 1)).reshape(s - 1, -1).T
    found = 0
    for last in range(p):
        cols = [head[:, i] for i in range(s - 1)] + [np.full(len(head), last)]
        hit = _evaluate(terms, cols, p) == 0
        found += int(hit.sum())
        if found > max_tuples:
            raise ResourceLimitError(f"relation exceeds {max_tuples} tuples")
        chunks.append(np.column_stack(cols)[hit])
    return FiniteRelation((p,) * s, np.concatenate(chunks))


def _polynomial_box(terms, bounds, solve, max_tuples: int) -> FiniteRelation:
    s = len(bounds)
    free = [k for k, b in enumerate(bounds) if b is None]
    if solve is None and free:
        solve = free[0]
    enum = [k for k in range(s) if k != solve]
    if solve is None:
        if math.prod(bounds) > 50 * max_tuples:
            raise ResourceLimitError("box too large to enumerate")
        pts = np.indices(bounds).reshape(s, -1).T
        val = _evaluate(terms, [pts[:, k].astype(np.int64) for k in range(s)])
        return FiniteRelation(bounds, pts[val == 0])
    coef = _linear_coefficient(terms, solve)
    rest = [[c, e] for c, e in terms if e[solve] == 0]
    # c * x_solve + rest == 0  =>  x_solve = -rest / c
    inner = np.indices([bounds[k] for k in enum[1:]]).reshape(len(enum) - 1, -1).T
    chunks, found = [], 0
    for v in range(bounds[enum[0]]):
        cols = {enum[0]: np.full(len(inner), v, dtype=np.int64)}
        cols.update({k: inner[:, j].astype(np.int64) for j, k in enumerate(enum[1:])})
        cols[solve] = np.zeros(len(inner), dtype=np.int64)
        val = _evaluate(rest, [cols[k] for k in range(s)]).astype(np.int64) if rest else \
            np.zeros(len(inner), dtype=np.int64)
        x = -val * coef
        ok = x >= 0
        if bounds[solve] is not None:
            ok &= x < bounds[solve]
        elif (x < 0).any():
            raise ValueError("output coordinate takes negative values; shift the polynomial")
        cols[solve] = x
        block = np.column_stack([cols[k] for k in range(s)])[ok]
        found += len(block)
        if found > max_tuples:
            raise ResourceLimitError(f"relation exceeds {max_tuples} tuples")
        chunks.append(block)
    pts = np.concatenate(chunks)
    sizes = list(bounds)
    if bounds[solve] is None:
        sizes[solve] = int(pts[:, solve].max()) + 1 if len(pts) else 1
    return FiniteRelation(sizes, pts)


def _twisted(base: RelationSpec, seed: int, location, max_tuples: int) -> FiniteRelation:
    g = abelian_group(base.params["factors"])
    s = base.params["arity"]
    n = g.order
    m = g.table.copy()
    # intercalates: rows r<r', columns c<c' with m[r,c]=m[r',c'] and m[r,c']=m[r',c]
    r, rp, c, cp = np.nonzero(
        (m[:, None, :, None] == m[None, :, None, :]) & (m[:, None, None, :] == m[None, :, :, None])
        & (np.arange(n)[:, None, None, None] < np.arange(n)[None, :, None, None])
        & (np.arange(n)[None, None, :, None] < np.arange(n)[None, None, None, :]))
    rng = np.random.default_rng(seed)
    if len(r):
        k = int(location) % len(r) if location is not None else int(rng.integers(len(r)))
        a, b = m[r[k], c[k]], m[r[k], cp[k]]
        m[r[k], c[k]] = m[rp[k], cp[k]] = b
        m[r[k], cp[k]] = m[rp[k], c[k]] = a
    else:
        warnings.warn(f"no intercalate in a group of order {n}; the swap breaks the "
                      "Latin property", TwistWarning, stacklevel=3)
        k = int(location) % (n * n) if location is not None else int(rng.integers(n * n))
        i, j = divmod(k, n)
        i2, j2 = (i + 1) % n, (j + 1) % n
        m[i, j], m[i2, j2] = m[i2, j2], m[i, j]
        m[i, j2], m[i2, j] = m[i2, j], m[i, j2]
        if n > 1:
            m[i, j] = m[i, j2]        # two equal entries in one row
    if n ** (s - 1) > max_tuples:
        raise ResourceLimitError(f"relation exceeds {max_tuples} tuples")
    # M(x1, x2) + x3 + ... + xs == 0, the first two coordinates combined by the twisted table
    mesh = np.indices((n,) * (s - 1)).reshape(s - 1, -1).T
    acc = m[mesh[:, 0], mesh[:, 1]]
    for i in range(2, s - 1):
        acc = g.table[acc, mesh[:, i]]
    return FiniteRelation((n,) * s, np.column_stack([mesh, g.negation[acc]]))


def _random_fiber_algebraic(sizes, d: int, density: float, seed: int) -> FiniteRelation:
    sizes = tuple(sizes)
    total = math.prod(sizes)
    rng = np.random.default_rng(seed)
    k = int(round(density * total))
    codes = rng.permutation(total)[:k]
    cand = np.stack(np.unravel_index(codes, sizes), axis=1)
    s = len(sizes)
    counts = [dict() for _ in range(s)]
    keep = []
    for t in cand.tolist():
        keys = [tuple(t[:i] + t[i + 1:]) for i in range(s)]
        if all(counts[i].get(keys[i], 0) < d for i in range(s)):
            for i in range(s):
                counts[i][keys[i]] = counts[i].get(keys[i], 0) + 1
            keep.append(t)
    return FiniteRelation(sizes, keep)


def generate(spec: RelationSpec, max_tuples: int | None = None) -> FiniteRelation:
    """Build the relation described by ``spec`` (deterministic, seeds included)."""
    spec.validate()
    limit = max_tuples_default() if max_tuples is None else max_tuples
    if spec.predicted_tuples() > limit:
        raise ResourceLimitError(f"spec {spec.spec_id} predicts {spec.predicted_tuples()} "
                                 f"tuples, above the ceiling of {limit}")
    p = spec.params
    if spec.kind == "group_sum":
        return _group_sum(p["factors"], p["arity"])
    if spec.kind == "polynomial_mod":
        return _polynomial_mod(p["terms"], p["modulus"], limit)
    if spec.kind == "polynomial_box":
        return _polynomial_box(p["terms"], p["bounds"], p.get("solve"), limit)
    if spec.kind == "twisted":
        return _twisted(p["base"], p["seed"], p.get("location"), limit)
    return _random_fiber_algebraic(p["sizes"], p["d"], p["density"], p["seed"])


# --- grids -------------------------------------------------------------------

def sample_grid(kind: str, q: FiniteRelation, n: int, seed: int = 0) -> Grid:
    """An n-grid inside the box of ``q``; part ``i`` has ``min(n, n_i)`` elements.

    ``arithmetic`` takes ``{0, step, 2 step, ...}`` with ``step = n_i // k``;
    ``geometric_box`` takes ``floor(geomspace(1, n_i, k)) - 1`` topped up with
    the smallest unused indexes; ``random`` draws without replacement.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind not in GRID_KINDS:
        raise ValueError(f"unknown grid kind {kind!r}; expected one of {GRID_KINDS}")
    rng = np.random.default_rng(seed)
    parts = []
    for size in q.sizes:
        k = min(n, size)
        if kind == "full":
            part = np.arange(k)
        elif kind == "arithmetic":
            part = np.arange(k) * (size // k)
        elif kind == "geometric_box":
            part = np.unique(np.floor(np.geomspace(1, size, k)).astype(np.int64) - 1)
            if len(part) < k:
                unused = np.setdiff1d(np.arange(size), part)[:k - len(part)]
                part = np.union1d(part, unused)
        else:
            part = np.sort(rng.choice(size, size=k, replace=False))
        parts.append(part.tolist())
    return Grid(parts)


# --- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    spec_id: str
    n: int
    grid_kind: str
    seed: int
    count: int
    micros: int = 0


def sweep(spec: RelationSpec, ns: Iterable[int], grid_kind: str = "full", trials: int = 1,
          seed: int = 0, max_tuples: int | None = None, timing: bool = True) -> list:
    """Count ``spec.at(n)`` on sampled n-grids for each ``n`` and trial.

    Trial ``t`` uses grid seed ``seed + t``. With ``timing=False`` the
    ``micros`` column is zero, which makes the output byte-reproducible.
    """
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n values must be strictly increasing")
    if trials < 1:
        raise ValueError("trials must be positive")
    rows = []
    sid = spec.spec_id
    for n in ns:
        q = generate(spec.at(n), max_tuples)
        for t in range(trials):
            start = time.perf_counter()
            count = count_on_grid(q, sample_grid(grid_kind, q, n, seed + t))
            micros = int((time.perf_counter() - start) * 1e6) if timing else 0
            rows.append(SweepRow(sid, n, grid_kind, seed + t, count, micros))
    return rows


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.spec_id, r.n, r.grid_kind, r.seed, r.count, r.micros])
    return out.getvalue()


def rows_from_csv(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise RelationFormatError(f"CSV columns must be {','.join(CSV_COLUMNS)}", 1)
    rows = []
    for lineno, r in enumerate(reader, start=2):
        try:
            rows.append(SweepRow(r["spec_id"], int(r["n"]), r["grid_kind"], int(r["seed"]),
                                 int(r["count"]), int(r["micros"])))
        except (TypeError, ValueError):
            raise RelationFormatError(f"bad row {r}", lineno) from None
    return rows


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    residual: float      # root mean square of the log residuals
    points: int
    dropped: int = 0

    def to_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual,
                "points": self.points, "dropped": self.dropped}


def fit_exponent(rows: Sequence[SweepRow]) -> Fit:
    """Least-squares line through ``(log n, log count)``; zero counts are dropped."""
    usable = [r for r in rows if r.count > 0]
    dropped = len(rows) - len(usable)
    if dropped:
        warnings.warn(f"{dropped} row(s) with zero count excluded from the fit",
                      ZeroCountWarning, stacklevel=2)
    if len({r.n for r in usable}) < 3:
        raise ValueError("need at least 3 distinct n with positive counts")
    x = np.log([r.n for r in usable])
    y = np.log([r.count for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    return Fit(float(slope), float(intercept), float(np.sqrt(np.mean(res ** 2))),
               len(usable), dropped)


# --- non-group Latin squares -------------------------------------------------

def latin_squares(order: int, seed: int = 0):
    """All Latin squares of ``order`` by backtracking, symbols tried in a
    seeded random order per cell."""
    rng = np.random.default_rng(seed)
    perms = [rng.permutation(order).tolist() for _ in range(order * order)]
    sq = [[-1] * order for _ in range(order)]
    rows = [set() for _ in range(order)]
    cols = [set() for _ in range(order)]

    def fill(cell):
        if cell == order * order:
            yield [row[:] for row in sq]
            return
        i, j = divmod(cell, order)
        for v in perms[cell]:
            if v not in rows[i] and v not in cols[j]:
                sq[i][j] = v
                rows[i].add(v)
                cols[j].add(v)
                yield from fill(cell + 1)
                rows[i].discard(v)
                cols[j].discard(v)
        sq[i][j] = -1

    yield from fill(0)


def quadrangle_violation(square) -> tuple | None:
    """First violation of the quadrangle criterion, or ``None``.

    A violation is ``(a1, a2, b1, b2, c1, c2, d1, d2)`` with
    ``L[a1][b1] = L[c1][d1]``, ``L[a1][b2] = L[c1][d2]``, ``L[a2][b1] = L[c2][d1]``
    but ``L[a2][b2] != L[c2][d2]``. A Latin square is isotopic to a group
    table exactly when there is none.
    """
    L = np.asarray(square)
    n = len(L)
    for a1, a2, b1, b2, c1, d1 in itertools.product(range(n), repeat=6):
        if L[a1, b1] != L[c1, d1]:
            continue
        d2 = int(np.nonzero(L[c1] == L[a1, b2])[0][0])
        c2 = int(np.nonzero(L[:, d1] == L[a2, b1])[0][0])
        if L[a2, b2] != L[c2, d2]:
            return (a1, a2, b1, b2, c1, c2, d1, d2)
    return None


def square_relation(square) -> FiniteRelation:
    """The ternary relation ``{(r, c, L[r][c])}``."""
    L = np.asarray(square)
    n = len(L)
    r, c = np.indices((n, n))
    return FiniteRelation((n, n, n), np.column_stack([r.ravel(), c.ravel(), L.ravel()]))


def find_non_group_latin_square(order: int = 5, seed: int = 0):
    """First Latin square in the seeded search order that is not isotopic to a group."""
    for sq in latin_squares(order, seed):
        if quadrangle_violation(sq) is not None:
            return sq
    return None
