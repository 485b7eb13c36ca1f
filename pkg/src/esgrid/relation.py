"""Finite s-ary relations on index domains.

A relation lives on the box {0..n_1-1} x ... x {0..n_s-1}. Tuples are kept as
a lexicographically sorted, duplicate-free ``(N, s)`` integer array together
with their row-major mixed-radix codes, so that lexicographic order and code
order coincide and membership is a binary search.

For every coordinate ``i`` a :class:`FiberIndex` maps each (s-1)-tuple of the
other coordinates (encoded the same way) to the sorted values that complete it.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from esgrid.errors import RelationFormatError

HEADER = "#relation v1"
GRID_HEADER = "#grid v1"

_MAX_BOX = 2**62


class DuplicateTupleWarning(UserWarning):
    pass


def strides(sizes: Sequence[int]) -> np.ndarray:
    """Row-major strides: the code of ``t`` is ``sum(t[k] * strides[k])``."""
    out = np.ones(len(sizes), dtype=np.int64)
    for k in range(len(sizes) - 2, -1, -1):
        out[k] = out[k + 1] * sizes[k + 1]
    return out


def decode(codes, sizes: Sequence[int]) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.shape[0], len(sizes)), dtype=np.int64)
    rem = codes.copy()
    for k in range(len(sizes) - 1, -1, -1):
        out[:, k] = rem % sizes[k]
        rem //= sizes[k]
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FiberIndex:
    """Completions at one coordinate, keyed by the code of the other coordinates.

    ``values[offsets[k]:offsets[k + 1]]`` are the sorted completions of the
    prefix whose code is ``keys[k]``.
    """

    coordinate: int
    other_sizes: tuple
    keys: np.ndarray
    offsets: np.ndarray
    values: np.ndarray

    def key_code(self, rest: Sequence[int]) -> int:
        return int(np.dot(np.asarray(rest, dtype=np.int64), strides(self.other_sizes)))

    def lookup(self, rest: Sequence[int]) -> np.ndarray:
        """Sorted completions of ``rest`` (the other coordinates, in order)."""
        code = self.key_code(rest)
        k = int(np.searchsorted(self.keys, code))
        if k < len(self.keys) and self.keys[k] == code:
            return self.values[self.offsets[k]:self.offsets[k + 1]]
        return self.values[:0]

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def equals(self, other: "FiberIndex") -> bool:
        return (self.coordinate == other.coordinate
                and self.other_sizes == other.other_sizes
                and np.array_equal(self.keys, other.keys)
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.values, other.values))


def build_fiber_index(tuples: np.ndarray, sizes: Sequence[int], i: int) -> FiberIndex:
    others = [j for j in range(len(sizes)) if j != i]
    other_sizes = tuple(sizes[j] for j in others)
    keycodes = tuples[:, others] @ strides(other_sizes) if len(tuples) else np.zeros(0, np.int64)
    order = np.lexsort((tuples[:, i], keycodes))
    k = keycodes[order]
    v = tuples[order, i]
    keys, starts = np.unique(k, return_index=True)
    offsets = np.append(starts, len(k)).astype(np.int64)
    return FiberIndex(i, other_sizes, _frozen(keys.astype(np.int64)),
                      _frozen(offsets), _frozen(v.astype(np.int64)))


class FiniteRelation:
    """An s-ary relation on index boxes, immutable after construction.

    Duplicate tuples are dropped with a :class:`DuplicateTupleWarning`.
    ``labels`` optionally maps a coordinate to one display name per index.
    """

    def __init__(self, sizes: Sequence[int], tuples=(), labels: dict | None = None):
        sizes = tuple(int(n) for n in sizes)
        if len(sizes) < 2:
            raise ValueError(f"arity must be at least 2, got {len(sizes)}")
        if any(n <= 0 for n in sizes):
            raise ValueError(f"sizes must be positive, got {sizes}")
        if math.prod(sizes) >= _MAX_BOX:
            raise ValueError("box too large to encode")
        if not isinstance(tuples, np.ndarray):
            tuples = list(tuples)
        arr = np.asarray(tuples, dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, len(sizes)), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != len(sizes):
            raise ValueError(f"tuples must have {len(sizes)} components")
        bad = (arr < 0) | (arr >= np.asarray(sizes))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ValueError(f"component {c} of tuple {tuple(arr[r].tolist())} "
                             f"out of range 0..{sizes[c] - 1}")
        codes = arr @ strides(sizes)
        ucodes = np.unique(codes)
        if len(ucodes) != len(codes):
            warnings.warn(f"{len(codes) - len(ucodes)} duplicate tuple(s) removed",
                          DuplicateTupleWarning, stacklevel=2)
        self.sizes = sizes
        self.arity = len(sizes)
        self.codes = _frozen(ucodes.astype(np.int64))
        self.tuples = _frozen(decode(ucodes, sizes))
        self.labels = {int(k): tuple(v) for k, v in (labels or {}).items()}
        for k, names in self.labels.items():
            if not 0 <= k < self.arity or len(names) != sizes[k]:
                raise ValueError(f"labels for coordinate {k} must list {sizes[k] if 0 <= k < self.arity else '?'} names")
        self.fiber_index = tuple(build_fiber_index(self.tuples, sizes, i)
                                 for i in range(self.arity))

    def __len__(self):
        return len(self.codes)

    def __eq__(self, other):
        if not isinstance(other, FiniteRelation):
            return NotImplemented
        return (self.sizes == other.sizes and np.array_equal(self.codes, other.codes)
                and self.labels == other.labels)

    def __hash__(self):
        return hash((self.sizes, self.codes.tobytes()))

    def __repr__(self):
        return f"FiniteRelation(sizes={self.sizes}, {len(self)} tuples)"

    def __contains__(self, t) -> bool:
        t = tuple(int(v) for v in t)
        if len(t) != self.arity or any(not 0 <= v < n for v, n in zip(t, self.sizes)):
            return False
        return bool(self.contains(np.asarray([t]))[0])

    def encode(self, tuples) -> np.ndarray:
        return np.asarray(tuples, dtype=np.int64).reshape(-1, self.arity) @ strides(self.sizes)

    def contains_codes(self, codes) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        if len(self.codes) == 0:
            return np.zeros(codes.shape, dtype=bool)
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, len(self.codes) - 1)
        return self.codes[pos] == codes

    def contains(self, tuples) -> np.ndarray:
        """Vectorized membership for an ``(M, s)`` array of in-box tuples."""
        return self.contains_codes(self.encode(tuples))

    def completions(self, i: int, rest: Sequence[int]) -> np.ndarray:
        return self.fiber_index[i].lookup(rest)

    def box_size(self) -> int:
        return math.prod(self.sizes)

    def to_text(self) -> str:
        return dumps(self)


# --- file format -------------------------------------------------------------

def dumps(q: FiniteRelation) -> str:
    """Canonical text form: sorted tuples, no comments, single spaces."""
    out = io.StringIO()
    out.write(HEADER + "\n")
    out.write(f"arity {q.arity}\n")
    out.write("sizes " + " ".join(map(str, q.sizes)) + "\n")
    for k in sorted(q.labels):
        out.write(f"labels {k} " + " ".join(q.labels[k]) + "\n")
    out.write("tuples\n")
    for row in q.tuples.tolist():
        out.write(" ".join(map(str, row)) + "\n")
    return out.getvalue()


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _ints(fields, lineno, what):
    try:
        return [int(x) for x in fields]
    except ValueError:
        raise RelationFormatError(f"non-integer in {what}: {' '.join(fields)!r}", lineno) from None


def load_relation(source) -> FiniteRelation:
    """Parse the ``#relation v1`` text format from bytes, str or a file object."""
    lines = _read_text(source).splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise RelationFormatError(f"expected header {HEADER!r}", 1)
    arity = sizes = None
    labels = {}
    rows = []
    in_tuples = False
    seen = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        line = _strip(raw)
        if not line:
            continue
        fields = line.split()
        if in_tuples:
            vals = _ints(fields, lineno, "tuple")
            if len(vals) != arity:
                raise RelationFormatError(f"tuple has {len(vals)} components, expected {arity}", lineno)
            for c, (v, n) in enumerate(zip(vals, sizes)):
                if not 0 <= v < n:
                    raise RelationFormatError(
                        f"component {c} value {v} out of range 0..{n - 1}", lineno)
            t = tuple(vals)
            if t in seen:
                warnings.warn(f"line {lineno}: duplicate tuple {t} ignored",
                              DuplicateTupleWarning, stacklevel=2)
                continue
            seen.add(t)
            rows.append(vals)
            continue
        key = fields[0]
        if key == "arity":
            if len(fields) != 2:
                raise RelationFormatError("arity takes one value", lineno)
            (arity,) = _ints(fields[1:], lineno, "arity")
            if arity < 2:
                raise RelationFormatError(f"arity must be at least 2, got {arity}", lineno)
        elif key == "sizes":
            if arity is None:
                raise RelationFormatError("sizes before arity", lineno)
            sizes = _ints(fields[1:], lineno, "sizes")
            if len(sizes) != arity or any(n <= 0 for n in sizes):
                raise RelationFormatError(f"sizes must be {arity} positive integers", lineno)
        elif key == "labels":
            if sizes is None:
                raise RelationFormatError("labels before sizes", lineno)
            if len(fields) < 2:
                raise RelationFormatError("labels needs a coordinate", lineno)
            (k,) = _ints(fields[1:2], lineno, "labels")
            if not 0 <= k < arity or len(fields) - 2 != sizes[k]:
                raise RelationFormatError(f"labels for coordinate {k} must list one name per index", lineno)
            labels[k] = tuple(fields[2:])
        elif key == "tuples":
            if sizes is None:
                raise RelationFormatError("tuples before sizes", lineno)
            in_tuples = True
        else:
            raise RelationFormatError(f"unknown directive {key!r}", lineno)
    if not in_tuples:
        raise RelationFormatError("missing 'tuples' section", len(lines))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DuplicateTupleWarning)
        return FiniteRelation(sizes, rows, labels)


def read_relation(path) -> FiniteRelation:
    with open(path, "rb") as fh:
        return load_relation(fh)


# --- grids -------------------------------------------------------------------

class Grid:
    """A product A_1 x ... x A_s of index sets, each stored sorted and unique."""

    def __init__(self, parts: Iterable[Iterable[int]]):
        self.parts = tuple(_frozen(np.unique(np.asarray(list(p), dtype=np.int64)))
                           for p in parts)

    @classmethod
    def full(cls, sizes: Sequence[int]) -> "Grid":
        return cls([range(n) for n in sizes])

    @property
    def arity(self) -> int:
        return len(self.parts)

    def part_sizes(self) -> tuple:
        return tuple(len(p) for p in self.parts)

    def size(self) -> int:
        return math.prod(self.part_sizes())

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.arity == other.arity
                and all(np.array_equal(a, b) for a, b in zip(self.parts, other.parts)))

    def __repr__(self):
        return f"Grid(part sizes {self.part_sizes()})"

    def validate_for(self, q: FiniteRelation):
        if self.arity != q.arity:
            raise ValueError(f"grid arity {self.arity} != relation arity {q.arity}")
        for i, (p, n) in enumerate(zip(self.parts, q.sizes)):
            if len(p) and (p[0] < 0 or p[-1] >= n):
                raise ValueError(f"grid part {i} out of range 0..{n - 1}")

    def mask(self, i: int, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[self.parts[i]] = True
        return m


def dumps_grid(g: Grid) -> str:
    out = [GRID_HEADER, f"arity {g.arity}"]
    for i, p in enumerate(g.parts):
        out.append(" ".join([f"part {i}"] + [str(v) for v in p.tolist()]))
    return "\n".join(out) + "\n"


def load_grid(source) -> Grid:
    """Parse a grid file: header, ``arity s``, then ``part <i> <values...>`` lines."""
    lines = _read_text(source).splitlines()
    if not lines or lines[0].strip() != GRID_HEADER:
        raise RelationFormatError(f"expected header {GRID_HEADER!r}", 1)
    arity = None
    parts = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = _strip(raw)
        if not line:
            continue
        fields = line.split()
        if fields[0] == "arity":
            (arity,) = _ints(fields[1:2], lineno, "arity")
        elif fields[0] == "part":
            if arity is None:
                raise RelationFormatError("part before arity", lineno)
            vals = _ints(fields[1:], lineno, "part")
            if not vals or not 0 <= vals[0] < arity:
                raise RelationFormatError("part needs a coordinate in range", lineno)
            if vals[0] in parts:
                raise RelationFormatError(f"duplicate part {vals[0]}", lineno)
            if any(v < 0 for v in vals[1:]):
                raise RelationFormatError("negative index in part", lineno)
            parts[vals[0]] = vals[1:]
        else:
            raise RelationFormatError(f"unknown directive {fields[0]!r}", lineno)
    if arity is None or len(parts) != arity:
        raise RelationFormatError(f"grid needs one part line per coordinate", len(lines))
    return Grid(parts[i] for i in range(arity))


# --- degree and P1 -----------------------------------------------------------

def _check_coord(q: FiniteRelation, i: int):
    if not 0 <= i < q.arity:
        raise IndexError(f"coordinate {i} out of range for arity {q.arity}")


def fiber_degree(q: FiniteRelation, i: int) -> int:
    """Largest number of completions at coordinate ``i`` over all prefixes."""
    _check_coord(q, i)
    counts = q.fiber_index[i].counts()
    return int(counts.max()) if len(counts) else 0


def is_fiber_algebraic(q: FiniteRelation, d: int) -> bool:
    return all(fiber_degree(q, i) <= d for i in range(q.arity))


@dataclass(frozen=True)
class CoordinateP1:
    coordinate: int
    ok: bool
    prefix: tuple | None = None        # other coordinates, in coordinate order
    completions: int | None = None


@dataclass(frozen=True)
class P1Report:
    coordinates: tuple

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.coordinates)

    def to_dict(self):
        return {"ok": self.ok, "coordinates": [
            {"coordinate": c.coordinate, "ok": c.ok,
             "prefix": list(c.prefix) if c.prefix is not None else None,
             "completions": c.completions} for c in self.coordinates]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(CoordinateP1(c["coordinate"], c["ok"],
                                      tuple(c["prefix"]) if c["prefix"] is not None else None,
                                      c["completions"]) for c in d["coordinates"]))


def _check_p1_coord(q: FiniteRelation, i: int) -> CoordinateP1:
    fi = q.fiber_index[i]
    total = math.prod(fi.other_sizes)
    keys, counts = fi.keys, fi.counts()
    candidates = []
    gaps = np.nonzero(keys != np.arange(len(keys)))[0]
    if len(gaps):
        candidates.append((int(gaps[0]), 0))
    elif len(keys) < total:
        candidates.append((len(keys), 0))
    multi = np.nonzero(counts > 1)[0]
    if len(multi):
        candidates.append((int(keys[multi[0]]), int(counts[multi[0]])))
    if not candidates:
        return CoordinateP1(i, True)
    code, completions = min(candidates)
    prefix = tuple(decode([code], fi.other_sizes)[0].tolist())
    return CoordinateP1(i, False, prefix, completions)


def check_p1(q: FiniteRelation) -> P1Report:
    """Every prefix over the full boxes must have exactly one completion."""
    return P1Report(tuple(_check_p1_coord(q, i) for i in range(q.arity)))


# --- P2 ----------------------------------------------------------------------

@dataclass(frozen=True)
class P2Witness:
    """Q(x,y), Q(x,y'), Q(x',y) hold and Q(x',y') fails.

    ``x`` and ``x_prime`` hold the values at coordinates ``pair``; ``y`` and
    ``y_prime`` the values at the remaining coordinates in increasing order.
    """

    pair: tuple
    x: tuple
    x_prime: tuple
    y: tuple
    y_prime: tuple

    def place(self, arity: int, xbar, ybar) -> tuple:
        out = [0] * arity
        i, j = self.pair
        out[i], out[j] = xbar
        rest = [k for k in range(arity) if k not in self.pair]
        for k, v in zip(rest, ybar):
            out[k] = v
        return tuple(out)

    def replay(self, q: FiniteRelation) -> bool:
        s = q.arity
        return ((self.place(s, self.x, self.y) in q)
                and (self.place(s, self.x, self.y_prime) in q)
                and (self.place(s, self.x_prime, self.y) in q)
                and (self.place(s, self.x_prime, self.y_prime) not in q))

    def to_dict(self):
        return {"pair": list(self.pair), "x": list(self.x), "x_prime": list(self.x_prime),
                "y": list(self.y), "y_prime": list(self.y_prime)}

    @classmethod
    def from_dict(cls, d):
        return cls(*(tuple(d[k]) for k in ("pair", "x", "x_prime", "y", "y_prime")))


def _p2_witness(q, i, j, rest, p, r):
    """Slow path: lexicographically first witness in (y, y', x, x') order."""
    nj = q.sizes[j]
    order = np.lexsort((p, r))
    rs, ps = r[order], p[order]
    fib_codes, starts = np.unique(rs, return_index=True)
    bounds = np.append(starts, len(rs))
    fibers = [set(ps[bounds[k]:bounds[k + 1]].tolist()) for k in range(len(fib_codes))]
    by_point: dict = {}
    for k, f in enumerate(fibers):
        for pt in f:
            by_point.setdefault(pt, []).append(k)
    rest_sizes = [q.sizes[k] for k in rest]
    for a, fa in enumerate(fibers):
        partners = sorted({b for pt in fa for b in by_point[pt]} - {a})
        for b in partners:
            diff = fa - fibers[b]
            if diff:
                x = min(fa & fibers[b])
                xp = min(diff)
                y = decode([fib_codes[a]], rest_sizes)[0]
                yp = decode([fib_codes[b]], rest_sizes)[0]
                return P2Witness((i, j), divmod(x, nj), divmod(xp, nj),
                                 tuple(y.tolist()), tuple(yp.tolist()))
    raise AssertionError("fast path reported a P2 failure the slow path could not locate")


def check_p2(q: FiniteRelation, i: int, j: int) -> P2Witness | None:
    """Return ``None`` if P2 holds for the pair ``{i, j}``, else a witness.

    Fibers over the remaining coordinates are compared as sets: P2 holds iff
    any two fibers that share a point are equal.
    """
    _check_coord(q, i)
    _check_coord(q, j)
    if i == j:
        raise ValueError("P2 needs two distinct coordinates")
    if q.arity < 3:
        raise ValueError("P2 needs arity at least 3")
    i, j = min(i, j), max(i, j)
    if len(q) == 0:
        return None
    t = q.tuples
    rest = [k for k in range(q.arity) if k not in (i, j)]
    p = t[:, i] * q.sizes[j] + t[:, j]
    r = t[:, rest] @ strides([q.sizes[k] for k in rest])
    order = np.lexsort((p, r))
    rs, ps = r[order], p[order]
    fib_codes, starts = np.unique(rs, return_index=True)
    bounds = np.append(starts, len(rs))
    classes: dict = {}
    fiber_class = np.empty(len(fib_codes), dtype=np.int64)
    for k in range(len(fib_codes)):
        key = ps[bounds[k]:bounds[k + 1]].tobytes()
        fiber_class[k] = classes.setdefault(key, len(classes))
    cls_t = np.repeat(fiber_class, np.diff(bounds))
    o2 = np.lexsort((cls_t, ps))
    ps2, cs2 = ps[o2], cls_t[o2]
    clash = (ps2[1:] == ps2[:-1]) & (cs2[1:] != cs2[:-1])
    if not clash.any():
        return None
    return _p2_witness(q, i, j, rest, p, r)


@dataclass(frozen=True)
class P2Report:
    results: tuple          # ((i, j), witness-or-None) pairs

    @property
    def ok(self) -> bool:
        return all(w is None for _, w in self.results)

    @property
    def failing_pairs(self) -> list:
        return [pair for pair, w in self.results if w is not None]

    def first_witness(self) -> P2Witness | None:
        return next((w for _, w in self.results if w is not None), None)

    def to_dict(self):
        return {"ok": self.ok, "pairs": [
            {"pair": list(pair), "ok": w is None,
             "witness": w.to_dict() if w is not None else None}
            for pair, w in self.results]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple((tuple(e["pair"]), P2Witness.from_dict(e["witness"])
                          if e["witness"] is not None else None) for e in d["pairs"]))


def check_p2_all(q: FiniteRelation) -> P2Report:
    if q.arity < 3:
        raise ValueError("P2 needs arity at least 3")
    return P2Report(tuple(((i, j), check_p2(q, i, j))
                          for i, j in combinations(range(q.arity), 2)))


# --- transforms --------------------------------------------------------------

def star_transform(q: FiniteRelation) -> FiniteRelation:
    """Q* = {(x2, x2', x3, x3') : some x1 has Q(x1,x2,x3) and Q(x1,x2',x3')}."""
    if q.arity != 3:
        raise ValueError(f"star transform needs arity 3, got {q.arity}")
    n1, n2, n3 = q.sizes
    t = q.tuples
    chunks = []
    if len(t):
        _, starts = np.unique(t[:, 0], return_index=True)
        bounds = np.append(starts, len(t))
        for a, b in zip(bounds[:-1], bounds[1:]):
            block = t[a:b, 1:]
            k = b - a
            left = np.repeat(block, k, axis=0)
            right = np.tile(block, (k, 1))
            chunks.append(np.column_stack([left[:, 0], right[:, 0], left[:, 1], right[:, 1]]))
    rows = np.concatenate(chunks) if chunks else np.zeros((0, 4), dtype=np.int64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DuplicateTupleWarning)
        return FiniteRelation((n2, n2, n3, n3), rows)


def grid_mask(q: FiniteRelation, grid: Grid) -> np.ndarray:
    """Boolean mask over ``q.tuples`` of the tuples lying in ``grid``."""
    mask = np.ones(len(q), dtype=bool)
    for i in range(q.arity):
        mask &= grid.mask(i, q.sizes[i])[q.tuples[:, i]]
    return mask


def count_on_grid(q: FiniteRelation, grid: Grid, method: str | None = None) -> int:
    """Exact ``|Q ∩ A_1 x ... x A_s|``.

    ``method`` is ``"tuples"`` (scan Q's tuples) or ``"grid"`` (walk the grid
    prefixes through the last coordinate's fiber index); by default the
    smaller side is walked.
    """
    grid.validate_for(q)
    if grid.size() == 0 or len(q) == 0:
        return 0
    if method is None:
        method = "tuples" if len(q) < grid.size() else "grid"
    if method == "tuples":
        return int(grid_mask(q, grid).sum())
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")
    last = q.arity - 1
    fi = q.fiber_index[last]
    mesh = np.meshgrid(*grid.parts[:last], indexing="ij")
    prefix = np.stack([m.ravel() for m in mesh], axis=1)
    codes = prefix @ strides(fi.other_sizes)
    pos = np.searchsorted(fi.keys, codes)
    pos_c = np.minimum(pos, max(len(fi.keys) - 1, 0))
    found = fi.keys[pos_c] == codes
    member = grid.mask(last, q.sizes[last])[fi.values]
    csum = np.concatenate([[0], np.cumsum(member)])
    k = pos_c[found]
    return int((csum[fi.offsets[k + 1]] - csum[fi.offsets[k]]).sum())


def permute_coordinates(q: FiniteRelation, sigma: Sequence[int]) -> FiniteRelation:
    """Coordinate ``k`` of the result is coordinate ``sigma[k]`` of ``q``."""
    sigma = [int(x) for x in sigma]
    if sorted(sigma) != list(range(q.arity)):
        raise ValueError(f"not a permutation of range({q.arity}): {sigma}")
    labels = {k: q.labels[src] for k, src in enumerate(sigma) if src in q.labels}
    return FiniteRelation([q.sizes[k] for k in sigma], q.tuples[:, sigma], labels)


def restrict(q: FiniteRelation, grid: Grid) -> FiniteRelation:
    grid.validate_for(q)
    return FiniteRelation(q.sizes, q.tuples[grid_mask(q, grid)], q.labels)


def relabel(q: FiniteRelation, i: int, beta: Sequence[int]) -> FiniteRelation:
    """Replace every value ``v`` at coordinate ``i`` by ``beta[v]``."""
    _check_coord(q, i)
    beta = np.asarray(beta, dtype=np.int64)
    if beta.shape != (q.sizes[i],) or not np.array_equal(np.sort(beta), np.arange(q.sizes[i])):
        raise ValueError(f"relabeling of coordinate {i} must be a bijection of range({q.sizes[i]})")
    t = q.tuples.copy()
    t[:, i] = beta[t[:, i]]
    labels = dict(q.labels)
    if i in labels:
        old = labels[i]
        new = [None] * len(old)
        for v, name in enumerate(old):
            new[beta[v]] = name
        labels[i] = tuple(new)
    return FiniteRelation(q.sizes, t, labels)
