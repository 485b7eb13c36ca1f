"""Abelian group reconstruction from Latin hypercubes satisfying P2.

For a relation ``Q`` of arity ``s >= 4`` with properties P1 and P2, the fibers
``Q(., ., b_3, ..., b_s)`` are graphs of bijections ``X_1 -> X_2``. For a
basepoint ``e`` in ``Q`` they form an abelian group under
``f + f' = f o f_0^{-1} o f'`` with ``f_0 = f_{e_1, e_2}``. Group elements are
identified with ``X_2`` through ``b -> f_{e_1, b}``, so element ``b`` is the
unique fiber bijection sending ``e_1`` to ``b``, and the identity is ``e_2``.

Arity 3 goes through the star transform, which has arity 4.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from esgrid.errors import ESGridError, NotLatinError, P1Error, P2Error, RelationFormatError
from esgrid.groups import GroupTable, invariant_factors
from esgrid.relation import (
    FiniteRelation,
    check_p1,
    check_p2_all,
    permute_coordinates,
    star_transform,
    strides,
)

HEADER = "#correspondence v1"


class TernaryClashError(ESGridError):
    """The induced first-coordinate map is not well defined."""

    def __init__(self, first, second):
        self.tuples = (tuple(first), tuple(second))
        super().__init__(f"tuples {self.tuples[0]} and {self.tuples[1]} force different "
                         "group values on the first coordinate; Q is not group-induced")


@dataclass(frozen=True)
class FiberBijection:
    mapping: tuple

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(int(v) for v in self.mapping))

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def __len__(self):
        return len(self.mapping)

    def is_bijection(self) -> bool:
        return sorted(self.mapping) == list(range(len(self.mapping)))

    def inverse(self) -> "FiberBijection":
        inv = [0] * len(self.mapping)
        for x, y in enumerate(self.mapping):
            inv[y] = x
        return FiberBijection(inv)

    def compose(self, other: "FiberBijection") -> "FiberBijection":
        """``self o other``."""
        return FiberBijection([self.mapping[y] for y in other.mapping])


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    counterexample: tuple | None = None
    reason: str | None = None

    def __bool__(self):
        return self.ok


@dataclass
class Correspondence:
    """A group and coordinate maps with ``Q(a) <=> sum_i maps[i][a_i] == 0``."""

    group: GroupTable
    maps: list
    basepoint: tuple
    verified: bool = False
    invariant_factors: list = field(default_factory=list)

    def __post_init__(self):
        self.maps = [np.asarray(m, dtype=np.int64) for m in self.maps]
        self.basepoint = tuple(int(v) for v in self.basepoint)

    def total(self, tuples) -> np.ndarray:
        """Group sum of the mapped coordinates for each row of ``tuples``."""
        t = np.asarray(tuples, dtype=np.int64).reshape(-1, len(self.maps))
        acc = self.maps[0][t[:, 0]]
        for i in range(1, len(self.maps)):
            acc = self.group.table[acc, self.maps[i][t[:, i]]]
        return acc

    def to_dict(self):
        return {
            "schema": HEADER.lstrip("#"),
            "order": self.group.order,
            "identity": self.group.identity,
            "invariant_factors": list(self.invariant_factors),
            "table": self.group.table.tolist(),
            "maps": [m.tolist() for m in self.maps],
            "basepoint": list(self.basepoint),
            "verified": self.verified,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != HEADER.lstrip("#"):
            raise RelationFormatError(f"unexpected schema {d.get('schema')!r}")
        return cls(GroupTable(d["table"], d["identity"]), d["maps"], d["basepoint"],
                   d["verified"], list(d["invariant_factors"]))

    def dumps(self) -> str:
        lines = [HEADER, f"order {self.group.order}", f"identity {self.group.identity}",
                 "invariant_factors " + " ".join(map(str, self.invariant_factors)),
                 "basepoint " + " ".join(map(str, self.basepoint)),
                 f"verified {'true' if self.verified else 'false'}"]
        lines += ["row " + " ".join(map(str, r)) for r in self.group.table.tolist()]
        lines += [f"map {i} " + " ".join(map(str, m.tolist())) for i, m in enumerate(self.maps)]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def loads_correspondence(text: str) -> Correspondence:
    """Read either the ``#correspondence v1`` text form or its JSON form."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return Correspondence.from_dict(json.loads(stripped))
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise RelationFormatError(f"expected header {HEADER!r}", 1)
    d = {"schema": HEADER.lstrip("#"), "table": [], "maps": {}}
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.split()
        if not fields:
            continue
        key, vals = fields[0], fields[1:]
        try:
            if key in ("order", "identity"):
                d[key] = int(vals[0])
            elif key in ("invariant_factors", "basepoint"):
                d[key] = [int(v) for v in vals]
            elif key == "verified":
                d[key] = vals[0] == "true"
            elif key == "row":
                d["table"].append([int(v) for v in vals])
            elif key == "map":
                d["maps"][int(vals[0])] = [int(v) for v in vals[1:]]
            else:
                raise RelationFormatError(f"unknown key {key!r}", lineno)
        except (ValueError, IndexError):
            raise RelationFormatError(f"cannot parse {raw!r}", lineno) from None
    d["maps"] = [d["maps"][i] for i in sorted(d["maps"])]
    return Correspondence.from_dict(d)


# --- fiber bijections --------------------------------------------------------

def _dense_completion(q: FiniteRelation, i: int) -> np.ndarray:
    """The unique completion at ``i`` as an array over the other coordinates.

    Only valid when P1 holds at ``i``.
    """
    fi = q.fiber_index[i]
    return fi.values.reshape(fi.other_sizes)


def canonical_function(q: FiniteRelation, a1: int, a2: int) -> FiberBijection:
    """The fiber bijection ``f_{a1,a2}``: the fiber through some ``(a1, a2, b)``."""
    if q.arity < 4:
        raise ValueError("canonical functions need arity at least 4")
    st = strides(q.sizes)
    lo = a1 * st[0] + a2 * st[1]
    k = int(np.searchsorted(q.codes, lo))
    if k >= len(q) or q.codes[k] >= lo + st[1]:
        raise NotLatinError(f"not a Latin hypercube: no tuple starts with ({a1}, {a2})")
    b = q.tuples[k, 2:].tolist()
    mapping = []
    for x in range(q.sizes[0]):
        vals = q.completions(1, [x] + b)
        if len(vals) != 1:
            raise NotLatinError(f"not a Latin hypercube: prefix {tuple([x] + b)} "
                                f"has {len(vals)} completions at coordinate 1")
        mapping.append(int(vals[0]))
    f = FiberBijection(mapping)
    if not f.is_bijection():
        raise NotLatinError(f"not a Latin hypercube: fiber at {tuple(b)} is not a bijection")
    return f


def perp(q: FiniteRelation, f: FiberBijection, anchor: tuple, dual: bool = False) -> FiberBijection:
    """The bijection ``g: X_3 -> X_4`` paired with ``f: X_1 -> X_2``.

    With ``anchor = (a1, c3)`` the value ``g(c3)`` is the completion of
    ``(a1, f(a1), c3)``; ``g`` is then read off a fiber through
    ``(c3, g(c3))``. With ``dual=True`` the roles of the two coordinate pairs
    are swapped: ``f: X_3 -> X_4``, ``anchor = (c3, a1)``, result ``X_1 -> X_2``.
    """
    if q.arity != 4:
        raise ValueError("perp needs arity 4")
    if dual:
        return perp(permute_coordinates(q, [2, 3, 0, 1]), f, anchor)
    a1, c3 = anchor
    vals = q.completions(3, [a1, f(a1), c3])
    if len(vals) != 1:
        raise NotLatinError(f"prefix {(a1, f(a1), c3)} has {len(vals)} completions")
    d3 = int(vals[0])
    # any (x1, x2) fiber through (c3, d3) will do
    sel = np.nonzero((q.tuples[:, 2] == c3) & (q.tuples[:, 3] == d3))[0]
    x1, x2 = q.tuples[sel[0], :2].tolist()
    mapping = []
    for u in range(q.sizes[2]):
        v = q.completions(3, [x1, x2, u])
        if len(v) != 1:
            raise NotLatinError(f"prefix {(x1, x2, u)} has {len(v)} completions")
        mapping.append(int(v[0]))
    return FiberBijection(mapping)


# --- reconstruction ----------------------------------------------------------

def _require_p1_p2(q: FiniteRelation):
    p1 = check_p1(q)
    if not p1.ok:
        raise P1Error(p1)
    p2 = check_p2_all(q)
    if not p2.ok:
        raise P2Error(p2.first_witness(), f"P2 fails for pair {p2.failing_pairs[0]}")


def reconstruct_group(q: FiniteRelation, basepoint: Sequence[int] | None = None,
                      verify: bool = True) -> Correspondence:
    """Build the group of fiber bijections and maps with ``Q <=> sum = 0``.

    P1 and P2 are re-checked first. The default basepoint is the
    lexicographically smallest tuple of ``q``.
    """
    if q.arity < 4:
        raise ValueError("reconstruct_group needs arity >= 4; use the star pipeline "
                         "(reconstruct_ternary) for s=3")
    _require_p1_p2(q)
    if basepoint is None:
        e = tuple(q.tuples[0].tolist())
    else:
        e = tuple(int(v) for v in basepoint)
        if len(e) != q.arity or e not in q:
            raise ValueError(f"basepoint {e} is not a tuple of the relation")
    s = q.arity
    n1, n2 = q.sizes[0], q.sizes[1]
    c1 = _dense_completion(q, 1)     # x2 from (x1, x3, ..., xs)
    c2 = _dense_completion(q, 2)     # x3 from (x1, x2, x4, ..., xs)
    tail = tuple(e[3:])

    # f_{e1,b} is the fiber at (c3(b), e4, ..., es) where c3(b) completes (e1, b, e4, ...)
    c3 = c2[(e[0], slice(None)) + tail]                 # shape (n2,)
    fm = c1[(slice(None), c3) + tail].T                 # fm[b, x1] = f_{e1,b}(x1)
    fm = np.ascontiguousarray(fm)
    f0_inv = np.argsort(fm[e[1]])

    # (f_b o f0^-1 o f_b')(e1) = f_b(f0^-1(b'))
    table = fm[:, f0_inv]                               # table[b, b']
    comp = fm[:, f0_inv][:, fm]                         # comp[b, b', x] = f_b(f0^-1(f_b'(x)))
    if not np.array_equal(comp, fm[table]):
        raise AssertionError("fiber bijections are not closed under f o f0^-1 o f'")
    if not np.array_equal(comp, comp.transpose(1, 0, 2)):
        raise AssertionError("fiber bijection addition is not commutative")
    group = GroupTable(table, e[1])
    neg = group.negation

    maps = [np.argmax(fm == e[1], axis=0), np.arange(n2)]   # pi_1(a): f_b(a) = e2
    others = [k for k in range(s) if k != 1]
    for i in range(2, s):
        idx = tuple(slice(None) if k == i else e[k] for k in others)
        maps.append(neg[c1[idx]])
    assert len(maps[0]) == n1
    corr = Correspondence(group, maps, e, False, invariant_factors(group))
    if verify:
        res = verify_correspondence(q, corr)
        if not res.ok:
            raise AssertionError(f"internal error: reconstruction failed verification at "
                                 f"{res.counterexample} ({res.reason})")
        corr.verified = True
    return corr


def verify_correspondence(q: FiniteRelation, c: Correspondence) -> VerifyResult:
    """Exhaustively check ``Q(a) <=> sum maps[i](a_i) == 0`` in both directions."""
    g = c.group
    if len(c.maps) != q.arity:
        return VerifyResult(False, None, "shape: number of maps differs from arity")
    for i, (m, n) in enumerate(zip(c.maps, q.sizes)):
        if m.shape != (n,) or (len(m) and (m.min() < 0 or m.max() >= g.order)):
            return VerifyResult(False, None, f"shape: map {i} does not fit")
    zero = g.identity
    if len(q):
        bad = np.nonzero(c.total(q.tuples) != zero)[0]
        if len(bad):
            return VerifyResult(False, tuple(q.tuples[bad[0]].tolist()),
                                "tuple in Q with non-zero sum")
    acc = c.maps[0]
    for i in range(1, q.arity - 1):
        acc = g.table[acc[:, None], c.maps[i][None, :]].ravel()
    neg = np.argmax(g.table == zero, axis=1)
    last = c.maps[-1]
    n_last = q.sizes[-1]
    best = None
    for a in range(n_last):
        prefixes = np.nonzero(acc == neg[last[a]])[0]
        if not len(prefixes):
            continue
        codes = prefixes * n_last + a
        missing = codes[~q.contains_codes(codes)]
        if len(missing) and (best is None or missing[0] < best):
            best = int(missing[0])
    if best is not None:
        digits = []
        for n in reversed(q.sizes):
            digits.append(best % n)
            best //= n
        return VerifyResult(False, tuple(reversed(digits)), "zero-sum tuple not in Q")
    return VerifyResult(True)


def reconstruct_ternary(q: FiniteRelation, basepoint: Sequence[int] | None = None) -> Correspondence:
    """Reconstruct a ternary group relation via its star transform.

    The arity-4 relation Q* gets a correspondence at basepoint
    ``(e2, e2, e3, e3)``; its first and third maps serve for coordinates 2 and
    3 of ``q``, and coordinate 1 is forced by ``s1(x1) = -s2(x2) - s3(x3)``.
    """
    if q.arity != 3:
        raise ValueError(f"reconstruct_ternary needs arity 3, got {q.arity}")
    p1 = check_p1(q)
    if not p1.ok:
        raise P1Error(p1)
    e = tuple(q.tuples[0].tolist()) if basepoint is None else tuple(int(v) for v in basepoint)
    if e not in q:
        raise ValueError(f"basepoint {e} is not a tuple of the relation")
    qs = star_transform(q)
    p1s = check_p1(qs)
    if not p1s.ok:
        raise P1Error(p1s)
    p2s = check_p2_all(qs)
    if not p2s.ok:
        raise P2Error(p2s.first_witness(),
                      f"star transform fails P2 for pair {p2s.failing_pairs[0]}")
    cs = reconstruct_group(qs, (e[1], e[1], e[2], e[2]))
    g = cs.group
    s2, s3 = cs.maps[0], cs.maps[2]
    t = q.tuples
    forced = g.negation[g.table[s2[t[:, 1]], s3[t[:, 2]]]]
    s1 = np.full(q.sizes[0], -1, dtype=np.int64)
    first_row = np.full(q.sizes[0], -1, dtype=np.int64)
    for r, (x1, val) in enumerate(zip(t[:, 0].tolist(), forced.tolist())):
        if s1[x1] < 0:
            s1[x1], first_row[x1] = val, r
        elif s1[x1] != val:
            raise TernaryClashError(t[first_row[x1]].tolist(), t[r].tolist())
    corr = Correspondence(g, [s1, s2, s3], e, False, list(cs.invariant_factors))
    res = verify_correspondence(q, corr)
    if not res.ok:
        raise AssertionError(f"internal error: ternary correspondence fails at "
                             f"{res.counterexample} ({res.reason})")
    corr.verified = True
    return corr
