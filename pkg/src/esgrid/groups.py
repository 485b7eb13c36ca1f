"""Finite groups given by Cayley tables, with abelian classification.

Elements are indexes ``0..n-1`` and ``table[a, b]`` is ``a + b``. Direct
products index elements in mixed radix with the first factor most
significant: ``(x_1, ..., x_k) -> x_1 * (n_2 ... n_k) + ... + x_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from esgrid.errors import NotAbelianError, RelationFormatError

HEADER = "#group v1"
FULL_ASSOCIATIVITY_LIMIT = 256


class GroupTable:
    """A Cayley table with a designated identity. Immutable."""

    def __init__(self, table, identity: int = 0):
        t = np.array(table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise ValueError("Cayley table must be a non-empty square array")
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise ValueError(f"table entries must lie in 0..{n - 1}")
        if not 0 <= identity < n:
            raise ValueError(f"identity {identity} out of range")
        t.flags.writeable = False
        self.table = t
        self.order = n
        self.identity = int(identity)

    def __repr__(self):
        return f"GroupTable(order={self.order}, identity={self.identity})"

    def __eq__(self, other):
        return (isinstance(other, GroupTable) and self.identity == other.identity
                and np.array_equal(self.table, other.table))

    def add(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    @cached_property
    def axioms(self) -> "AxiomReport":
        return verify_group_axioms(self)

    @cached_property
    def negation(self) -> np.ndarray:
        """``negation[x]`` is the inverse of ``x``; requires a verified group."""
        self.require_group()
        neg = np.argmax(self.table == self.identity, axis=1)
        neg.flags.writeable = False
        return neg

    def require_group(self):
        if not self.axioms.is_group:
            raise ValueError(f"not a group: {self.axioms.first_failure()}")

    def require_abelian(self):
        self.require_group()
        if not self.axioms.commutativity.ok:
            raise NotAbelianError(
                f"group is not abelian: {self.axioms.commutativity.counterexample}")

    def relabeled(self, perm: Sequence[int]) -> "GroupTable":
        """Transport the table along the bijection ``x -> perm[x]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.argsort(perm)
        new = perm[self.table[np.ix_(inv, inv)]]
        return GroupTable(new, int(perm[self.identity]))


@dataclass(frozen=True)
class Check:
    ok: bool
    counterexample: tuple | None = None


@dataclass(frozen=True)
class AxiomReport:
    latin: Check
    identity: Check
    inverses: Check
    associativity: Check
    commutativity: Check

    @property
    def is_group(self) -> bool:
        return self.latin.ok and self.identity.ok and self.inverses.ok and self.associativity.ok

    @property
    def is_abelian(self) -> bool:
        return self.is_group and self.commutativity.ok

    def first_failure(self):
        for name in ("latin", "identity", "inverses", "associativity", "commutativity"):
            c = getattr(self, name)
            if not c.ok:
                return name, c.counterexample
        return None

    def to_dict(self):
        return {name: {"ok": c.ok, "counterexample": list(c.counterexample)
                       if c.counterexample is not None else None}
                for name, c in self.__dict__.items()}


def _generators(t: np.ndarray) -> list:
    """Greedy generating set: every element is a left-normed product of these."""
    n = len(t)
    reached = np.zeros(n, dtype=bool)
    gens: list = []
    for x in range(n):
        if reached[x]:
            continue
        gens.append(x)
        frontier = [g for g in gens]
        reached[gens] = True
        while frontier:
            nxt = np.unique(t[np.ix_(frontier, gens)])
            nxt = nxt[~reached[nxt]]
            reached[nxt] = True
            frontier = nxt.tolist()
    return gens


def _associativity(t: np.ndarray) -> Check:
    n = len(t)
    if n <= FULL_ASSOCIATIVITY_LIMIT:
        for a in range(n):
            lhs = t[t[a]]          # (a+b)+c at [b, c]
            rhs = t[a][t]          # a+(b+c) at [b, c]
            bad = np.argwhere(lhs != rhs)
            if len(bad):
                b, c = bad[0]
                return Check(False, (a, int(b), int(c)))
        return Check(True)
    # Light's test over a generating set
    for g in _generators(t):
        lhs = t[t[:, g]]           # (x+g)+y at [x, y]
        rhs = t[:, t[g]]           # x+(g+y) at [x, y]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            x, y = bad[0]
            return Check(False, (int(x), g, int(y)))
    return Check(True)


def verify_group_axioms(g: GroupTable) -> AxiomReport:
    """Check Latin property, identity, inverses, associativity, commutativity.

    Associativity is checked exhaustively up to order 256 and with Light's
    test over a generating set above that.
    """
    t, e, n = g.table, g.identity, g.order
    ar = np.arange(n)
    latin = Check(True)
    for axis, kind in ((1, "row"), (0, "column")):
        srt = np.sort(t, axis=axis)
        ok = (srt == (ar[None, :] if axis == 1 else ar[:, None])).all(axis=axis)
        if not ok.all():
            latin = Check(False, (kind, int(np.argmin(ok))))
            break
    bad = np.nonzero((t[e] != ar) | (t[:, e] != ar))[0]
    identity = Check(True) if not len(bad) else Check(False, (int(bad[0]),))
    has_inv = ((t == e) & (t.T == e)).any(axis=1)
    inverses = Check(True) if has_inv.all() else Check(False, (int(np.argmin(has_inv)),))
    associativity = _associativity(t)
    bad = np.argwhere(t != t.T)
    commutativity = Check(True) if not len(bad) else Check(False, tuple(int(v) for v in bad[0]))
    return AxiomReport(latin, identity, inverses, associativity, commutativity)


def element_orders(g: GroupTable) -> np.ndarray:
    g.require_group()
    n, e = g.order, g.identity
    ar = np.arange(n)
    orders = np.zeros(n, dtype=np.int64)
    cur = ar.copy()
    for k in range(1, n + 1):
        hit = (cur == e) & (orders == 0)
        orders[hit] = k
        if orders.all():
            break
        cur = g.table[cur, ar]
    assert (n % orders == 0).all(), "element order does not divide group order"
    return orders


def prime_factors(n: int) -> dict:
    out: dict = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _exact_log(x: int, p: int) -> int:
    k = 0
    while x > 1:
        if x % p:
            raise AssertionError(f"{x} is not a power of {p}")
        x //= p
        k += 1
    return k


def _assemble(exponents: dict) -> list:
    """Invariant factors from per-prime exponent lists (any order)."""
    length = max((len(v) for v in exponents.values()), default=0)
    desc = []
    for j in range(length):
        d = 1
        for p, es in exponents.items():
            es = sorted(es, reverse=True)
            if j < len(es):
                d *= p ** es[j]
        desc.append(d)
    return desc[::-1]


def invariant_factors(g: GroupTable) -> list:
    """Invariant factors ``d_1 | d_2 | ... | d_k`` with product ``|G|``.

    For each prime ``p`` the counts ``c_k = #{x : p^k x = 0}`` give the number
    of cyclic ``p``-factors of order at least ``p^k`` as ``log_p(c_k / c_{k-1})``.
    The trivial group has no invariant factors.
    """
    g.require_abelian()
    orders = element_orders(g)
    exponents = {}
    for p, a in prime_factors(g.order).items():
        c_prev = 1
        at_least = []
        for k in range(1, a + 1):
            c_k = int((p ** k % orders == 0).sum())
            at_least.append(_exact_log(c_k // c_prev, p))
            c_prev = c_k
            if c_k == p ** a:
                break
        at_least.append(0)
        es = []
        for k in range(len(at_least) - 1, 0, -1):
            es += [k] * (at_least[k - 1] - at_least[k])
        exponents[p] = es
    return _assemble(exponents)


def groups_isomorphic(g1: GroupTable, g2: GroupTable) -> bool:
    return invariant_factors(g1) == invariant_factors(g2)


def cyclic(n: int) -> GroupTable:
    if n < 1:
        raise ValueError("cyclic group order must be at least 1")
    ar = np.arange(n)
    return GroupTable((ar[:, None] + ar[None, :]) % n, 0)


def direct_product(groups: Sequence[GroupTable]) -> GroupTable:
    groups = list(groups)
    if not groups:
        raise ValueError("direct product of an empty list")
    out = groups[0]
    for g in groups[1:]:
        n1, n2 = out.order, g.order
        a = np.arange(n1 * n2)
        hi, lo = a // n2, a % n2
        table = out.table[np.ix_(hi, hi)] * n2 + g.table[np.ix_(lo, lo)]
        out = GroupTable(table, out.identity * n2 + g.identity)
    return out


def abelian_group(factors: Sequence[int]) -> GroupTable:
    """Z_{f_1} x ... x Z_{f_k} (the trivial group for an empty list)."""
    factors = [int(f) for f in factors]
    if any(f < 1 for f in factors):
        raise ValueError(f"cyclic factors must be positive: {factors}")
    return direct_product([cyclic(f) for f in factors] or [cyclic(1)])


def _partitions(a: int, largest: int | None = None):
    largest = a if largest is None else largest
    if a == 0:
        yield []
        return
    for k in range(min(a, largest), 0, -1):
        for rest in _partitions(a - k, k):
            yield [k] + rest


def abelian_groups(n: int) -> list:
    """Invariant-factor lists of all abelian groups of order ``n``, sorted."""
    if n < 1:
        raise ValueError("order must be positive")
    primes = prime_factors(n)
    options = [[(p, part) for part in _partitions(a)] for p, a in primes.items()]
    out = [_assemble({p: part for p, part in combo}) for combo in product(*options)]
    return sorted(out)


# --- text format -------------------------------------------------------------

def dumps_group(g: GroupTable) -> str:
    lines = [HEADER, f"order {g.order}", f"identity {g.identity}"]
    lines += [" ".join(map(str, row)) for row in g.table.tolist()]
    return "\n".join(lines) + "\n"


def load_group(source) -> GroupTable:
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise RelationFormatError(f"expected header {HEADER!r}", 1)
    order = identity = None
    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "order":
                order = int(fields[1])
            elif fields[0] == "identity":
                identity = int(fields[1])
            else:
                rows.append([int(x) for x in fields])
        except (ValueError, IndexError):
            raise RelationFormatError(f"cannot parse {line!r}", lineno) from None
        if rows and order is not None and len(rows[-1]) != order:
            raise RelationFormatError(f"row has {len(rows[-1])} entries, expected {order}", lineno)
    if order is None or identity is None:
        raise RelationFormatError("missing order or identity", len(lines))
    if len(rows) != order:
        raise RelationFormatError(f"expected {order} rows, got {len(rows)}", len(lines))
    try:
        return GroupTable(rows, identity)
    except ValueError as exc:
        raise RelationFormatError(str(exc)) from None
