"""Slow, direct implementations used to cross-check the library."""
from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np


def tuples_of(q):
    return {tuple(t) for t in q.tuples.tolist()}


def naive_p1(q) -> bool:
    ts = tuples_of(q)
    for i in range(q.arity):
        others = [range(n) for k, n in enumerate(q.sizes) if k != i]
        for rest in itertools.product(*others):
            hits = sum((rest[:i] + (v,) + rest[i:]) in ts for v in range(q.sizes[i]))
            if hits != 1:
                return False
    return True


def naive_degree(q, i) -> int:
    counts = defaultdict(int)
    for t in tuples_of(q):
        counts[t[:i] + t[i + 1:]] += 1
    return max(counts.values(), default=0)


def naive_p2_pair(q, i, j) -> bool:
    fibers = defaultdict(set)
    for t in tuples_of(q):
        rest = tuple(v for k, v in enumerate(t) if k not in (i, j))
        fibers[rest].add((t[i], t[j]))
    fs = list(fibers.values())
    for a, b in itertools.combinations(fs, 2):
        if a & b and a != b:
            return False
    return True


def naive_star(q) -> set:
    by_x1 = defaultdict(list)
    for x1, x2, x3 in tuples_of(q):
        by_x1[x1].append((x2, x3))
    out = set()
    for pts in by_x1.values():
        for (a, b), (c, d) in itertools.product(pts, pts):
            out.add((a, c, b, d))
    return out


def naive_count(q, parts) -> int:
    sets = [set(p) for p in parts]
    return sum(all(v in s for v, s in zip(t, sets)) for t in tuples_of(q))


def smith_invariants(cyclic_orders) -> list:
    """Invariant factors of Z_a1 x ... x Z_ak by gcd/lcm normalization."""
    a = [x for x in cyclic_orders if x > 1]
    changed = True
    while changed:
        changed = False
        for i in range(len(a)):
            for j in range(i + 1, len(a)):
                g = math.gcd(a[i], a[j])
                l = a[i] * a[j] // g
                if (a[i], a[j]) != (g, l):
                    a[i], a[j] = g, l
                    changed = True
    return sorted(x for x in a if x > 1)


def naive_group_orders(table, identity) -> list:
    n = len(table)
    out = []
    for x in range(n):
        k, cur = 1, x
        while cur != identity:
            cur = table[cur][x]
            k += 1
        out.append(k)
    return out


def brute_zarankiewicz(m, n, d, nu) -> int:
    """Max edges of a K_{d,nu}-free m x n bipartite graph over all 2^(mn) graphs."""
    best = 0
    cells = m * n
    for mask in range(1 << cells):
        e = bin(mask).count("1")
        if e <= best:
            continue
        rows = [(mask >> (r * n)) & ((1 << n) - 1) for r in range(m)]
        ok = True
        for combo in itertools.combinations(rows, d):
            c = (1 << n) - 1
            for r in combo:
                c &= r
            if bin(c).count("1") >= nu:
                ok = False
                break
        if ok:
            best = e
    return best


def naive_kdnu_free(m, n, edges, d, nu) -> bool:
    e = set(edges)
    for left in itertools.combinations(range(m), d):
        common = [j for j in range(n) if all((i, j) in e for i in left)]
        if len(common) >= nu:
            return False
    return True


def is_isotopic_to_cyclic(square) -> bool:
    """Brute force over row and column permutations and a symbol relabeling."""
    L = np.asarray(square)
    n = len(L)
    ar = np.arange(n)
    target = (ar[:, None] + ar[None, :]) % n
    for rp in itertools.permutations(range(n)):
        for cp in itertools.permutations(range(n)):
            M = L[np.ix_(rp, cp)]
            # symbol map forced by the first row: M[0, j] -> j
            sym = np.empty(n, dtype=int)
            sym[M[0]] = np.arange(n)
            M2 = sym[M]
            if np.array_equal(M2, target):
                return True
    return False
