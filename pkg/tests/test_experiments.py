import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esgrid import Grid, check_p1, check_p2_all, fiber_degree, reconstruct_ternary
from esgrid.errors import RelationFormatError, ResourceLimitError
from esgrid.experiments import (
    RelationSpec,
    SweepRow,
    TwistWarning,
    ZeroCountWarning,
    dumps_spec,
    find_non_group_latin_square,
    fit_exponent,
    generate,
    latin_squares,
    loads_spec,
    quadrangle_violation,
    rows_from_csv,
    rows_to_csv,
    sample_grid,
    square_relation,
    sweep,
)
from esgrid.groups import abelian_groups

from oracles import is_isotopic_to_cyclic, tuples_of

S = RelationSpec
SUM3 = [[1, [1, 0, 0]], [1, [0, 1, 0]], [-1, [0, 0, 1]]]
SQUARE4 = [[1, [1, 0, 0, 0]], [1, [0, 1, 0, 0]], [1, [0, 0, 1, 0]], [-1, [0, 0, 0, 2]]]


def test_group_sum_example():
    q = generate(S.group_sum([5], 4))
    assert len(q) == 125
    assert check_p1(q).ok and check_p2_all(q).ok


@pytest.mark.parametrize("n", range(1, 17))
def test_group_sums_pass_p1_p2_for_small_groups(n):
    for factors in abelian_groups(n):
        for s in (3, 4, 5):
            if n ** (s - 1) > 5000:
                continue
            q = generate(S.group_sum(factors or [1], s))
            assert check_p1(q).ok and check_p2_all(q).ok
            assert all(fiber_degree(q, i) == 1 for i in range(s))


def test_polynomial_mod_is_cyclic():
    q = generate(S.polynomial_mod(SUM3, 11))
    assert len(q) == 121
    assert reconstruct_ternary(q).invariant_factors == [11]


def test_polynomial_mod_matches_direct_evaluation():
    terms = [[1, [2, 0, 0]], [3, [0, 1, 0]], [-1, [0, 0, 1]]]
    q = generate(S.polynomial_mod(terms, 7))
    direct = {t for t in itertools.product(range(7), repeat=3)
              if (t[0] ** 2 + 3 * t[1] - t[2]) % 7 == 0}
    assert tuples_of(q) == direct


def test_polynomial_box_output_domain():
    q = generate(S.polynomial_box(SUM3, [4, 5, None]))
    assert q.sizes == (4, 5, 8)
    assert len(q) == 20


def test_polynomial_box_solve_matches_brute_force():
    q = generate(S.polynomial_box(SQUARE4, [6] * 4, solve=2))
    direct = {t for t in itertools.product(range(6), repeat=4) if t[0] + t[1] + t[2] == t[3] ** 2}
    assert tuples_of(q) == direct
    q2 = generate(S.polynomial_box(SQUARE4, [6] * 4))
    assert tuples_of(q2) == direct


def test_spec_validation():
    with pytest.raises(ValueError):
        generate(S.group_sum([3], 2))
    with pytest.raises(ValueError):
        generate(S.polynomial_mod(SUM3, 1))
    with pytest.raises(ValueError):
        generate(S.polynomial_box(SQUARE4, [4, 4, 4, None]))       # x4 is not linear
    with pytest.raises(ValueError):
        generate(S.group_sum(["n"], 3))
    with pytest.raises(ValueError):
        RelationSpec("nope", {})


def test_twisted_keeps_p1_and_breaks_p2():
    for seed in range(5):
        q = generate(S.twisted(S.group_sum([4], 4), seed))
        assert check_p1(q).ok
        assert not check_p2_all(q).ok


def test_twisted_is_deterministic_and_located():
    a = generate(S.twisted(S.group_sum([2, 4], 4), 3))
    assert a == generate(S.twisted(S.group_sum([2, 4], 4), 3))
    b = generate(S.twisted(S.group_sum([2, 4], 4), 0, location=0))
    assert check_p1(b).ok


def test_twist_without_intercalate_warns():
    with pytest.warns(TwistWarning):
        q = generate(S.twisted(S.group_sum([5], 3), 0))
    assert not check_p1(q).ok


@pytest.mark.parametrize("d", [1, 2, 3])
def test_random_fiber_algebraic_degree(d):
    q = generate(S.random_fiber_algebraic([6, 7, 5], d, 0.6, seed=d))
    assert all(fiber_degree(q, i) <= d for i in range(3))
    assert q == generate(S.random_fiber_algebraic([6, 7, 5], d, 0.6, seed=d))


def test_resource_guard(monkeypatch):
    with pytest.raises(ResourceLimitError):
        generate(S.group_sum([50], 5), max_tuples=1000)
    monkeypatch.setenv("ESGRID_MAX_TUPLES", "100")
    with pytest.raises(ResourceLimitError):
        generate(S.group_sum([6], 4))
    with pytest.raises(ResourceLimitError):
        generate(S.polynomial_box(SQUARE4, [40] * 4, solve=2))
    monkeypatch.setenv("ESGRID_MAX_TUPLES", "many")
    with pytest.raises(ValueError):
        generate(S.group_sum([2], 3))


def test_spec_text_round_trip():
    specs = [S.group_sum(["n", 2], 4), S.polynomial_mod(SUM3, 11),
             S.polynomial_box(SQUARE4, ["n"] * 4, solve=2), S.polynomial_box(SUM3, ["n", "n", None]),
             S.twisted(S.group_sum([4], 3), 7, location=2),
             S.random_fiber_algebraic([5, 6, 7], 2, 0.25, 9)]
    for spec in specs:
        text = dumps_spec(spec)
        assert text.startswith("#spec v1\n")
        back = loads_spec(text)
        assert back == spec and back.spec_id == spec.spec_id
        assert dumps_spec(back) == text
        assert RelationSpec.from_dict(spec.to_dict()) == spec


def test_spec_parse_errors():
    with pytest.raises(RelationFormatError):
        loads_spec("kind group_sum\n")
    with pytest.raises(RelationFormatError):
        loads_spec("#spec v1\nkind mystery\n")
    with pytest.raises(RelationFormatError, match="line 3"):
        loads_spec("#spec v1\nkind group_sum\narity x\n")


# --- grids ---------------------------------------------------------------------

def test_sample_grid_kinds():
    q = generate(S.group_sum([10], 3))
    assert sample_grid("full", q, 20) == Grid.full(q.sizes)
    assert sample_grid("arithmetic", q, 5).parts[0].tolist() == [0, 2, 4, 6, 8]
    assert sample_grid("random", q, 4, seed=3) == sample_grid("random", q, 4, seed=3)
    with pytest.raises(ValueError):
        sample_grid("spiral", q, 3)
    with pytest.raises(ValueError):
        sample_grid("full", q, 0)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["full", "arithmetic", "geometric_box", "random"]),
       st.lists(st.integers(1, 30), min_size=3, max_size=3), st.integers(1, 40), st.integers(0, 99))
def test_sample_grid_sizes(kind, sizes, n, seed):
    q = generate(S.random_fiber_algebraic(sizes, 1, 0.0, 0))
    g = sample_grid(kind, q, n, seed)
    assert g.part_sizes() == tuple(min(n, m) for m in sizes)
    g.validate_for(q)


# --- sweeps and fits -------------------------------------------------------------

def test_group_sweep_counts():
    rows = sweep(S.group_sum(["n"], 4), [4, 8, 16])
    assert [r.count for r in rows] == [64, 512, 4096]


def test_sum_box_sweep_closed_form():
    rows = sweep(S.polynomial_box(SUM3, ["n", "n", None]), range(1, 41))
    assert all(r.count == r.n * (r.n + 1) // 2 for r in rows)


def test_square_sweep_below_cube():
    ns = [4, 8, 16, 32, 64]
    rows = sweep(S.polynomial_box(SQUARE4, ["n"] * 4, solve=2), ns)
    ratios = [r.count / r.n ** 3 for r in rows]
    assert all(b < a for a, b in zip(ratios[1:], ratios[2:]))
    for r in rows[:3]:
        direct = sum(1 for t in itertools.product(range(r.n), repeat=3)
                     if 0 <= t[2] ** 2 - t[0] - t[1] < r.n)
        assert r.count == direct


def test_sweep_csv_deterministic():
    spec = S.random_fiber_algebraic([12, 12, 12], 2, 0.5, 4)
    a = rows_to_csv(sweep(spec, [3, 6, 9], "random", trials=3, seed=5, timing=False))
    b = rows_to_csv(sweep(spec, [3, 6, 9], "random", trials=3, seed=5, timing=False))
    assert a == b
    assert a.splitlines()[0] == "spec_id,n,grid_kind,seed,count,micros"
    assert rows_to_csv(rows_from_csv(a)) == a


def test_sweep_rejects_bad_input():
    with pytest.raises(ValueError):
        sweep(S.group_sum(["n"], 3), [4, 3])
    with pytest.raises(ValueError):
        sweep(S.group_sum(["n"], 3), [3], trials=0)
    with pytest.raises(RelationFormatError):
        rows_from_csv("a,b\n1,2\n")


def rows_for(ns, f):
    return [SweepRow("x", n, "full", 0, f(n)) for n in ns]


def test_fit_exact_power():
    fit = fit_exponent(rows_for(range(4, 65, 4), lambda n: n ** 3))
    assert fit.slope == pytest.approx(3.0, abs=1e-9)
    assert fit.residual < 1e-9


def test_fit_closed_form_and_constant():
    assert 1.9 <= fit_exponent(rows_for(range(10, 101), lambda n: n * (n + 1) // 2)).slope <= 2.1
    assert fit_exponent(rows_for(range(10, 20), lambda n: 7)).slope == pytest.approx(0, abs=1e-9)


def test_fit_drops_zeros_and_needs_three_points():
    rows = rows_for([1, 2, 3, 4], lambda n: n * n) + [SweepRow("x", 5, "full", 0, 0)]
    with pytest.warns(ZeroCountWarning):
        fit = fit_exponent(rows)
    assert fit.dropped == 1 and fit.points == 4
    with pytest.raises(ValueError):
        fit_exponent(rows_for([2, 3], lambda n: n))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroCountWarning)
        with pytest.raises(ValueError):
            fit_exponent(rows_for([2, 3, 4], lambda n: 0 if n == 4 else n))


# --- Latin squares -------------------------------------------------------------

def test_latin_square_enumeration_order_3():
    squares = list(latin_squares(3, seed=1))
    assert len(squares) == 12
    assert all(quadrangle_violation(sq) is None for sq in squares)


def test_order_4_squares_are_all_group_isotopes():
    assert all(quadrangle_violation(sq) is None for sq in itertools.islice(latin_squares(4, 2), 200))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_non_group_square_found(seed):
    sq = find_non_group_latin_square(5, seed)
    assert sq is not None
    assert not is_isotopic_to_cyclic(sq)
    assert check_p1(square_relation(sq)).ok


def test_cyclic_square_passes_quadrangle():
    sq = [[(i + j) % 5 for j in range(5)] for i in range(5)]
    assert quadrangle_violation(sq) is None
    assert is_isotopic_to_cyclic(np.array(sq)[[2, 0, 1, 4, 3]])
