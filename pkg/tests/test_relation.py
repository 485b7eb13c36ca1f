import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esgrid import (
    FiniteRelation,
    Grid,
    P2Witness,
    RelationFormatError,
    check_p1,
    check_p2,
    check_p2_all,
    count_on_grid,
    fiber_degree,
    is_fiber_algebraic,
    load_relation,
    permute_coordinates,
    relabel,
    restrict,
    star_transform,
)
from esgrid.experiments import RelationSpec, generate
from esgrid.relation import (
    DuplicateTupleWarning,
    P1Report,
    P2Report,
    dumps,
    dumps_grid,
    load_grid,
)

from oracles import naive_count, naive_degree, naive_p1, naive_p2_pair, naive_star, tuples_of


def group_sum(factors, s):
    return generate(RelationSpec.group_sum(factors, s))


def sum_box(n):
    """{x1 + x2 = x3} on {0..n-1}^3."""
    return FiniteRelation([n] * 3, [(a, b, a + b) for a in range(n) for b in range(n) if a + b < n])


@st.composite
def relations(draw, max_arity=4, max_size=4):
    s = draw(st.integers(3, max_arity))
    sizes = draw(st.lists(st.integers(1, max_size), min_size=s, max_size=s))
    box = list(itertools.product(*[range(n) for n in sizes]))
    chosen = draw(st.lists(st.sampled_from(box), max_size=min(len(box), 40), unique=True))
    return FiniteRelation(sizes, chosen)


# --- construction and format ------------------------------------------------

def test_tuples_sorted_and_deduplicated():
    with pytest.warns(DuplicateTupleWarning):
        q = FiniteRelation([3, 3], [(2, 1), (0, 2), (2, 1)])
    assert q.tuples.tolist() == [[0, 2], [2, 1]]
    assert len(q) == 2


def test_out_of_range_and_bad_arity():
    with pytest.raises(ValueError, match="out of range"):
        FiniteRelation([2, 2], [(0, 2)])
    with pytest.raises(ValueError):
        FiniteRelation([3], [(0,)])
    with pytest.raises(ValueError):
        FiniteRelation([3, 0], [])


def test_membership_outside_box_is_false():
    q = FiniteRelation([3, 3], [(1, 1)])
    assert (1, 1) in q
    assert (1, 4) not in q
    assert (1, 1, 0) not in q


def test_generator_input_accepted():
    q = FiniteRelation([2, 2], ((i, i) for i in range(2)))
    assert len(q) == 2


def test_text_round_trip_with_labels():
    q = FiniteRelation([2, 3], [(0, 1), (1, 2)], labels={1: ("a", "b", "c")})
    text = dumps(q)
    assert load_relation(text) == q
    assert load_relation(text.encode()) == q
    assert dumps(load_relation(text)) == text


def test_parse_errors_carry_line_numbers():
    bad = "#relation v1\narity 2\nsizes 2 2\ntuples\n0 1\n0 5\n"
    with pytest.raises(RelationFormatError, match="line 6"):
        load_relation(bad)
    with pytest.raises(RelationFormatError, match="line 1"):
        load_relation("arity 2\n")
    with pytest.raises(RelationFormatError, match="line 3"):
        load_relation("#relation v1\narity 2\nsizes 2 x\ntuples\n")
    with pytest.raises(RelationFormatError, match="missing 'tuples'"):
        load_relation("#relation v1\narity 2\nsizes 2 2\n")


def test_duplicate_in_file_warns_with_line():
    text = "#relation v1\narity 2\nsizes 2 2\ntuples\n0 1\n0 1  # again\n"
    with pytest.warns(DuplicateTupleWarning, match="line 6"):
        q = load_relation(text)
    assert len(q) == 1


def test_grid_format_round_trip():
    g = Grid([[0, 2], [], [1]])
    assert load_grid(dumps_grid(g)) == g
    with pytest.raises(RelationFormatError):
        load_grid("#grid v1\narity 2\npart 0 1\n")


# --- degree, P1 and P2 --------------------------------------------------------

def test_degree_and_fiber_algebraic():
    q = FiniteRelation([3, 3, 3], [(0, 0, 0), (0, 0, 1), (0, 0, 2), (1, 1, 1)])
    assert fiber_degree(q, 2) == 3
    assert fiber_degree(q, 0) == 1
    assert is_fiber_algebraic(q, 3)
    assert not is_fiber_algebraic(q, 2)


@pytest.mark.parametrize("factors,s", [([5], 4), ([6], 4), ([2, 2], 3), ([3], 5), ([2, 4], 3)])
def test_group_sums_pass_p1_and_p2(factors, s):
    q = group_sum(factors, s)
    assert check_p1(q).ok
    assert check_p2_all(q).ok
    assert len(check_p2_all(q).results) == s * (s - 1) // 2


def test_p1_reports_first_failing_prefix():
    q = group_sum([3], 3)
    t = [tuple(r) for r in q.tuples.tolist() if tuple(r) != (0, 1, 2)]
    r = check_p1(FiniteRelation([3, 3, 3], t))
    assert not r.ok
    bad = r.coordinates[0]
    assert (bad.coordinate, bad.prefix, bad.completions) == (0, (1, 2), 0)


def test_p2_witness_replays():
    q = generate(RelationSpec.twisted(RelationSpec.group_sum([4], 4), seed=2))
    assert check_p1(q).ok
    report = check_p2_all(q)
    assert not report.ok
    for pair, w in report.results:
        if w is not None:
            assert w.replay(q)
            assert w.pair == pair


def test_p2_pair_is_symmetric():
    q = generate(RelationSpec.twisted(RelationSpec.group_sum([4], 4), seed=0))
    assert (check_p2(q, 2, 0) is None) == (check_p2(q, 0, 2) is None)


def test_report_dicts_round_trip():
    q = generate(RelationSpec.twisted(RelationSpec.group_sum([4], 4), seed=1))
    p1, p2 = check_p1(q), check_p2_all(q)
    assert P1Report.from_dict(p1.to_dict()) == p1
    assert P2Report.from_dict(p2.to_dict()) == p2
    w = p2.first_witness()
    assert P2Witness.from_dict(w.to_dict()) == w
    broken = FiniteRelation([2, 2, 2], [(0, 0, 0)])
    assert P1Report.from_dict(check_p1(broken).to_dict()) == check_p1(broken)


@settings(max_examples=60, deadline=None)
@given(relations())
def test_p1_p2_degree_match_naive(q):
    assert check_p1(q).ok == naive_p1(q)
    for i in range(q.arity):
        assert fiber_degree(q, i) == naive_degree(q, i)
    for i, j in itertools.combinations(range(q.arity), 2):
        w = check_p2(q, i, j)
        assert (w is None) == naive_p2_pair(q, i, j)
        if w is not None:
            assert w.replay(q)


# --- star, counting, transforms ---------------------------------------------

@settings(max_examples=60, deadline=None)
@given(relations(max_arity=3, max_size=5))
def test_star_matches_definition(q):
    assert tuples_of(star_transform(q)) == naive_star(q)


def test_star_of_group_is_latin():
    qs = star_transform(group_sum([5], 3))
    assert qs.sizes == (5, 5, 5, 5)
    assert check_p1(qs).ok and check_p2_all(qs).ok
    with pytest.raises(ValueError):
        star_transform(group_sum([2], 4))


@pytest.mark.parametrize("n", [1, 2, 10, 37])
def test_sum_box_count(n):
    q = sum_box(n)
    assert count_on_grid(q, Grid.full(q.sizes)) == n * (n + 1) // 2


@settings(max_examples=60, deadline=None)
@given(relations(), st.data())
def test_count_methods_agree(q, data):
    parts = [data.draw(st.lists(st.integers(0, n - 1), unique=True)) for n in q.sizes]
    g = Grid(parts)
    expected = naive_count(q, parts)
    assert count_on_grid(q, g) == expected
    assert count_on_grid(q, g, "tuples") == expected
    assert count_on_grid(q, g, "grid") == expected
    assert len(restrict(q, g)) == expected


def test_count_rejects_bad_grid():
    q = sum_box(3)
    with pytest.raises(ValueError):
        count_on_grid(q, Grid([[0], [0]]))
    with pytest.raises(ValueError):
        count_on_grid(q, Grid([[0], [0], [5]]))
    with pytest.raises(ValueError):
        count_on_grid(q, Grid.full(q.sizes), method="other")


def test_permute_and_relabel():
    q = FiniteRelation([2, 3, 4], [(1, 2, 3), (0, 0, 1)])
    p = permute_coordinates(q, [2, 0, 1])
    assert p.sizes == (4, 2, 3)
    assert tuples_of(p) == {(3, 1, 2), (1, 0, 0)}
    r = relabel(q, 2, [3, 2, 1, 0])
    assert tuples_of(r) == {(1, 2, 0), (0, 0, 2)}
    with pytest.raises(ValueError):
        relabel(q, 2, [0, 0, 1, 2])
    with pytest.raises(ValueError):
        permute_coordinates(q, [0, 0, 1])


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([([3], 3), ([2, 2], 4), ([5], 3), ([4], 4)]), st.integers(0, 10_000))
def test_relabeling_preserves_p1_p2(case, seed):
    q = group_sum(*case)
    rng = np.random.default_rng(seed)
    for i in range(q.arity):
        q = relabel(q, i, rng.permutation(q.sizes[i]))
    assert check_p1(q).ok and check_p2_all(q).ok


def test_empty_relation():
    q = FiniteRelation([2, 2, 2], [])
    assert count_on_grid(q, Grid.full(q.sizes)) == 0
    assert check_p2_all(q).ok
    assert not check_p1(q).ok
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert len(star_transform(q)) == 0


def test_twisted_failing_pairs_match_brute_force():
    # the twist lives in the (x1, x2) table, so exactly the pairs splitting {0, 1} fail
    for seed in range(4):
        q = generate(RelationSpec.twisted(RelationSpec.group_sum([4], 4), seed=seed))
        failing = [p for p, w in check_p2_all(q).results if w is not None]
        assert failing == [p for p in itertools.combinations(range(4), 2) if not naive_p2_pair(q, *p)]
        assert failing == [(0, 2), (0, 3), (1, 2), (1, 3)]


def test_single_layer_swap_breaks_p1():
    # swapping x4 values on an intercalate of the x3 = 0 layer alone is not a Latin cube
    cube = {t: -sum(t) % 4 for t in itertools.product(range(4), repeat=3)}
    cube[0, 0, 0], cube[0, 2, 0] = cube[0, 2, 0], cube[0, 0, 0]
    cube[2, 0, 0], cube[2, 2, 0] = cube[2, 2, 0], cube[2, 0, 0]
    q = FiniteRelation([4] * 4, [t + (v,) for t, v in cube.items()])
    assert not check_p1(q).ok
    assert not check_p2_all(q).ok
