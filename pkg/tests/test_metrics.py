import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dmsfir.metrics import (
    Extremes,
    Front,
    MetricKind,
    MetricTable,
    delta_metric,
    gamma_metric,
    hv_reference_point,
    hypervolume2,
    load_front_csv,
    metric_table,
    performance_profiles,
    purity,
    reference_front,
)


def inclusion_exclusion(points, ref):
    """Union of boxes [p, ref] by inclusion-exclusion (exponential, small inputs only)."""
    total = 0.0
    pts = [np.asarray(p, dtype=float) for p in points]
    for k in range(1, len(pts) + 1):
        for combo in itertools.combinations(pts, k):
            corner = np.max(combo, axis=0)
            total += (-1) ** (k + 1) * float(np.prod(np.maximum(ref - corner, 0)))
    return total


def test_reference_front_fixtures():
    ref, ext = reference_front([Front([[1, 2]]), Front([[2, 1]])])
    assert sorted(map(tuple, ref.points)) == [(1, 2), (2, 1)]
    assert ext.best.tolist() == [1, 1] and ext.worst.tolist() == [2, 2]
    ref, _ = reference_front([Front([[1, 2]]), Front([[0, 1]])])
    assert ref.points.tolist() == [[0, 1]]
    with pytest.raises(ValueError):
        reference_front([Front(np.empty((0, 2)))])


@given(st.lists(st.lists(st.lists(st.integers(0, 5), min_size=2, max_size=2), min_size=1, max_size=7),
                min_size=1, max_size=3))
def test_reference_front_matches_pairwise(fronts):
    ref, _ = reference_front([Front(f) for f in fronts])
    union = {tuple(map(float, p)) for f in fronts for p in f}
    def dom(a, b):
        return all(x <= y for x, y in zip(a, b)) and a != b
    oracle = {p for p in union if not any(dom(q, p) for q in union)}
    assert set(map(tuple, ref.points)) == oracle


def test_purity_fixtures():
    ref = Front([[0, 3], [1, 2], [2, 1], [3, 0]])
    assert purity(Front([[1, 2], [2, 1]]), ref) == 1.0
    assert purity(Front([[5, 5]]), ref) == 0.0
    four = Front([[0, 3], [1, 2], [2, 1], [2.5, 0.6]])
    assert purity(four, ref) == 0.75
    assert purity(Front([[1 + 1e-9, 2]]), ref, tol=1e-6) == 1.0
    with pytest.raises(ValueError):
        purity(Front(np.empty((0, 2))), ref)


def test_hypervolume_fixtures():
    assert hypervolume2([[1, 1]], [2, 2]) == 1.0
    assert hypervolume2([[1, 2], [2, 1]], [3, 3]) == 3.0
    with pytest.raises(ValueError, match="does not dominate"):
        hypervolume2([[4, 1]], [3, 3])


pts2 = st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=3)


@given(pts2)
def test_hypervolume_matches_inclusion_exclusion(points):
    ref = np.array([1.5, 1.5])
    assert hypervolume2(np.array(points), ref) == pytest.approx(inclusion_exclusion(points, ref),
                                                                rel=1e-12, abs=1e-12)


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=8),
       st.tuples(st.floats(0, 1), st.floats(0, 1)), st.floats(-5, 5), st.floats(-5, 5))
def test_hypervolume_monotone_and_translation_invariant(points, extra, dx, dy):
    ref = np.array([1.2, 1.2])
    base = hypervolume2(np.array(points), ref)
    assert hypervolume2(np.array(points + [extra]), ref) >= base - 1e-12
    shift = np.array([dx, dy])
    assert hypervolume2(np.array(points) + shift, ref + shift) == pytest.approx(base, abs=1e-9)


def test_hv_reference_point_margin():
    ref = hv_reference_point([Front([[0, 2], [2, 0]]), Front([[1, 1]])])
    assert ref.tolist() == pytest.approx([2.02, 2.02])


def test_gamma_fixtures():
    f = Front([[0, 1], [1, 0]])
    assert gamma_metric(f, Extremes(np.array([0, 0.]), np.array([1, 1.]))) == 1.0
    f = Front([[0, 1], [0.5, 0.5], [1, 0]])
    assert gamma_metric(f, Extremes(np.array([0, 0.]), np.array([1, 1.]))) == 0.5
    single = Front([[0.3, 0.3]])
    assert gamma_metric(single, Extremes(np.array([0, 0.]), np.array([1, 1.]))) == pytest.approx(0.7)


def test_delta_fixtures():
    ext = Extremes(np.array([0, 0.]), np.array([1, 1.]))
    uniform = Front([[0, 1], [0.5, 0.5], [1, 0]])
    assert delta_metric(uniform, ext) == pytest.approx(0.0, abs=1e-12)
    uneven = Front([[0, 1], [0.4, 0.6], [1, 0]])
    assert delta_metric(uneven, ext) == pytest.approx(0.2, abs=1e-12)
    single = Front([[0.3, 0.3]])
    assert delta_metric(single, ext) == 1.0
    same = Front([[1, 1]])
    assert delta_metric(same, Extremes(np.array([1, 1.]), np.array([1, 1.]))) == 0.0


def test_delta_with_duplicate_values():
    # distinct points sharing one component give a zero-length gap
    f = Front([[0, 1], [0.5, 0.5], [0.5, 0.6], [1, 0]])
    ext = Extremes(np.array([0, 0.]), np.array([1, 1.]))
    assert math.isfinite(delta_metric(f, ext))


# dyadic grid values and integer shifts keep the translated gaps exact
grid = st.integers(0, 64).map(lambda k: k / 64)


@given(st.lists(st.tuples(grid, grid), min_size=2, max_size=8), st.integers(-10, 10))
def test_gamma_delta_shift_invariant(points, shift):
    f = Front(np.array(points))
    ref, ext = reference_front([f])
    g, d = gamma_metric(f, ext), delta_metric(f, ext)
    moved = Front(f.points + np.array([shift, 0.0]))
    ext2 = Extremes(ext.best + np.array([shift, 0.0]), ext.worst + np.array([shift, 0.0]))
    assert gamma_metric(moved, ext2) == pytest.approx(g, abs=1e-12)
    assert delta_metric(moved, ext2) == pytest.approx(d, abs=1e-12)


def test_profile_fixture():
    t = MetricTable(MetricKind.GAMMA, ["p1", "p2"], ["s1", "s2"], np.array([[1.0, 2.0], [2.0, 1.0]]))
    prof = dict((tau, rho) for tau, rho in performance_profiles(t)["s1"])
    assert prof[1.0] == 0.5 and prof[2.0] == 1.0


def test_profile_ties_and_failures():
    t = MetricTable(MetricKind.GAMMA, ["p1", "p2", "p3"], ["a", "b"],
                    np.array([[1.0, 1.0], [3.0, math.inf], [math.inf, math.inf]]))
    prof = performance_profiles(t)
    assert prof["a"][0] == (1.0, 1.0)
    assert prof["b"][0] == (1.0, 0.5) and prof["b"][-1][1] == 0.5


@settings(max_examples=100)
@given(st.integers(1, 6), st.integers(1, 4), st.data())
def test_profile_invariants(n_prob, n_solv, data):
    vals = data.draw(st.lists(st.lists(st.one_of(st.floats(0.01, 100), st.just(math.inf)),
                                       min_size=n_solv, max_size=n_solv),
                              min_size=n_prob, max_size=n_prob))
    arr = np.array(vals)
    solvers = [f"s{j}" for j in range(n_solv)]
    t = MetricTable(MetricKind.DELTA, [f"p{i}" for i in range(n_prob)], solvers, arr)
    prof = performance_profiles(t)
    kept = [row for row in arr if np.any(np.isfinite(row))]
    for j, s in enumerate(solvers):
        rhos = [r for _, r in prof[s]]
        assert all(a <= b for a, b in zip(rhos, rhos[1:]))
        assert all(0 <= r <= 1 for r in rhos)
        if kept:
            wins = sum(row[j] == np.min(row) for row in kept)
            assert prof[s][0] == (1.0, wins / len(kept))
            done = sum(np.isfinite(row[j]) for row in kept)
            assert rhos[-1] == pytest.approx(done / len(kept))


def test_metric_table_inverts_and_marks_failures():
    fronts = {"p": {"a": Front([[1, 2], [2, 1]]), "b": Front([[1.5, 1.5]]), "c": None},
              "q": {"a": None, "b": None}}
    table = metric_table(fronts, MetricKind.PURITY)
    assert table.problems == ["p"]
    assert table.values[0].tolist() == [1.0, 1.0, math.inf]
    hv = metric_table(fronts, MetricKind.HYPERVOLUME)
    assert np.all(hv.values[0, :2] > 0) and math.isinf(hv.values[0, 2])


def test_virtual_solver_purity_is_one():
    a, b = Front([[0, 2], [1.5, 1.5]]), Front([[1, 1], [2, 0]])
    ref, _ = reference_front([a, b])
    assert purity(ref, ref) == 1.0


def test_load_front_csv(tmp_path):
    path = tmp_path / "front.csv"
    path.write_text("x_1,f_1,f_2,h,alpha\n0.1,0.1,2.0,0.0,1.0\n0.2,0.2,1.0,0.5,1.0\n"
                    "0.3,0.30000000000000004,0.5,0.0,1.0\n")
    f = load_front_csv(path)
    assert f.points.tolist() == [[0.1, 2.0], [0.30000000000000004, 0.5]]
    alt = tmp_path / "plain.csv"
    alt.write_text("f1,f2\n1,2\n2,1\n")
    assert len(load_front_csv(alt)) == 2
