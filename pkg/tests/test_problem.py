import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dmsfir.catalog import available_problems, builtin_problem, default_dimension
from dmsfir.config import compile_expression, parse_problem_config
from dmsfir.problem import (
    ConfigError,
    EvalCounter,
    Norm,
    Problem,
    Status,
    ViolationConfig,
    apply_constraint_family,
    evaluate,
    family_constraints,
    suggested_start,
    violation,
)


def line_problem(constraint=lambda x: 0.25 - x[0]):
    return Problem("line", [0.0], [1.0], (lambda x: x[0], lambda x: 1 - x[0]), (constraint,))


def test_family_fixture_values():
    g1 = family_constraints(1, 4)
    assert [g(np.ones(4)) for g in g1] == pytest.approx([-1.0, -1.0], abs=1e-12)
    g4 = family_constraints(4, 3)
    assert [g(np.zeros(3)) for g in g4] == pytest.approx([-1.0, -1.0], abs=1e-12)
    g2 = family_constraints(2, 3)
    assert g2[0](np.full(3, 2.0)) == pytest.approx(-5.5, abs=1e-12)


@pytest.mark.parametrize("family,n,p", [(1, 5, 3), (2, 5, 3), (3, 5, 4), (4, 3, 2), (5, 6, 4), (6, 7, 1)])
def test_family_counts(family, n, p):
    assert len(family_constraints(family, n)) == p


def test_family_too_small_dimension():
    with pytest.raises(ConfigError):
        family_constraints(1, 2)
    with pytest.raises(ConfigError):
        family_constraints(7, 5)


def test_family6_is_sum_of_family5():
    x = np.array([0.3, 1.2, -0.4, 2.0, 0.7])
    total = sum(g(x) for g in family_constraints(5, 5))
    assert family_constraints(6, 5)[0](x) == pytest.approx(total, abs=1e-12)


@pytest.mark.parametrize("family", [1, 2, 4])
def test_suggested_start_feasible(family):
    base = Problem("box", np.full(4, -10.0), np.full(4, 10.0), (lambda x: x[0], lambda x: x[1]))
    prob = apply_constraint_family(base, family)
    ev = evaluate(prob, suggested_start(family, 4))
    assert ev.status is Status.OK and ev.h == 0.0


def test_suggested_start_values():
    assert suggested_start(3, 5).tolist() == [0.5] * 5
    assert suggested_start(4, 3).tolist() == [0.0] * 3
    assert suggested_start(2, 3).tolist() == [2.0] * 3


def test_violation_norms():
    c = [1.0, -2.0, 2.0]
    assert violation(c) == pytest.approx(5.0)
    assert violation(c, ViolationConfig(Norm.L1, 1.0)) == pytest.approx(3.0)
    assert violation(c, ViolationConfig(Norm.LINF, 1.0)) == pytest.approx(2.0)
    assert violation(c, ViolationConfig(Norm.L2, 1.0)) == pytest.approx(math.sqrt(5.0))
    assert violation([]) == 0.0
    assert violation([math.nan]) == math.inf


# squares of magnitudes below ~1e-162 underflow to zero, so keep away from them
_entries = st.floats(-1e3, 1e3).filter(lambda v: v == 0 or abs(v) > 1e-100)


@given(st.lists(_entries, min_size=1, max_size=6))
def test_violation_zero_iff_feasible(c):
    h = violation(c)
    assert h >= 0
    assert (h == 0) == all(v <= 0 for v in c)


def test_evaluate_statuses_and_counting():
    prob = line_problem()
    counter = EvalCounter()
    out = evaluate(prob, np.array([1.5]), counter)
    assert out.status is Status.BARRIER_X and np.all(np.isinf(out.extended()))
    assert counter.f_evals == 0
    above = evaluate(prob, np.array([0.0]), counter, h_max=0.01)
    assert above.status is Status.ABOVE_HMAX and above.h == pytest.approx(0.0625)
    assert counter.f_evals == 0 and counter.h_evals == 1
    ok = evaluate(prob, np.array([0.5]), counter)
    assert ok.ok and ok.h == 0 and ok.extended().tolist() == [0.5, 0.5, 0.0]
    assert counter.f_evals == 1


def test_evaluate_feasible_only_rejects_infeasible():
    prob = line_problem()
    assert evaluate(prob, np.array([0.1]), feasible_only_tol=1e-5).status is Status.BARRIER_X
    assert evaluate(prob, np.array([0.3]), feasible_only_tol=1e-5).ok


def test_non_finite_objective_rejected():
    prob = Problem("bad", [0.0], [1.0], (lambda x: math.nan, lambda x: x[0]))
    counter = EvalCounter()
    assert evaluate(prob, np.array([0.5]), counter).status is Status.BARRIER_X
    assert counter.nan_rejections == 1


def test_problem_validation():
    with pytest.raises(ConfigError):
        Problem("x", [1.0], [0.0], (lambda x: x[0], lambda x: x[0]))
    with pytest.raises(ConfigError):
        Problem("x", [0.0], [1.0], (lambda x: x[0],))
    with pytest.raises(ConfigError):
        Problem("x", [0.0], [1.0], (lambda x: x[0], lambda x: x[0]), h_max=-1.0)


def test_catalog_lookup():
    assert "ZDT1" in available_problems()
    assert builtin_problem("zdt1").n == default_dimension("ZDT1") == 30
    assert builtin_problem("ZDT1", n=5).n == 5
    with pytest.raises(ConfigError, match="available"):
        builtin_problem("nope")


def test_catalog_zdt1_values():
    prob = builtin_problem("ZDT1", n=5)
    x = np.array([0.25, 0, 0, 0, 0])
    ev = evaluate(prob, x)
    assert ev.f.tolist() == pytest.approx([0.25, 0.5])


def test_apply_family_names_and_start():
    prob = apply_constraint_family(builtin_problem("ZDT1", n=5), 4)
    assert prob.name == "ZDT1-g4" and prob.p == 4 and prob.start.tolist() == [0.0] * 5
    with pytest.raises(ConfigError):
        apply_constraint_family(prob, 4)


CONFIG = """
# toy problem
name = toy
n = 3
lower = 0
upper = 1 1 2
objective.1 = x[1]
objective.2 = 1 - sqrt(x[1]) + sum(i, 2, n, x[i]^2)
constraint.1 = x[1] + x[2] - 1.5
h_max = 4.5
"""


def test_config_parse():
    prob = parse_problem_config(CONFIG)
    assert prob.name == "toy" and prob.n == 3 and prob.upper.tolist() == [1, 1, 2]
    ev = evaluate(prob, np.array([1.0, 1.0, 2.0]))
    assert ev.f.tolist() == pytest.approx([1.0, 5.0])
    assert ev.h == pytest.approx(0.25)
    assert prob.h_max == 4.5


def test_config_family_and_start():
    prob = parse_problem_config("n = 3\nlower = -5\nupper = 5\nobjective.1 = x[1]\n"
                                "objective.2 = x[2]\nfamily = 2\n", "fam.cfg")
    assert prob.p == 1 and prob.start.tolist() == [2.0] * 3 and prob.name == "fam"


@pytest.mark.parametrize("text", [
    "n = 2\nlower = 0\nupper = 1\nobjective.1 = x[3]\nobjective.2 = x[1]",
    "n = 2\nlower = 0\nupper = 1\nobjective.1 = y\nobjective.2 = x[1]",
    "n = 2\nlower = 0\nupper = 1\nobjective.1 = __import__('os')\nobjective.2 = x[1]",
    "n = 2\nlower = 0 1 2\nupper = 1\nobjective.1 = x[1]\nobjective.2 = x[1]",
    "n = 2\nupper = 1\nobjective.1 = x[1]\nobjective.2 = x[1]",
    "n = 2\nlower = 0\nupper = 1\nobjective.1 = x[1]\nobjective.2 = x[1]\ncolour = red",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_problem_config(text)


def test_expression_runtime_errors_give_nan():
    f = compile_expression("log(x[1])", 1)
    assert math.isnan(f(np.array([-1.0])))
    assert compile_expression("2^3 + pi*0 + abs(-1)", 1)(np.zeros(1)) == 9.0


@settings(max_examples=50)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_expression_matches_python(xs):
    x = np.array(xs)
    f = compile_expression("x[1]*x[2] - exp(x[3]) / 2 + sum(k, 1, n, x[k]^2)", 3)
    expect = x[0] * x[1] - math.exp(x[2]) / 2 + float(np.sum(x**2))
    assert f(x) == pytest.approx(expect, rel=1e-12, abs=1e-12)
