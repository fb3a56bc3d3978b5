import numpy as np
import pytest

from bregman_stationarity import problem as problem_module
from bregman_stationarity.errors import ConstructionError, DimensionError, DomainError, UnknownInstance
from bregman_stationarity.kernel import KernelName, KernelSpec
from bregman_stationarity.problem import (
    BUILTINS,
    ConstraintKind,
    ConstraintSet,
    ProblemInstance,
    SmoothObjective,
    builtin,
    check_assumptions,
    finite_difference_grad,
    sample_interior_points,
    subdifferential_residual,
)
from tests.dummy_data import random_convex_quadratic, random_instance, transportation_polytope


@pytest.mark.parametrize("name", BUILTINS)
def test_builtins_have_interior_point(name):
    problem = builtin(name)
    assert problem.name == name
    assert problem.g.contains(problem.x_int)
    assert np.all(problem.kernel.in_interior(problem.x_int))


def test_builtin_poly_trap_alpha():
    assert builtin("poly_trap:2.5").kernel == KernelSpec.polynomial(2.5)
    assert builtin("poly_trap", alpha=3.0).kernel.param == 3.0
    assert builtin("poly_trap").kernel.param == 1.0


@pytest.mark.parametrize("name", ["nope", "lp_simplex:2", "poly_trap:abc"])
def test_unknown_instance(name):
    with pytest.raises(UnknownInstance):
        builtin(name)


@pytest.mark.parametrize(
    "name, failed",
    [
        ("lp_simplex", []),
        ("nonconvex_simplex", []),
        ("entropy_trap", []),
        ("poly_trap", []),
        ("illposed_inverse", ["well_posedness"]),
    ],
)
def test_check_assumptions(name, failed):
    report = check_assumptions(builtin(name))
    assert report.failed == failed
    assert report.passed == (not failed)
    assert set(report.to_dict()["clauses"]) == {
        "domain_inclusion",
        "strict_feasibility",
        "well_posedness",
        "gradient_consistency",
        "surrogate_tangency",
    }


def test_check_assumptions_catches_bad_gradient():
    f = SmoothObjective(
        value=lambda x: float(x[0] ** 2),
        grad=lambda x: np.array([1.0, 0.0]),
        label="wrong gradient",
        n=2,
    )
    problem = ProblemInstance(f, ConstraintSet.simplex(2), KernelSpec.shannon())
    report = check_assumptions(problem)
    assert report.failed == ["gradient_consistency"]


def test_check_assumptions_domain_inclusion():
    # box reaching below zero does not fit in the entropy domain
    problem = ProblemInstance(
        SmoothObjective.linear([1.0]),
        ConstraintSet.box([-1.0], [1.0]),
        KernelSpec.shannon(),
    )
    assert "domain_inclusion" in check_assumptions(problem).failed


def test_lp_simplex_residuals():
    problem = builtin("lp_simplex")
    residual, witness = subdifferential_residual(problem, [0.0, 1.0])
    assert residual == pytest.approx(np.sqrt(2.0) / 2.0, abs=1e-8)
    np.testing.assert_allclose(witness, [-0.5, 0.5], atol=1e-8)

    residual, _ = subdifferential_residual(problem, [1.0, 0.0])
    assert residual <= 1e-10


def test_lp_simplex_residual_grid_search():
    """Min over a (mu, lambda) grid of ||(-1 + mu - lambda, mu)|| matches the NNLS value"""
    mu, lam = np.meshgrid(np.arange(-1.0, 2.0, 1e-3), np.arange(0.0, 1.0, 1e-3))
    grid = np.sqrt((-1.0 + mu - lam) ** 2 + mu**2).min()
    residual, _ = subdifferential_residual(builtin("lp_simplex"), [0.0, 1.0])
    assert residual == pytest.approx(grid, abs=1e-6)


def test_box_residual():
    problem = ProblemInstance(
        SmoothObjective.linear([1.0, -1.0]),
        ConstraintSet.box([0.0, 0.0], [1.0, 1.0]),
        KernelSpec.from_tag("fermi"),
    )
    assert subdifferential_residual(problem, [0.0, 1.0])[0] == 0.0
    assert subdifferential_residual(problem, [0.5, 1.0])[0] == pytest.approx(1.0)


def test_residual_input_errors():
    problem = builtin("lp_simplex")
    with pytest.raises(DomainError):
        subdifferential_residual(problem, [0.6, 0.6])
    with pytest.raises(DimensionError):
        subdifferential_residual(problem, [1.0])


def test_constraint_set_config_round_trip():
    box = ConstraintSet.from_config({"box": {"lower": [0.0, None], "upper": [None, 2.0]}})
    assert box.kind is ConstraintKind.BOX
    np.testing.assert_array_equal(box.lower, [0.0, -np.inf])
    assert box.to_config() == {"box": {"lower": [0.0, None], "upper": [None, 2.0]}}
    assert not box.compact

    simplex = ConstraintSet.from_config({"simplex": 3})
    assert simplex.to_config() == {"simplex": 3}
    assert simplex.compact

    with pytest.raises(ConstructionError):
        ConstraintSet.from_config({"ball": 1})


def test_constraint_set_errors():
    with pytest.raises(ConstructionError):
        # only the origin is feasible
        ConstraintSet.polytope([[1.0, 1.0]], [0.0])
    with pytest.raises(DimensionError):
        ConstraintSet.polytope([[1.0, 1.0]], [1.0, 2.0])
    with pytest.raises(ConstructionError):
        ConstraintSet.box([1.0], [0.0])
    with pytest.raises(ConstructionError):
        ConstraintSet.simplex(0)


def test_transportation_polytope():
    g = transportation_polytope([0.55, 0.45], [0.3, 0.3, 0.4])
    assert g.compact
    assert g.n == 6
    assert np.all(g.interior_point > 0.0)
    vertices = g.vertices()
    assert len(vertices) > 0
    for v in vertices:
        assert g.contains(v)


def test_problem_instance_errors():
    with pytest.raises(DimensionError):
        ProblemInstance(SmoothObjective.linear([1.0]), ConstraintSet.simplex(2), KernelSpec.shannon())
    with pytest.raises(ConstructionError):
        ProblemInstance(SmoothObjective.linear([1.0, 0.0]), ConstraintSet.simplex(2), KernelSpec.shannon(), t_bar=0.0)
    with pytest.raises(ConstructionError):
        # Hellinger domain (-1, 1) misses the simplex {x1 + x2 = 5, x >= 0} strictly inside
        ProblemInstance(
            SmoothObjective.linear([1.0, 0.0]),
            ConstraintSet.polytope([[1.0, 1.0]], [5.0]),
            KernelSpec(KernelName.HELLINGER),
        )


def test_objectives():
    rng = np.random.default_rng(3)
    f = random_convex_quadratic(rng, 4)
    assert f.convex and not f.affine
    x = rng.standard_normal(4)
    np.testing.assert_allclose(finite_difference_grad(f.value, x), f.grad(x), rtol=1e-5, atol=1e-6)

    indefinite = SmoothObjective.quadratic([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])
    assert not indefinite.convex
    assert SmoothObjective.linear([1.0, 2.0]).affine

    assert SmoothObjective.from_config({"linear": [1.0, 2.0]}).value(np.array([1.0, 1.0])) == pytest.approx(3.0)
    with pytest.raises(ConstructionError):
        SmoothObjective.from_config({"cubic": [1.0]})


def test_sample_interior_points():
    problem = ProblemInstance(
        SmoothObjective.linear(np.zeros(6)),
        transportation_polytope([0.55, 0.45], [0.3, 0.3, 0.4]),
        KernelSpec.shannon(),
    )
    points = sample_interior_points(problem, 20, np.random.default_rng(0))
    assert points.shape == (20, 6)
    for x in points:
        assert problem.g.contains(x)
        assert np.all(x > 0.0)


def test_F_is_infinite_outside():
    problem = builtin("lp_simplex")
    assert problem.F([0.6, 0.6]) == np.inf
    assert problem.F([0.25, 0.75]) == pytest.approx(-0.25)


@pytest.mark.parametrize(
    "spec, message",
    [
        ({"polytope": {"A": [[1.0, 1.0]]}}, "missing"),
        ({"box": {"upper": [1.0]}}, "missing"),
        ({"polytope": {"A": [["one", 1.0]], "b": [1.0]}}, "malformed"),
        ({"simplex": 2.5}, "integer"),
        ({"simplex": "two"}, "integer"),
        ({"simplex": True}, "integer"),
    ],
)
def test_malformed_constraint_entries(spec, message):
    with pytest.raises(ConstructionError, match=message):
        ConstraintSet.from_config(spec)


@pytest.mark.parametrize(
    "spec",
    [
        {"quadratic": {"Q": [[1.0, 0.0], [0.0, 1.0]]}},
        {"quadratic": [1.0, 2.0]},
        {"linear": ["a", "b"]},
    ],
)
def test_malformed_objective_entries(spec):
    with pytest.raises(ConstructionError):
        SmoothObjective.from_config(spec)


def test_gradient_consistency_uses_a_hundred_points(mocker):
    spy = mocker.spy(problem_module, "finite_difference_grad")
    report = check_assumptions(builtin("nonconvex_simplex"))
    assert report.passed
    assert spy.call_count == problem_module.GRADIENT_SAMPLES == 100


def test_residual_unchanged_by_rescaled_rows():
    """{3 x1 + 3 x2 = 3} is the simplex, so the residual must not depend on the row scale"""
    lp = builtin("lp_simplex")
    scaled = ProblemInstance(lp.f, ConstraintSet.polytope([[3.0, 3.0]], [3.0]), lp.kernel)
    rng = np.random.default_rng(7)
    points = [np.array([0.0, 1.0]), np.array([1.0, 0.0])]
    points += [np.array([u, 1.0 - u]) for u in rng.uniform(0.0, 1.0, 20)]
    for x in points:
        expected, _ = subdifferential_residual(lp, x)
        assert subdifferential_residual(scaled, x)[0] == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_residual_inside_is_a_plain_least_squares(seed):
    """With no active bounds the residual is the distance from -grad f to the row space of A"""
    rng = np.random.default_rng(seed)
    problem = random_instance(rng, 5, 2)
    for x in sample_interior_points(problem, 10, rng):
        grad = problem.f.grad(x)
        A = problem.g.A
        mu = np.linalg.lstsq(A.T, -grad, rcond=None)[0]
        residual, witness = subdifferential_residual(problem, x)
        assert residual == pytest.approx(np.linalg.norm(grad + A.T @ mu), abs=1e-10)
        np.testing.assert_allclose(witness, grad + A.T @ mu, atol=1e-9)
