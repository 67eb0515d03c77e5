import warnings

import numpy as np
import pytest

from rbfscreen.assembly import RbfSpace
from rbfscreen.geometry import NodeSet, uniform_nodes
from rbfscreen.interpolation import (
    InterpolationProblem, evaluate, gaussian_bump, gram_matrix, interpolate, kernel_matrix, l2_error,
    quadrature_grid,
)
from rbfscreen.kernels import ScaledRbf, scaled_eval, wendland
from rbfscreen.solver import IllConditioned


def test_zero_samples():
    space = RbfSpace(wendland(1), uniform_nodes(4), 0.3)
    assert not np.any(interpolate(InterpolationProblem(space, np.zeros(space.N))))


def test_single_node():
    r = 0.2
    space = RbfSpace(wendland(1), NodeSet(np.array([[0.5, 0.5]])), r)
    assert interpolate(InterpolationProblem(space, [3.0]))[0] == pytest.approx(3.0 * r * r, rel=1e-14)


def test_sample_shape_checked():
    space = RbfSpace(wendland(1), uniform_nodes(4), 0.3)
    with pytest.raises(ValueError):
        InterpolationProblem(space, np.zeros(3))


def test_duplicate_nodes_rejected():
    space = RbfSpace(wendland(1), NodeSet(np.array([[0.5, 0.5], [0.5, 0.5]])), 0.2)
    with pytest.raises(ValueError):
        interpolate(InterpolationProblem(space, [1.0, 2.0]))


@pytest.mark.parametrize("m", [0, 1, 2])
def test_reproduces_basis_function(m):
    space = RbfSpace(wendland(m), uniform_nodes(8), 0.3)
    target = lambda x: scaled_eval(ScaledRbf(space.kernel, space.centers[1], space.r), x)
    a = interpolate(InterpolationProblem.from_function(space, target))
    e1 = np.zeros(space.N)
    e1[1] = 1.0
    np.testing.assert_allclose(a, e1, atol=1e-8)
    assert l2_error(space, a, target) <= 1e-10


def test_matches_samples_and_gram_spd():
    space = RbfSpace(wendland(1), uniform_nodes(16), 0.25)
    f = gaussian_bump()
    prob = InterpolationProblem.from_function(space, f)
    a = interpolate(prob)
    vals = evaluate(space, a, space.centers)
    np.testing.assert_allclose(vals, prob.samples, rtol=1e-9, atol=1e-9 * np.max(np.abs(prob.samples)))
    np.linalg.cholesky(gram_matrix(space))
    np.testing.assert_allclose(kernel_matrix(space, space.centers) @ a, prob.samples, atol=1e-9)


def test_evaluate_matches_dense_on_random_points(rng):
    space = RbfSpace(wendland(2), uniform_nodes(10), 0.17)
    a = rng.standard_normal(space.N)
    P = rng.uniform(-0.1, 1.1, size=(5000, 2))
    np.testing.assert_allclose(evaluate(space, a, P), kernel_matrix(space, P) @ a, atol=1e-12)


def test_quadrature_grid_integrates_polynomials():
    pts, w = quadrature_grid(3, 4)
    assert w.sum() == pytest.approx(1.0, rel=1e-14)
    assert np.dot(w, pts[:, 0] ** 3 * pts[:, 1] ** 5) == pytest.approx(1 / 24, rel=1e-13)


def test_error_decreases_under_refinement():
    f = gaussian_bump()
    errs = []
    for n in (8, 12, 16):
        space = RbfSpace(wendland(1), uniform_nodes(n), 0.25)
        errs.append(l2_error(space, interpolate(InterpolationProblem.from_function(space, f)), f))
    assert errs[0] > errs[1] > errs[2] > 0


def test_ill_conditioning_warning():
    space = RbfSpace(wendland(2), uniform_nodes(24), 0.5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        interpolate(InterpolationProblem.from_function(space, gaussian_bump()), cond_bound=10.0)
    assert any(issubclass(w.category, IllConditioned) for w in caught)
