import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaxarea.chains import distance_to_chain
from relaxarea.errors import (
    InvalidParams,
    SingularPoint,
    StencilCrossesSingularity,
)
from relaxarea.fields import (
    VectorField,
    area_integrand,
    chain_centers_radii,
    make_example_field,
    minor_pairs,
    minors2,
)


def fd_twin(field):
    """Same evaluator, finite-difference Jacobian."""
    return VectorField(field.n, field.m, field._eval, None,
                       singular_set=field.singular_set, name=field.name + "-fd")


class TestEvaluate:
    def test_vortex_on_positive_axis(self):
        v = make_example_field("vortex", d=1)
        assert np.allclose(v.evaluate((0.5, 0.0)), (1.0, 0.0), atol=1e-15)

    def test_vortex_center_is_singular(self):
        v = make_example_field("vortex", d=1)
        with pytest.raises(SingularPoint):
            v.evaluate((0.0, 0.0))

    def test_planar_vortex_unit_second_axis(self):
        pv = make_example_field("planar_vortex")
        assert np.allclose(pv.evaluate((0.0, 0.3, 0.9)), (0.0, 1.0), atol=1e-15)

    def test_evaluation_is_deterministic(self, rng):
        v = make_example_field("vortex", d=2)
        X = rng.uniform(-1, 1, (50, 2))
        assert np.array_equal(v.evaluate_many(X), v.evaluate_many(X))

    def test_sphere_valued_cases(self, rng):
        fields = [
            make_example_field("vortex", d=-2),
            make_example_field("planar_vortex"),
            make_example_field("vortex_chain", m=4),
            make_example_field("sphere_vortex"),
        ]
        for f in fields:
            X = rng.uniform(-0.98, 0.98, (10_000, f.n))
            X = X[distance_to_chain(X, f.singular_set) > 1e-3]
            U = f.evaluate_many(X)
            norms = np.linalg.norm(U, axis=1)
            assert np.max(np.abs(norms - 1.0)) <= 1e-9


class TestJacobian:
    def test_vortex_frobenius_is_inverse_radius(self):
        v = make_example_field("vortex", d=1)
        J = v.jacobian_at((0.5, 0.0))
        assert np.linalg.norm(J) == pytest.approx(2.0, rel=1e-12)

    def test_constant_field_zero_matrix(self):
        c = make_example_field("constant", value=(0.3, -0.4))
        assert np.all(c.jacobian_at((0.2, 0.7)) == 0.0)

    def test_fd_matches_analytic_at_probe_point(self):
        v = make_example_field("vortex", d=1)
        J_an = v.jacobian_at((0.3, 0.4))
        J_fd = fd_twin(v).jacobian_at((0.3, 0.4))
        assert np.max(np.abs(J_an - J_fd)) <= 1e-6

    def test_fd_matches_analytic_away_from_singularities(self, rng):
        for kind, kw in [("vortex", {"d": -2}), ("planar_vortex", {}),
                         ("sphere_vortex", {})]:
            f = make_example_field(kind, **kw)
            X = rng.uniform(-0.9, 0.9, (300, f.n))
            X = X[distance_to_chain(X, f.singular_set) >= 0.1][:100]
            J_an = f.jacobian_many(X)
            J_fd = fd_twin(f).jacobian_many(X)
            assert np.max(np.abs(J_an - J_fd)) <= 1e-6

    def test_stencil_near_singularity_errors(self):
        v = fd_twin(make_example_field("vortex", d=1))
        with pytest.raises(StencilCrossesSingularity):
            v.jacobian_at((1e-7, 0.0))


class TestMinors:
    def test_identity_has_unit_determinant(self):
        assert np.allclose(minors2(np.eye(2)), [1.0])

    def test_pair_ordering(self):
        assert minor_pairs(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=2),
           st.lists(st.floats(-10, 10), min_size=3, max_size=3))
    def test_rank_one_matrices_have_zero_minors(self, u, v):
        J = np.outer(u, v)
        assert np.max(np.abs(minors2(J))) <= 1e-9

    def test_planar_vortex_minors_vanish(self, rng):
        pv = make_example_field("planar_vortex")
        X = rng.uniform(-0.9, 0.9, (500, 3))
        X = X[np.hypot(X[:, 0], X[:, 1]) > 0.05]
        M = minors2(pv.jacobian_many(X))
        assert np.max(np.abs(M)) <= 1e-9

    def test_vortex_minors_vanish(self, rng):
        v = make_example_field("vortex", d=3)
        X = rng.uniform(-1, 1, (500, 2))
        X = X[np.hypot(X[:, 0], X[:, 1]) > 0.05]
        assert np.max(np.abs(minors2(v.jacobian_many(X)))) <= 1e-9

    def test_m3_minor_vector_length(self):
        M = minors2(np.arange(9.0).reshape(3, 3))
        assert M.shape == (10,)  # nine 2x2 minors plus the determinant


class TestAreaIntegrand:
    def test_zero_matrix(self):
        assert area_integrand(np.zeros((2, 2))) == 1.0

    def test_identity_2x2(self):
        # 1 + |I|_F^2 + (det I)^2 = 1 + 2 + 1
        assert area_integrand(np.eye(2)) == pytest.approx(2.0, rel=1e-15)

    def test_vortex_radial_closed_form(self):
        v = make_example_field("vortex", d=1)
        for r in (0.3, 0.5, 0.9):
            got = area_integrand(v.jacobian_at((r, 0.0)))
            assert got == pytest.approx(math.sqrt(1.0 + 1.0 / r**2), rel=1e-12)

    @given(st.integers(2, 4), st.data())
    @settings(max_examples=60)
    def test_dominates_one_and_frobenius(self, n, data):
        J = np.array(
            data.draw(st.lists(st.lists(st.floats(-50, 50), min_size=n,
                                        max_size=n),
                               min_size=2, max_size=2))
        )
        a = area_integrand(J)
        assert a >= max(1.0, float(np.linalg.norm(J))) - 1e-12
        if np.linalg.norm(J) > 1e-7:  # below that, 1 + |J|^2 rounds to 1
            assert a > 1.0


class TestExampleFields:
    def test_vortex_chain_singular_points(self):
        f = make_example_field("vortex_chain", m=3)
        got = np.array([p for p, _ in f.singular_set.cells])
        expect = np.array([[0.0, 0.0], [0.5, 0.0], [0.75, 0.0]])
        assert np.allclose(got, expect, atol=1e-15)
        assert [m for _, m in f.singular_set.cells] == [1, -1, 1]

    def test_chain_centers_formula(self):
        centers, radii = chain_centers_radii(5)
        j = np.arange(1, 6)
        assert np.allclose(centers[:, 0], 1.0 - 2.0 ** (1 - j))
        assert np.allclose(radii, 2.0 ** (-(j + 1.0)))

    def test_planar_vortex_singular_segment(self):
        f = make_example_field("planar_vortex")
        (seg, mult), = f.singular_set.cells
        assert np.allclose(seg, [[0, 0, -1], [0, 0, 1]])
        assert f.singular_set.k == 1

    def test_chain_constant_components(self):
        f = make_example_field("vortex_chain", m=3)
        up = f.evaluate_many(np.array([[-0.7, 0.6], [0.3, 0.5], [0.9, 0.4]]))
        dn = f.evaluate_many(np.array([[-0.7, -0.6], [0.3, -0.5], [0.9, -0.4]]))
        assert np.allclose(up, [[1.0, 0.0]] * 3, atol=1e-15)
        assert np.allclose(dn, [[-1.0, 0.0]] * 3, atol=1e-15)

    def test_chain_is_continuous_across_seams(self, rng):
        f = make_example_field("vortex_chain", m=3)
        # straddle the vertical seams between squares, gaps and strips
        seams = [-0.25, 0.25, 0.375, 0.625, 0.6875, 0.8125]
        h = 1e-7
        for x1 in seams:
            ys = rng.uniform(-0.2, 0.2, 20)
            left = np.stack([np.full(20, x1 - h), ys], axis=1)
            right = np.stack([np.full(20, x1 + h), ys], axis=1)
            gap = np.linalg.norm(f.evaluate_many(left) - f.evaluate_many(right),
                                 axis=1)
            assert np.max(gap) < 1e-4

    def test_smooth_lift_values(self):
        f = make_example_field(
            "smooth_lift",
            f=lambda X: X[:, 0] ** 2 - X[:, 1],
            grad_f=lambda X: np.stack([2 * X[:, 0], -np.ones(len(X))], axis=1),
        )
        x = (0.3, 0.7)
        t = 0.3**2 - 0.7
        assert np.allclose(f.evaluate(x), (math.cos(t), math.sin(t)))

    def test_invalid_params(self):
        with pytest.raises(InvalidParams):
            make_example_field("vortex", d=1.5)
        with pytest.raises(InvalidParams):
            make_example_field("vortex_chain", m=0)
        with pytest.raises(InvalidParams):
            make_example_field("nonsense")
