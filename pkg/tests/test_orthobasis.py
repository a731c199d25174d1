import numpy as np
import pytest
from conftest import box_quadrature, random_polynomial

from cdmos.measures import (CountingHypercube, UniformBox, dirac_moments,
                            moments)
from cdmos.orthobasis import (BasisConstructionError, build_basis, cd_kernel,
                              christoffel, from_ortho_coords, gram_matrix,
                              ortho_expansion_poly, reproduce, to_ortho_coords)
from cdmos.polyring import Polynomial

UNIT = UniformBox((-1.0,), (1.0,))


class TestBuildBasis:
    def test_unit_interval_degree_one(self):
        B = build_basis(UNIT, 1)
        T0 = B.ortho_polynomial((0,))
        T1 = B.ortho_polynomial((1,))
        assert T0 == Polynomial.constant(1, 1.0)
        # quadrature oracle: mean zero, unit norm
        assert box_quadrature(lambda x: T1(x), [-1], [1]) == pytest.approx(0, abs=1e-12)
        assert box_quadrature(lambda x: T1(x) ** 2, [-1], [1]) == pytest.approx(1, abs=1e-10)
        assert T1.terms[(1,)] == pytest.approx(np.sqrt(3.0), abs=1e-12)

    def test_unit_interval_degree_two_matches_gram_schmidt(self):
        # independent Gram-Schmidt oracle on {1, x, x^2} via quadrature
        inner = lambda p, q: box_quadrature(lambda x: p(x) * q(x), [-1], [1])
        basis = [lambda x: 1.0, lambda x: x[0], lambda x: x[0] ** 2]
        ortho = []
        for f in basis:
            g = f
            for h in ortho:
                c = inner(g, h)
                g = (lambda x, g=g, h=h, c=c: g(x) - c * h(x))
            nrm = np.sqrt(inner(g, g))
            ortho.append(lambda x, g=g, nrm=nrm: g(x) / nrm)
        B = build_basis(UNIT, 2)
        T2 = B.ortho_polynomial((2,))
        for xv in np.linspace(-1, 1, 7):
            assert T2((xv,)) == pytest.approx(ortho[2]((xv,)), abs=1e-9)
        # closed form sqrt(5) (3x^2 - 1)/2
        assert T2.terms[(2,)] == pytest.approx(np.sqrt(5) * 1.5, abs=1e-12)
        assert T2.terms[(0,)] == pytest.approx(-np.sqrt(5) / 2, abs=1e-12)

    def test_hypercube_degree_one_is_monomials(self):
        B = build_basis(CountingHypercube(2), 1)
        np.testing.assert_allclose(B.D, np.eye(3), atol=1e-14)

    def test_hypercube_degree_two_fails(self):
        with pytest.raises(BasisConstructionError, match="degree 2"):
            build_basis(CountingHypercube(2), 2)

    def test_cholesky_route_singular_gram_names_degree(self):
        with pytest.raises(BasisConstructionError, match="degree"):
            build_basis(CountingHypercube(1), 3, method="cholesky")

    def test_degree_cap(self):
        with pytest.raises(BasisConstructionError, match="cap"):
            build_basis(UNIT, 9)
        build_basis(UNIT, 9, degree_cap=9)  # override allowed

    @pytest.mark.parametrize("measure,t", [
        (UNIT, 4),
        (UniformBox((0.0, -2.0), (1.5, 1.0)), 3),
        (CountingHypercube(3), 1),
    ])
    def test_tensor_equals_cholesky(self, measure, t):
        Dt = build_basis(measure, t, method="tensor").D
        Dc = build_basis(measure, t, method="cholesky").D
        assert np.max(np.abs(Dt - Dc)) <= 1e-8

    @pytest.mark.parametrize("measure,tmax", [
        (UNIT, 4),
        (UniformBox((-1.0, -1.0), (1.0, 1.0)), 4),
        (CountingHypercube(2), 1),
    ])
    def test_structure_invariants(self, measure, tmax):
        B = build_basis(measure, tmax)
        # lower triangular with positive diagonal, and D G D' = I
        assert np.allclose(B.D, np.tril(B.D))
        assert (np.diag(B.D) > 0).all()
        G = gram_matrix(measure, tmax)
        assert np.max(np.abs(B.D @ G @ B.D.T - np.eye(len(G)))) <= 1e-8

    @pytest.mark.parametrize("measure,tmax", [
        (UNIT, 4), (UniformBox((-1.0, -1.0), (1.0, 1.0)), 3)])
    def test_orthonormality_against_quadrature(self, measure, tmax):
        B = build_basis(measure, tmax)
        polys = [B.ortho_polynomial(a) for a in B.basis]
        for i, p in enumerate(polys):
            for j in range(i, len(polys)):
                q = polys[j]
                val = box_quadrature(lambda x: p(x) * q(x), measure.lo, measure.hi)
                assert val == pytest.approx(1.0 if i == j else 0.0, abs=1e-8)


class TestOrthoCoords:
    def test_dirac_gives_ortho_values(self, rng):
        B = build_basis(UNIT, 3)
        for _ in range(5):
            xi = (float(rng.uniform(-1, 1)),)
            sigma = to_ortho_coords(dirac_moments(xi, 3), B)
            np.testing.assert_allclose(sigma, B.eval_all(xi), atol=1e-10)

    def test_reference_measure_gives_first_unit_vector(self):
        B = build_basis(UNIT, 3)
        sigma = to_ortho_coords(moments(UNIT, 3), B)
        e1 = np.zeros(4)
        e1[0] = 1.0
        np.testing.assert_allclose(sigma, e1, atol=1e-12)

    def test_round_trip(self, rng):
        B = build_basis(UniformBox((-1.0, 0.0), (1.0, 2.0)), 2)
        y = rng.standard_normal(len(B.basis))
        from cdmos.measures import make_moment_sequence
        ms = make_moment_sequence(2, 2, y)
        sigma = to_ortho_coords(ms, B)
        np.testing.assert_allclose(from_ortho_coords(sigma, B), y, atol=1e-10)

    def test_size_mismatch(self):
        B = build_basis(UNIT, 2)
        with pytest.raises(ValueError):
            to_ortho_coords(moments(UNIT, 3), B)


class TestKernel:
    def test_value_at_endpoint(self):
        B = build_basis(UNIT, 2)
        assert cd_kernel(B, (-1.0,), (-1.0,)) == pytest.approx(9.0, abs=1e-10)

    def test_symmetry(self, rng):
        B = build_basis(UniformBox((-1.0, -1.0), (1.0, 1.0)), 2)
        for _ in range(10):
            x = tuple(rng.uniform(-1, 1, size=2))
            y = tuple(rng.uniform(-1, 1, size=2))
            assert cd_kernel(B, x, y) == pytest.approx(cd_kernel(B, y, x), rel=1e-13)

    def test_diagonal_at_least_one(self, rng):
        B = build_basis(UNIT, 3)
        for _ in range(100):
            x = (float(rng.uniform(-1, 1)),)
            assert cd_kernel(B, x, x) >= 1.0 - 1e-12


class TestReproduce:
    def test_linear_at_point(self):
        B = build_basis(UNIT, 2)
        x = Polynomial.variable(1, 0)
        assert reproduce(B, x, (0.7,)) == pytest.approx(0.7, abs=1e-10)

    def test_constant(self, rng):
        B = build_basis(UNIT, 2)
        one = Polynomial.constant(1, 1.0)
        for _ in range(5):
            x = (float(rng.uniform(-1, 1)),)
            assert reproduce(B, one, x) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("measure,t", [
        (UNIT, 3), (UniformBox((-1.0, -1.0), (1.0, 1.0)), 2)])
    def test_random_pairs(self, measure, t, rng):
        B = build_basis(measure, t)
        n = measure.n
        for _ in range(50):
            p = random_polynomial(rng, n, int(rng.integers(0, t + 1)))
            x = tuple(rng.uniform(-1, 1, size=n))
            assert reproduce(B, p, x) == pytest.approx(p(x), abs=1e-8)

    def test_degree_overflow(self):
        B = build_basis(UNIT, 2)
        x = Polynomial.variable(1, 0)
        with pytest.raises(ValueError):
            reproduce(B, x * x * x, (0.0,))


class TestChristoffel:
    def test_reciprocal_of_kernel(self, rng):
        B = build_basis(UNIT, 2)
        assert christoffel(B, (-1.0,)) == pytest.approx(1 / 9, abs=1e-10)
        for _ in range(10):
            x = (float(rng.uniform(-1, 1)),)
            assert christoffel(B, x) * cd_kernel(B, x, x) == pytest.approx(1.0, rel=1e-13)

    def test_degree_zero_is_one(self, rng):
        B = build_basis(UNIT, 0)
        for _ in range(5):
            assert christoffel(B, (float(rng.uniform(-1, 1)),)) == 1.0


def test_ortho_expansion_poly_inverts_eval(rng):
    B = build_basis(UNIT, 3)
    sigma = rng.standard_normal(len(B.basis))
    p = ortho_expansion_poly(sigma, B)
    for xv in np.linspace(-1, 1, 5):
        assert p((xv,)) == pytest.approx(float(sigma @ B.eval_all((xv,))), rel=1e-10, abs=1e-10)
