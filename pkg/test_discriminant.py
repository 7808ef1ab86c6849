"""Tests for discriminant: D(g) evaluation, reconstruction and roots."""
import numpy as np
import pytest

from discriminant import (
    ComplexPolynomial,
    discriminant_at,
    discriminant_of_matrix,
    discriminant_polynomial,
    eigenvalues,
    polynomial_roots,
)
from pairing_model import ModelSpec, build_hamiltonian, reference_spec

RNG = np.random.default_rng(5)


def random_couplings(count, radius=3.0):
    r = radius * np.sqrt(RNG.random(count))
    return r * np.exp(2j * np.pi * RNG.random(count))


@pytest.fixture(scope="module")
def integrable_poly():
    return discriminant_polynomial(reference_spec(7 / 3))


class TestEigenvalues:
    def test_diagonal_matrix(self):
        values = sorted(eigenvalues(build_hamiltonian(reference_spec(), 0)).values.real)
        assert values == pytest.approx(sorted([26 / 3, 20 / 3, 4.0, 14 / 3, 2.0]))

    def test_hermitian_case_is_real(self):
        values = eigenvalues(build_hamiltonian(reference_spec(), 0.37)).values
        assert len(values) == 5
        assert np.max(np.abs(values.imag)) < 1e-10

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            eigenvalues(np.zeros((2, 3)))


class TestDiscriminantAt:
    @pytest.mark.parametrize("a, b, c", [(1.0, 0.5, 3.0), (1 + 1j, 0.3j, -0.5)])
    def test_two_by_two_closed_form(self, a, b, c):
        d = discriminant_of_matrix(np.array([[a, b], [b, c]], dtype=complex))
        assert complex(d) == pytest.approx((a - c) ** 2 + 4 * b ** 2)

    def test_log_and_phase_consistent(self):
        d = discriminant_at(reference_spec(), 1.2 - 0.4j)
        assert np.exp(d.log_abs) == pytest.approx(abs(d.value))
        assert np.exp(1j * d.phase) == pytest.approx(d.value / abs(d.value))

    def test_vanishes_at_coincidence(self):
        h = np.diag([1.0, 1.0, 2.0]).astype(complex)
        assert abs(discriminant_of_matrix(h)) < 1e-12

    def test_conjugate_symmetry(self):
        spec = reference_spec(1.5, zeta=0.4)
        for g in random_couplings(20):
            d, dc = discriminant_at(spec, g).value, discriminant_at(spec, np.conj(g)).value
            assert dc == pytest.approx(np.conj(d), rel=1e-9)


class TestDiscriminantPolynomial:
    @pytest.mark.parametrize("epsilon3", [1.5, 1.8499, 7 / 3])
    @pytest.mark.parametrize("zeta, degree", [(0.0, 16), (1.0, 16), (0.1, 20), (0.5, 20), (0.9, 20)])
    def test_degree_law(self, epsilon3, zeta, degree):
        assert discriminant_polynomial(reference_spec(epsilon3, zeta=zeta)).degree == degree

    def test_single_state_is_empty_product(self):
        poly = discriminant_polynomial(ModelSpec(omega=(2, 2), epsilon=(0.0, 1.0), pairs=2))
        assert poly.degree == 0
        assert poly(0.7 + 0.2j) == pytest.approx(1.0)

    def test_real_coefficients(self, integrable_poly):
        assert np.all(integrable_poly.coeffs.imag == 0)

    def test_matches_product_formula(self, integrable_poly):
        spec = reference_spec(7 / 3)
        for g in random_couplings(50):
            direct = discriminant_at(spec, g).value
            rebuilt = integrable_poly(g)
            assert abs(rebuilt - direct) < 1e-8 * max(abs(rebuilt), integrable_poly.scale(g))

    def test_matches_product_formula_off_integrability(self):
        spec = reference_spec(1.5, zeta=0.5)
        poly = discriminant_polynomial(spec)
        for g in random_couplings(20, radius=6.0):
            direct = discriminant_at(spec, g).value
            assert abs(poly(g) - direct) < 1e-8 * max(abs(direct), poly.scale(g))

    def test_error_estimates_carried(self, integrable_poly):
        assert integrable_poly.errors is not None
        assert len(integrable_poly.errors) == integrable_poly.degree + 1
        g = 0.4 + 0.1j
        assert 0 < integrable_poly.noise(g) < 1e-8 * integrable_poly.scale(g)

    def test_json_shape(self, integrable_poly):
        payload = integrable_poly.to_dict()
        assert payload["degree"] == 16
        assert len(payload["coeffs"]) == 17
        again = ComplexPolynomial.from_dict(payload)
        assert np.array_equal(again.coeffs, integrable_poly.coeffs)


class TestSmallCouplings:
    def test_constant_term(self, integrable_poly):
        direct = discriminant_at(reference_spec(7 / 3), 0).value
        assert abs(integrable_poly(0) - direct) < 1e-8 * abs(direct)

    @pytest.mark.parametrize("g", [0.05j, -0.05, -0.03 + 0.04j, 0.02 - 0.06j, -0.053 + 0.074j])
    def test_agrees_with_direct_evaluation(self, integrable_poly, g):
        direct = discriminant_at(reference_spec(7 / 3), g).value
        assert abs(integrable_poly(g) - direct) < 1e-6 * abs(direct)

    def test_agrees_off_integrability(self):
        spec = reference_spec(1.5, zeta=0.5)
        poly = discriminant_polynomial(spec)
        for g in (0.0, 0.04 - 0.02j, -0.07j):
            direct = discriminant_at(spec, g).value
            assert abs(poly(g) - direct) < 1e-6 * abs(direct)


class TestPolynomialRoots:
    def test_double_root(self):
        poly = ComplexPolynomial(np.array([4.0, -4.0, 1.0], dtype=complex))
        roots = polynomial_roots(poly)
        assert len(roots) == 2
        assert all(abs(r - 2) < 1e-6 for r in roots)

    def test_known_roots_recovered(self):
        want = np.array([-2.1, -0.7 + 0.3j, -0.7 - 0.3j, 0.25, 1.0 + 1.5j, 1.9, 3.3 - 0.8j, 4.2])
        poly = ComplexPolynomial(np.polynomial.polynomial.polyfromroots(want))
        got = np.array(polynomial_roots(poly))
        for w in want:
            assert np.min(np.abs(got - w)) < 1e-8

    def test_constant_has_no_roots(self):
        assert polynomial_roots(ComplexPolynomial(np.array([3.0 + 0j]))) == []

    def test_integrable_census_of_raw_roots(self, integrable_poly):
        roots = polynomial_roots(integrable_poly)
        assert len(roots) == 16
        near_axis = sorted((r for r in roots if abs(r.imag) < 1e-3 * (1 + abs(r))), key=lambda z: z.real)
        assert len(near_axis) == 4
        # two double roots, each possibly split slightly off the axis
        assert abs(near_axis[1] - near_axis[0]) < 1e-3 * (1 + abs(near_axis[0]))
        assert abs(near_axis[3] - near_axis[2]) < 1e-3 * (1 + abs(near_axis[2]))
        assert near_axis[2].real - near_axis[1].real > 1e-2

    def test_conjugate_closure(self, integrable_poly):
        roots = np.array(polynomial_roots(integrable_poly))
        for r in roots:
            assert np.min(np.abs(roots - np.conj(r))) < 1e-6 * (1 + abs(r))

    def test_roots_are_local_minima(self, integrable_poly):
        spec = reference_spec(7 / 3)
        stencil = [1e-4 * np.exp(1j * np.pi * k / 4) for k in range(8)]
        for r in polynomial_roots(integrable_poly):
            here = abs(discriminant_at(spec, r).value)
            around = min(abs(discriminant_at(spec, r + s).value) for s in stencil)
            assert here <= around

    def test_eigenvalues_coincide_at_single_root(self, integrable_poly):
        roots = polynomial_roots(integrable_poly)
        r = max(roots, key=lambda z: abs(z.imag))
        spec = reference_spec(7 / 3)
        assert eigenvalues(build_hamiltonian(spec, r)).min_gap() < 1e-4
        assert eigenvalues(build_hamiltonian(spec, r + 0.3)).min_gap() > 1e-2
