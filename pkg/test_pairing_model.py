"""Tests for pairing_model: basis, operators and the integrability identities."""
import numpy as np
import pytest
from pydantic import ValidationError

from errors import InvalidSpec, PreconditionViolated
from pairing_model import (
    ModelSpec,
    build_hamiltonian,
    build_pair_operators,
    build_Q,
    build_R,
    casimir_constant,
    enumerate_basis,
    enumerate_pair_space,
    hamiltonian_stack,
    number_operator,
    reference_spec,
    su2_closure,
    verify_identities,
)

RNG = np.random.default_rng(11)


def random_couplings(count, radius=5.0):
    r = radius * np.sqrt(RNG.random(count))
    return list(r * np.exp(2j * np.pi * RNG.random(count)))


def comm(a, b):
    return a @ b - b @ a


class TestModelSpec:
    def test_flat_json_object(self):
        spec = ModelSpec.model_validate({"omega": [6, 4, 2], "epsilon": [0.0, 1.0, 2.3333], "pairs": 4, "zeta": 1.0})
        assert spec.levels == 3
        assert spec.capacity == 6
        assert spec.model_dump(mode="json") == {"omega": [6, 4, 2], "epsilon": [0.0, 1.0, 2.3333], "pairs": 4, "zeta": 1.0}

    @pytest.mark.parametrize("payload", [
        {"omega": [6, 3, 2], "epsilon": [0, 1, 2], "pairs": 4},
        {"omega": [6, 4, 2], "epsilon": [0, 1, 2], "pairs": 7},
        {"omega": [6, 4, 2], "epsilon": [0, 1], "pairs": 4},
        {"omega": [6, 4, 2], "epsilon": [0, 1, 2], "pairs": 4, "zeta": 1.5},
        {"omega": [6, 4, 2], "epsilon": [0, 1, 1], "pairs": 4},
    ])
    def test_invalid_specs_rejected(self, payload):
        with pytest.raises(ValidationError):
            ModelSpec.model_validate(payload)

    def test_frozen_and_hashable(self):
        assert hash(reference_spec()) == hash(reference_spec())
        with pytest.raises(ValidationError):
            reference_spec().pairs = 3

    def test_modified_copies_are_validated(self):
        spec = reference_spec(7 / 3)
        assert spec.with_epsilon3(1.5).epsilon == (0.0, 1.0, 1.5)
        assert spec.with_zeta(0.25).zeta == 0.25
        with pytest.raises(ValidationError):
            spec.with_epsilon3(1.0)


class TestBasis:
    def test_reference_basis(self):
        basis = enumerate_basis(reference_spec())
        assert basis.dim == 5
        assert basis.states == ((1, 2, 1), (2, 1, 1), (2, 2, 0), (3, 0, 1), (3, 1, 0))
        assert reference_spec().max_degree == 20

    @pytest.mark.parametrize("omega, pairs, dim", [
        ((2, 2), 2, 1),
        ((4, 4, 4), 2, 6),
        ((2, 2), 1, 2),
    ])
    def test_dimensions(self, omega, pairs, dim):
        spec = ModelSpec(omega=omega, epsilon=tuple(float(i) for i in range(len(omega))), pairs=pairs)
        assert enumerate_basis(spec).dim == dim

    def test_unvalidated_spec_still_checked(self):
        bad = ModelSpec.model_construct(omega=(3, 2), epsilon=(0.0, 1.0), pairs=1, zeta=1.0)
        with pytest.raises(InvalidSpec):
            enumerate_basis(bad)


class TestPairOperators:
    def setup_method(self):
        self.spec = ModelSpec(omega=(2, 2), epsilon=(0.0, 1.0), pairs=1)
        self.space = enumerate_pair_space(self.spec)
        self.ops = build_pair_operators(self.spec, self.space)

    def test_single_pair_element(self):
        index = self.space.index()
        raise1 = self.ops.creation[0].entries
        assert raise1[index[(1, 0)], index[(0, 0)]] == pytest.approx(2.0)

    def test_full_level_is_blocked(self):
        index = self.space.index()
        raise1 = self.ops.creation[0].entries
        assert np.all(raise1[:, index[(1, 0)]] == 0)
        assert np.all(raise1[:, index[(1, 1)]] == 0)

    def test_lowering_is_transpose(self):
        for up, down in zip(self.ops.creation, self.ops.annihilation):
            assert np.array_equal(up.entries.T, down.entries)

    def test_number_operator_entries(self):
        assert np.diag(self.ops.number[1].entries).real.tolist() == [2 * s[1] for s in self.space.states]

    def test_ladder_operators_vanish_on_fixed_pair_sector(self):
        ops = build_pair_operators(self.spec, enumerate_basis(self.spec))
        assert all(not np.any(op.entries) for op in ops.creation)

    @pytest.mark.parametrize("spec", [reference_spec(), ModelSpec(omega=(4, 4, 4), epsilon=(0.0, 1.0, 2.0), pairs=2)])
    def test_su2_closure(self, spec):
        for level in su2_closure(spec):
            assert max(level.values()) < 1e-12

    def test_to_dict_row_major(self):
        payload = self.ops.creation[0].to_dict()
        assert payload["label"] == "A+1"
        assert payload["dim"] == 4
        assert payload["entries"][2][0] == [2.0, 0.0]


class TestHamiltonian:
    def test_non_interacting_limit(self):
        h = build_hamiltonian(reference_spec(7 / 3), 0).entries
        assert np.allclose(h, np.diag(np.diag(h)))
        assert h[4, 4] == pytest.approx(2.0)  # state (3, 1, 0)

    def test_diagonal_at_zeta_zero(self):
        h = build_hamiltonian(reference_spec(7 / 3, zeta=0.0), 0.7 - 0.1j).entries
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0

    def test_real_symmetric_for_real_coupling(self):
        h = build_hamiltonian(reference_spec(), 0.45).entries
        assert np.allclose(h.imag, 0)
        assert np.allclose(h, h.T)
        assert np.max(np.abs(np.linalg.eigvals(h).imag)) < 1e-10

    def test_transpose_symmetry_for_complex_coupling(self):
        for g in random_couplings(5):
            h = build_hamiltonian(reference_spec(zeta=0.3), g).entries
            assert np.array_equal(h, h.T)

    def test_linear_in_coupling(self):
        spec = reference_spec(1.5, zeta=0.6)
        h0 = build_hamiltonian(spec, 0).entries
        h1 = build_hamiltonian(spec, 1).entries
        g = 0.8 - 1.3j
        assert np.allclose(build_hamiltonian(spec, g).entries, h0 + g * (h1 - h0), atol=1e-13)

    def test_stack_matches_single_builds(self):
        spec = reference_spec()
        gs = random_couplings(4)
        stack = hamiltonian_stack(spec, gs)
        assert stack.shape == (4, 5, 5)
        for g, h in zip(gs, stack):
            assert np.allclose(h, build_hamiltonian(spec, g).entries)

    def test_number_operator_is_constant(self):
        n = number_operator(reference_spec()).entries
        assert np.allclose(n, 8 * np.eye(5))


class TestIntegralsOfMotion:
    def test_R_at_zero_coupling(self):
        spec = reference_spec()
        states = enumerate_basis(spec).states
        for level in range(3):
            r = build_R(spec, 0, level).entries
            want = [s[level] - spec.omega[level] / 4 for s in states]
            assert np.allclose(r, np.diag(want))

    def test_R_commute(self):
        spec = reference_spec()
        g = 0.3 + 0.2j
        rs = [build_R(spec, g, level).entries for level in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                scale = np.linalg.norm(rs[i]) * np.linalg.norm(rs[j])
                assert np.linalg.norm(comm(rs[i], rs[j])) / scale < 1e-10

    def test_R_sum_gives_number_operator(self):
        spec = reference_spec()
        g = -0.7 + 0.4j
        total = 2 * sum(build_R(spec, g, level).entries for level in range(3)) + 6 * np.eye(5)
        assert np.allclose(total, 8 * np.eye(5))

    def test_R_level_out_of_range(self):
        with pytest.raises(IndexError):
            build_R(reference_spec(), 0.1, 3)

    def test_Q_at_zero_coupling(self):
        spec = reference_spec()
        q = build_Q(spec, 0).entries
        assert np.allclose(q, np.diag([s[0] for s in enumerate_basis(spec).states]))

    def test_Q_commutes_with_H_when_integrable(self):
        spec = reference_spec()
        g = 0.5 - 0.8j
        h, q = build_hamiltonian(spec, g).entries, build_Q(spec, g).entries
        assert np.linalg.norm(comm(h, q)) / (np.linalg.norm(h) * np.linalg.norm(q)) < 1e-10

    def test_Q_fails_to_commute_off_integrability(self):
        spec = reference_spec(zeta=0.5)
        h, q = build_hamiltonian(spec, 0.5).entries, build_Q(spec, 0.5).entries
        assert np.linalg.norm(comm(h, q)) > 1e-3

    def test_Q_needs_zero_first_energy(self):
        spec = ModelSpec(omega=(6, 4, 2), epsilon=(0.5, 1.0, 2.0), pairs=4)
        with pytest.raises(PreconditionViolated):
            build_Q(spec, 0.1)

    def test_Q_needs_three_levels(self):
        spec = ModelSpec(omega=(4, 4), epsilon=(0.0, 1.0), pairs=2)
        with pytest.raises(PreconditionViolated):
            build_Q(spec, 0.1)


class TestVerifyIdentities:
    def test_integrable_spec_passes(self):
        report = verify_identities(reference_spec(), random_couplings(10))
        assert report.passed, report.residuals
        assert report.residuals["[H,Q]"] < 1e-10

    def test_trace_constant_matches_closed_form(self):
        spec = reference_spec(1.5)
        gs = random_couplings(6)
        report = verify_identities(spec, gs)
        for fitted, closed in zip(report.constants, report.closed_form_constants):
            assert abs(fitted - closed) < 1e-9 * (1 + abs(closed))

    def test_closed_form_constant_at_zero(self):
        spec = reference_spec(7 / 3)
        assert casimir_constant(spec, 0) == pytest.approx((0 * 6 + 1 * 4 + 7 / 3 * 2) / 2)

    def test_non_integrable_flagged(self):
        report = verify_identities(reference_spec(zeta=0.5), random_couplings(4))
        assert "[H,R_l]" in report.failures
        assert "[R_i,R_j]" not in report.failures
        assert not report.passed

    def test_real_couplings_tight(self):
        gs = list(np.linspace(-2.0, 2.0, 7))
        report = verify_identities(reference_spec(), gs, tol=1e-12)
        assert report.passed, report.residuals

    def test_no_second_integral_reported_as_absent(self):
        spec = ModelSpec(omega=(4, 4), epsilon=(0.0, 1.0), pairs=2)
        report = verify_identities(spec, random_couplings(3))
        assert report.residuals["[H,Q]"] is None
        assert report.passed
