"""Tests for degeneracy: clustering, the three classifiers and their agreement."""
import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

import degeneracy
from degeneracy import (
    CROSSING,
    EP,
    DegeneracySet,
    HIGHER_ORDER_CROSSING,
    QTest,
    classify,
    cluster_roots,
    discriminant_order,
    eigenvector_overlaps,
    find_degeneracies,
    functional_independence_residual,
    is_identity,
    monodromy,
    q_independence_test,
)
from discriminant import eigenvalues
from errors import AmbiguousClustering, ClassificationConflict, PreconditionViolated
from pairing_model import build_hamiltonian, enumerate_basis, reference_spec


@pytest.fixture(scope="module")
def integrable_set():
    return find_degeneracies(reference_spec(7 / 3))


@pytest.fixture(scope="module")
def diagonal_set():
    return find_degeneracies(reference_spec(1.5, zeta=0.0))


def of_kind(dset, kind):
    return [d for d in dset if d.kind == kind]


def exact_diagonal_crossings(eps3):
    """(g, multiplicity) of every zeta = 0 level crossing, from E = sum eps 2p - g sum (2p)^2."""
    eps = (Fraction(0), Fraction(1), Fraction(eps3))
    levels = [
        (sum(e * 2 * p for e, p in zip(eps, state)), sum((2 * p) ** 2 for p in state))
        for state in enumerate_basis(reference_spec(float(eps3))).states
    ]
    counts = Counter(
        (ea - eb) / (qa - qb)
        for (ea, qa), (eb, qb) in itertools.combinations(levels, 2)
        if qa != qb
    )
    return [(float(g), 2 * pairs) for g, pairs in sorted(counts.items())]


class TestClusterRoots:
    def test_close_pair_merges(self):
        dset = cluster_roots([2 + 1e-7, 2 - 1e-7, 5.0], 1e-5)
        assert dset.multiplicities() == [1, 2]
        double = next(d for d in dset if d.multiplicity == 2)
        assert abs(double.location - 2) < 1e-12
        assert dset.total_root_count == 3

    def test_ambiguous_gap(self):
        with pytest.raises(AmbiguousClustering):
            cluster_roots([1.0, 1.0 + 5e-5], 1e-5)

    def test_tighter_tolerance_resolves(self):
        assert cluster_roots([1.0, 1.0 + 5e-5], 1e-6).multiplicities() == [1, 1]

    def test_empty(self):
        assert len(cluster_roots([])) == 0


class TestIntegrableCensus:
    def test_two_crossings_twelve_eps(self, integrable_set):
        assert integrable_set.degree == 16
        assert len(integrable_set) == 14
        assert integrable_set.total_root_count == 16
        census = integrable_set.census()
        assert census[CROSSING] == 2
        assert census[EP] == 12
        assert sum(census.values()) == 14

    def test_crossings_on_real_axis(self, integrable_set):
        for d in of_kind(integrable_set, CROSSING):
            assert d.multiplicity == 2
            assert abs(d.location.imag) < 1e-6
            assert d.half_plane == "real"

    def test_six_eps_below_axis(self, integrable_set):
        lower = integrable_set.lower_half()
        assert len(lower) == 6
        assert all(d.kind == EP for d in lower)

    def test_conjugate_pairing(self, integrable_set):
        for d in integrable_set:
            if d.half_plane == "real":
                continue
            partner = min(integrable_set, key=lambda o: abs(o.location - d.location.conjugate()))
            assert abs(partner.location - d.location.conjugate()) < 1e-6
            assert (partner.multiplicity, partner.kind) == (d.multiplicity, d.kind)

    def test_crossing_evidence(self, integrable_set):
        for d in of_kind(integrable_set, CROSSING):
            ev = d.evidence
            assert ev.h_gap < 1e-5
            assert ev.q_gap > 1e-3
            assert ev.q_verdict == "crossing"
            assert ev.monodromy == "identity"
            assert ev.overlap < 0.01

    def test_ep_evidence(self, integrable_set):
        for d in of_kind(integrable_set, EP):
            ev = d.evidence
            assert ev.monodromy == "nontrivial"
            assert sum(i != p for i, p in enumerate(ev.permutation)) == 2
            assert ev.overlap > 0.99

    def test_fast_mode_same_kinds(self, integrable_set):
        fast = find_degeneracies(reference_spec(7 / 3), evidence=False)
        assert fast.census() == integrable_set.census()
        assert fast.degeneracies[0].evidence.overlap is None


class TestDiagonalLimit:
    def test_no_exceptional_points(self, diagonal_set):
        assert diagonal_set.degree == 16
        assert diagonal_set.census()[EP] == 0
        assert {d.kind for d in diagonal_set} <= {CROSSING, HIGHER_ORDER_CROSSING}
        assert all(d.half_plane == "real" for d in diagonal_set)

    def test_multiplicities(self, diagonal_set):
        assert diagonal_set.multiplicities() == [2, 2, 2, 4, 6]
        where = sorted((d.location.real, d.multiplicity) for d in diagonal_set)
        assert [m for _, m in where] == [2, 2, 4, 2, 6]
        assert [x for x, _ in where] == pytest.approx([-0.375, -0.3125, -0.25, -0.1875, -0.125], abs=1e-5)

    def test_sextuple_is_a_triple_crossing(self, diagonal_set):
        sextuple = next(d for d in diagonal_set if d.multiplicity == 6)
        assert sextuple.kind == HIGHER_ORDER_CROSSING
        values = np.sort(eigenvalues(build_hamiltonian(reference_spec(1.5, zeta=0.0), sextuple.location)).values.real)
        gaps = np.diff(values)
        close = np.sum(gaps < 1e-6)
        assert close == 2
        assert values[np.argmin(np.abs(values - 8.0))] == pytest.approx(8.0, abs=1e-6)

    def test_other_diagonal_point(self):
        dset = find_degeneracies(reference_spec(7 / 3, zeta=0.0), evidence=False)
        assert dset.multiplicities() == [2, 2, 2, 2, 2, 2, 4]
        quad = next(d for d in dset if d.multiplicity == 4)
        assert quad.location.real == pytest.approx(-0.25, abs=1e-6)

    @pytest.mark.parametrize("eps3", [Fraction(3, 2), Fraction(7, 3)])
    def test_matches_exact_level_crossings(self, eps3):
        dset = find_degeneracies(reference_spec(float(eps3), zeta=0.0), evidence=False)
        exact = exact_diagonal_crossings(eps3)
        assert sum(m for _, m in exact) == dset.degree
        assert [m for _, m in exact] == [d.multiplicity for d in dset]
        for (g, _), d in zip(exact, dset):
            assert abs(d.location - g) < 1e-8

    def test_split_roots_snap_to_exact_crossings(self):
        roots = [-0.125 + 0.02 * np.exp(1j * np.pi * k / 3) for k in range(6)]
        roots += [-0.25 + 0.015 * np.exp(1j * np.pi * (k / 2 + 0.25)) for k in range(4)]
        for g in (-0.375, -0.3125, -0.1875):
            roots += [g - 0.003, g + 0.003]
        dset = cluster_roots(roots, 1e-5, spec=reference_spec(1.5, zeta=0.0))
        exact = exact_diagonal_crossings(Fraction(3, 2))
        assert [d.multiplicity for d in dset] == [m for _, m in exact]
        for (g, _), d in zip(exact, dset):
            assert abs(d.location - g) < 1e-10


class TestDiscriminantOrder:
    @pytest.mark.parametrize("g, order", [(-0.125, 6), (-0.25, 4), (-0.1875, 2), (0.3 + 0.1j, 0)])
    def test_diagonal_points(self, g, order):
        assert discriminant_order(reference_spec(1.5, zeta=0.0), g) == order

    def test_exceptional_point(self, integrable_set):
        ep = of_kind(integrable_set, EP)[0]
        assert discriminant_order(reference_spec(7 / 3), ep.location) == 1

    def test_integrable_crossing(self, integrable_set):
        crossing = of_kind(integrable_set, CROSSING)[0]
        assert discriminant_order(reference_spec(7 / 3), crossing.location) == 2


class TestNonIntegrable:
    def test_full_degree(self):
        dset = find_degeneracies(reference_spec(7 / 3, zeta=0.5), evidence=False)
        assert dset.degree == 20
        assert dset.total_root_count == 20

    @pytest.mark.parametrize("eps3", [7 / 3, 1.5])
    @pytest.mark.parametrize("zeta", [0.5, 0.9])
    def test_every_ep_swaps_two_levels(self, eps3, zeta):
        dset = find_degeneracies(reference_spec(eps3, zeta=zeta))
        assert dset.degree == 20
        eps = of_kind(dset, EP)
        assert eps
        for d in eps:
            ev = d.evidence
            assert ev.monodromy == "nontrivial"
            assert sum(i != p for i, p in enumerate(ev.permutation)) == 2
            assert ev.overlap > 0.9


class TestQTest:
    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            q_independence_test(reference_spec(zeta=0.5), 0.1)

    def test_generic_point(self):
        spec = reference_spec()
        result = q_independence_test(spec, 0.3 + 0.45j)
        assert result.h_gap == pytest.approx(eigenvalues(build_hamiltonian(spec, 0.3 + 0.45j)).min_gap())
        assert result.q_dim >= 2

    def test_verdict_bands(self):
        assert QTest(0.0, 5e-3, 2, 1.0).verdict == "crossing"
        assert QTest(0.0, 5e-5, 2, 1.0).verdict == "coalescence"
        assert QTest(0.0, 5e-4, 2, 1.0).verdict is None
        assert QTest(0.0, 5e-3, 2, 10.0).verdict is None


class TestMonodromy:
    def test_loop_without_roots(self):
        perm = monodromy(reference_spec(1.5, zeta=0.0), 2 + 2j, 0.5, 64)
        assert is_identity(perm)

    def test_loop_around_ep_swaps_two(self, integrable_set):
        ep = integrable_set.lower_half()[0]
        others = [d.location for d in integrable_set if d is not ep]
        radius = 0.2 * min(abs(ep.location - o) for o in others)
        perm = monodromy(reference_spec(7 / 3), ep.location, radius)
        assert sum(i != p for i, p in enumerate(perm)) == 2

    def test_loop_around_crossing_is_identity(self, integrable_set):
        crossing = of_kind(integrable_set, CROSSING)[0]
        others = [d.location for d in integrable_set if d is not crossing]
        radius = 0.2 * min(abs(crossing.location - o) for o in others)
        assert is_identity(monodromy(reference_spec(7 / 3), crossing.location, radius))


class TestEigenvectorTests:
    def test_overlap_sequences(self, integrable_set):
        spec = reference_spec(7 / 3)
        ep = integrable_set.lower_half()[0]
        crossing = of_kind(integrable_set, CROSSING)[0]
        assert eigenvector_overlaps(spec, ep.location)[-1] > 0.99
        assert eigenvector_overlaps(spec, crossing.location)[-1] < 0.01
        assert len(eigenvector_overlaps(spec, ep.location, depth=2)) == 3

    def test_functional_independence(self, integrable_set):
        spec = reference_spec(7 / 3)
        crossing = of_kind(integrable_set, CROSSING)[0]
        assert functional_independence_residual(spec, 0.3 + 0.4j) < 1e-6
        assert functional_independence_residual(spec, crossing.location) > 1e-6


class TestConflicts:
    def test_disagreement_is_raised(self, integrable_set, monkeypatch):
        crossings = [d for d in integrable_set if d.multiplicity == 2]
        clusters = DegeneracySet(tuple(crossings), degree=integrable_set.degree)
        monkeypatch.setattr(degeneracy, "q_independence_test",
                            lambda spec, g0: QTest(h_gap=0.0, q_gap=1e-9, q_dim=2, q_scale=1.0))
        with pytest.raises(ClassificationConflict):
            classify(reference_spec(7 / 3), clusters, workers=1)
