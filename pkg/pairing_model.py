"""pairing_model: the seniority-zero pair basis and every operator of the
three-level pairing family, as dense complex matrices.

Each level j is one SU(2) multiplet in the pair representation:
K0_j = N_j/2 - Omega_j/4, K+_j = A+_j/2 with

    <p_j + 1| A+_j |p_j> = 2 sqrt((Omega_j/2 - p_j)(p_j + 1)).

With that element K+ carries the standard ladder normalisation, so the exact
closure is [K+, K-] = 2 K0 and [K0, K+-] = +-K+-. It is also the only
normalisation under which the integrals of motion (the 4g prefactor), the
Hamiltonian H = 2 sum eps_i R_i + C and the second integral Q hold together.

A single A+_j changes the pair number, so on the fixed-P sector it vanishes
identically. Ladder operators therefore live on the full pair space (every
occupation vector, any total), and the P-conserving bilinears are computed
there and restricted to the sector. The restriction is exact.

Everything is pure: the cached building blocks are read-only arrays keyed on
the (frozen, hashable) ModelSpec.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

import config
from errors import DegenerateEpsilon, DimensionMismatch, InvalidSpec, PreconditionViolated

REFERENCE_OMEGA = (6, 4, 2)
REFERENCE_PAIRS = 4


def _check_spec(spec: "ModelSpec") -> None:
    """Raise InvalidSpec / DegenerateEpsilon unless the spec invariants hold."""
    if len(spec.omega) < 2:
        raise InvalidSpec(f"need at least 2 levels, got {len(spec.omega)}")
    if len(spec.epsilon) != len(spec.omega):
        raise InvalidSpec(
            f"epsilon has {len(spec.epsilon)} entries for {len(spec.omega)} levels"
        )
    for j, omega in enumerate(spec.omega):
        if omega <= 0 or omega % 2:
            raise InvalidSpec(f"level {j + 1}: degeneracy {omega} must be a positive even integer")
    capacity = sum(spec.omega) // 2
    if spec.pairs < 1 or spec.pairs > capacity:
        raise InvalidSpec(f"{spec.pairs} pairs do not fit into capacity {capacity}")
    if not 0.0 <= spec.zeta <= 1.0:
        raise InvalidSpec(f"zeta={spec.zeta} outside [0, 1]")
    eps = spec.epsilon
    for a, b in itertools.combinations(range(len(eps)), 2):
        if eps[a] == eps[b]:
            raise DegenerateEpsilon(f"epsilon_{a + 1} == epsilon_{b + 1} == {eps[a]}")


class ModelSpec(BaseModel):
    """One member of the model family. Serialises as the flat JSON object
    {"omega": [...], "epsilon": [...], "pairs": P, "zeta": z}."""

    model_config = ConfigDict(frozen=True)

    omega: tuple[int, ...] = Field(..., description="Particle degeneracy Omega_j per level (even, > 0)")
    epsilon: tuple[float, ...] = Field(..., description="Single-particle energy per level, pairwise distinct")
    pairs: int = Field(..., description="Total pair number P")
    zeta: float = Field(1.0, description="Integrability mixing: 1 = pairing limit, 0 = diagonal limit")

    @model_validator(mode="after")
    def _invariants(self):
        _check_spec(self)
        return self

    @property
    def levels(self) -> int:
        return len(self.omega)

    @property
    def capacity(self) -> int:
        return sum(self.omega) // 2

    @property
    def max_degree(self) -> int:
        n = basis_dimension(self)
        return n * (n - 1)

    def has_second_integral(self) -> bool:
        """Q(g) exists for three levels with epsilon_1 = 0."""
        return self.levels == 3 and self.epsilon[0] == 0.0

    def with_epsilon3(self, value: float) -> "ModelSpec":
        eps = list(self.epsilon)
        eps[2] = float(value)
        return ModelSpec(omega=self.omega, epsilon=tuple(eps), pairs=self.pairs, zeta=self.zeta)

    def with_zeta(self, value: float) -> "ModelSpec":
        return ModelSpec(omega=self.omega, epsilon=self.epsilon, pairs=self.pairs, zeta=float(value))


def reference_spec(epsilon3: float = 7 / 3, zeta: float = 1.0) -> ModelSpec:
    """Omega = (6, 4, 2), eps = (0, 1, eps3), four pairs."""
    return ModelSpec(omega=REFERENCE_OMEGA, epsilon=(0.0, 1.0, float(epsilon3)), pairs=REFERENCE_PAIRS, zeta=zeta)


@dataclass(frozen=True)
class PairBasis:
    """Ordered occupation vectors (p_1, ..., p_L). `pairs` is None for the
    full pair space."""

    states: tuple[tuple[int, ...], ...]
    pairs: int | None = None

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self) -> dict[tuple[int, ...], int]:
        return {state: i for i, state in enumerate(self.states)}


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    label: str
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_dict(self) -> dict:
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(self.entries, dtype=complex)]
        return {"label": self.label, "dim": self.dim, "entries": rows}


@dataclass(frozen=True)
class PairOperators:
    creation: tuple[OperatorMatrix, ...]
    annihilation: tuple[OperatorMatrix, ...]
    number: tuple[OperatorMatrix, ...]

    def as_list(self) -> list[OperatorMatrix]:
        out = []
        for ops in zip(self.creation, self.annihilation, self.number):
            out.extend(ops)
        return out


def enumerate_basis(spec: ModelSpec) -> PairBasis:
    """All (p_1..p_L) with sum P and 0 <= p_j <= Omega_j/2, lexicographic."""
    _check_spec(spec)
    ranges = [range(omega // 2 + 1) for omega in spec.omega]
    states = tuple(s for s in itertools.product(*ranges) if sum(s) == spec.pairs)
    return PairBasis(states=states, pairs=spec.pairs)


def enumerate_pair_space(spec: ModelSpec) -> PairBasis:
    _check_spec(spec)
    ranges = [range(omega // 2 + 1) for omega in spec.omega]
    return PairBasis(states=tuple(itertools.product(*ranges)), pairs=None)


def basis_dimension(spec: ModelSpec) -> int:
    return _blocks(spec).sector.dim


def _check_basis(spec: ModelSpec, basis: PairBasis) -> None:
    if len(set(basis.states)) != basis.dim:
        raise DimensionMismatch("basis states are not distinct")
    for state in basis.states:
        if len(state) != spec.levels:
            raise DimensionMismatch(f"state {state} has {len(state)} levels, spec has {spec.levels}")
        if any(p < 0 or p > omega // 2 for p, omega in zip(state, spec.omega)):
            raise DimensionMismatch(f"state {state} exceeds the occupancy bounds {spec.omega}")
        if basis.pairs is not None and sum(state) != basis.pairs:
            raise DimensionMismatch(f"state {state} does not hold {basis.pairs} pairs")


def build_pair_operators(spec: ModelSpec, basis: PairBasis) -> PairOperators:
    """A+_j, A_j and N_j for every level on the given basis.

    Pass the full pair space to get non-trivial ladder operators; on a fixed-P
    sector the single ladder operators are zero matrices.
    """
    _check_basis(spec, basis)
    index = basis.index()
    n = basis.dim
    creation, annihilation, number = [], [], []
    for j, omega in enumerate(spec.omega):
        raise_ = np.zeros((n, n), dtype=complex)
        for col, state in enumerate(basis.states):
            p = state[j]
            target = state[:j] + (p + 1,) + state[j + 1:]
            row = index.get(target)
            if row is not None:
                raise_[row, col] = 2.0 * np.sqrt((omega / 2 - p) * (p + 1))
        num = np.diag([2.0 * state[j] for state in basis.states]).astype(complex)
        creation.append(OperatorMatrix(f"A+{j + 1}", raise_))
        annihilation.append(OperatorMatrix(f"A{j + 1}", raise_.T.copy()))
        number.append(OperatorMatrix(f"N{j + 1}", num))
    return PairOperators(tuple(creation), tuple(annihilation), tuple(number))


@dataclass(frozen=True, eq=False)
class _Blocks:
    """Cached pieces for one spec. Full-space operators plus sector slices."""

    space: PairBasis
    sector: PairBasis
    sector_index: np.ndarray
    ops: PairOperators
    k0: tuple[np.ndarray, ...]
    kp: tuple[np.ndarray, ...]
    km: tuple[np.ndarray, ...]
    h0: np.ndarray = field(repr=False)
    h1: np.ndarray = field(repr=False)

    def restrict(self, full: np.ndarray) -> np.ndarray:
        idx = self.sector_index
        return full[np.ix_(idx, idx)]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=256)
def _blocks(spec: ModelSpec) -> _Blocks:
    space = enumerate_pair_space(spec)
    sector = enumerate_basis(spec)
    where = space.index()
    sector_index = np.array([where[s] for s in sector.states], dtype=int)
    ops = build_pair_operators(spec, space)
    eye = np.eye(space.dim, dtype=complex)

    k0 = tuple(_frozen(0.5 * n.entries - 0.25 * omega * eye) for n, omega in zip(ops.number, spec.omega))
    kp = tuple(_frozen(0.5 * a.entries) for a in ops.creation)
    km = tuple(_frozen(0.5 * a.entries) for a in ops.annihilation)

    idx = np.ix_(sector_index, sector_index)
    single = sum(eps * n.entries for eps, n in zip(spec.epsilon, ops.number))
    total_raise = sum(a.entries for a in ops.creation)
    pairing = total_raise @ total_raise.T
    quadratic = sum(n.entries @ n.entries for n in ops.number)
    h0 = single[idx]
    h1 = spec.zeta * pairing[idx] - (1.0 - spec.zeta) * quadratic[idx]
    logging.debug(f"[model] built blocks for {spec.omega} P={spec.pairs}: space={space.dim} sector={sector.dim}")
    return _Blocks(space, sector, sector_index, ops, k0, kp, km, _frozen(h0.copy()), _frozen(h1.copy()))


def hamiltonian_parts(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """(H0, H1) with H(g) = H0 + g H1 on the sector basis."""
    blocks = _blocks(spec)
    return blocks.h0, blocks.h1


def build_hamiltonian(spec: ModelSpec, g: complex) -> OperatorMatrix:
    """H(g) = sum eps_i N_i + zeta g sum_ij A+_i A_j - (1 - zeta) g sum_i N_i^2."""
    h0, h1 = hamiltonian_parts(spec)
    return OperatorMatrix("H", h0 + complex(g) * h1)


def hamiltonian_stack(spec: ModelSpec, gs: Sequence[complex] | np.ndarray) -> np.ndarray:
    """H at many couplings as one (k, n, n) array."""
    h0, h1 = hamiltonian_parts(spec)
    gs = np.asarray(gs, dtype=complex).reshape(-1)
    return h0[None, :, :] + gs[:, None, None] * h1[None, :, :]


def number_operator(spec: ModelSpec) -> OperatorMatrix:
    blocks = _blocks(spec)
    total = sum(n.entries for n in blocks.ops.number)
    return OperatorMatrix("N", blocks.restrict(total))


def build_R(spec: ModelSpec, g: complex, level: int) -> OperatorMatrix:
    """Integral of motion R_l(g) of the rational family; `level` is 0-based.

    R_l = K0_l + 4g sum_{l' != l} [ (K+_l K-_l' + K-_l K+_l')/2 + K0_l K0_l' ] / (eps_l - eps_l')
    """
    _check_spec(spec)
    if not 0 <= level < spec.levels:
        raise IndexError(f"level {level} outside 0..{spec.levels - 1}")
    eps = spec.epsilon
    blocks = _blocks(spec)
    k0, kp, km = blocks.k0, blocks.kp, blocks.km
    full = k0[level].astype(complex)
    for other in range(spec.levels):
        if other == level:
            continue
        gap = eps[level] - eps[other]
        if gap == 0.0:
            raise DegenerateEpsilon(f"epsilon_{level + 1} == epsilon_{other + 1}")
        x = 0.5 * (kp[level] @ km[other] + km[level] @ kp[other]) + k0[level] @ k0[other]
        full = full + (4.0 * complex(g) / gap) * x
    return OperatorMatrix(f"R{level + 1}", blocks.restrict(full))


def build_Q(spec: ModelSpec, g: complex) -> OperatorMatrix:
    """Second parameter-dependent integral of motion, defined for L = 3 and eps_1 = 0."""
    _check_spec(spec)
    if spec.levels != 3:
        raise PreconditionViolated(f"Q(g) needs exactly 3 levels, got {spec.levels}")
    if spec.epsilon[0] != 0.0:
        raise PreconditionViolated(f"Q(g) needs epsilon_1 = 0, got {spec.epsilon[0]}")
    _, e2, e3 = spec.epsilon
    o1, o2, o3 = spec.omega
    g = complex(g)
    blocks = _blocks(spec)
    a = [op.entries for op in blocks.ops.creation]
    n = [op.entries for op in blocks.ops.number]

    def coupling(other: int) -> np.ndarray:
        exchange = 0.5 * (a[0] @ a[other].T + a[other] @ a[0].T)
        return exchange + n[0] @ n[other]

    full = (
        (1.0 + g * (o2 / e2 + o3 / e3)) * n[0] / 2
        + (g * o1 / e2) * n[1] / 2
        + (g * o1 / e3) * n[2] / 2
        - g * (coupling(1) / e2 + coupling(2) / e3)
    )
    return OperatorMatrix("Q", blocks.restrict(full))


def casimir_constant(spec: ModelSpec, g: complex) -> complex:
    """C in H = 2 sum eps_i R_i + C, in closed form (pairing limit)."""
    k = [omega / 4 for omega in spec.omega]
    k0_total = spec.pairs - sum(spec.omega) / 4
    bracket = k0_total ** 2 - sum(x * (x + 1) for x in k) - k0_total
    single = sum(e * o for e, o in zip(spec.epsilon, spec.omega)) / 2
    return complex(single - 4.0 * complex(g) * bracket)


def su2_closure(spec: ModelSpec, basis: PairBasis | None = None) -> list[dict[str, float]]:
    """Frobenius residuals of the SU(2) relations per level.

    Defaults to the full pair space. A fixed-P basis is accepted but cannot
    close (the ladder operators leave it).
    """
    if basis is None:
        blocks = _blocks(spec)
        triples = zip(blocks.k0, blocks.kp, blocks.km)
    else:
        ops = build_pair_operators(spec, basis)
        eye = np.eye(basis.dim, dtype=complex)
        triples = (
            (0.5 * n.entries - 0.25 * omega * eye, 0.5 * a.entries, 0.5 * b.entries)
            for n, a, b, omega in zip(ops.number, ops.creation, ops.annihilation, spec.omega)
        )
    out = []
    for k0, kp, km in triples:
        out.append({
            "[K+,K-]-2K0": float(np.linalg.norm(kp @ km - km @ kp - 2 * k0)),
            "[K0,K+]-K+": float(np.linalg.norm(k0 @ kp - kp @ k0 - kp)),
            "[K0,K-]+K-": float(np.linalg.norm(k0 @ km - km @ k0 + km)),
        })
    return out


def commutator_residual(a: np.ndarray, b: np.ndarray) -> float:
    """||[A, B]||_F relative to ||A||_F ||B||_F."""
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a @ b - b @ a) / scale)


@dataclass
class IdentityReport:
    tolerance: float
    residuals: dict[str, float | None]
    constants: list[complex]
    closed_form_constants: list[complex]

    @property
    def failures(self) -> list[str]:
        return sorted(name for name, value in self.residuals.items()
                      if value is not None and not value < self.tolerance)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "passed": self.passed,
            "failures": self.failures,
            "residuals": self.residuals,
            "constants": [[c.real, c.imag] for c in self.constants],
            "closed_form_constants": [[c.real, c.imag] for c in self.closed_form_constants],
        }


def verify_identities(
    spec: ModelSpec,
    g_samples: Sequence[complex],
    *,
    tol: float = config.COMMUTATOR_TOL,
) -> IdentityReport:
    """Max residuals over the samples for every operator identity of the family.

    Identities that only hold in the pairing limit (zeta = 1) are still
    evaluated elsewhere, so a non-integrable spec shows up as failures.
    """
    with_q = spec.has_second_integral()
    names = ["[R_i,R_j]", "[H,R_l]", "[H,N]", "H-2sum(eps R)-C", "2sum(R)+sum(Omega)/2-N", "su2_closure"]
    if with_q:
        names += ["[H,Q]", "[R_l,Q]", "Q-R1-c"]
    worst: dict[str, float | None] = {name: 0.0 for name in names}
    if not with_q:
        worst.update({"[H,Q]": None, "[R_l,Q]": None, "Q-R1-c": None})

    def bump(name: str, value: float) -> None:
        worst[name] = max(worst[name], value)

    n_op = number_operator(spec).entries
    dim = n_op.shape[0]
    eye = np.eye(dim)
    half_omega = 0.5 * sum(spec.omega)
    constants, closed = [], []
    for g in g_samples:
        g = complex(g)
        h = build_hamiltonian(spec, g).entries
        rs = [build_R(spec, g, l).entries for l in range(spec.levels)]
        for i, j in itertools.combinations(range(spec.levels), 2):
            bump("[R_i,R_j]", commutator_residual(rs[i], rs[j]))
        for r in rs:
            bump("[H,R_l]", commutator_residual(h, r))
        bump("[H,N]", commutator_residual(h, n_op))

        diff = h - 2 * sum(e * r for e, r in zip(spec.epsilon, rs))
        c = complex(np.trace(diff) / dim)
        constants.append(c)
        closed.append(casimir_constant(spec, g))
        bump("H-2sum(eps R)-C", float(np.linalg.norm(diff - c * eye) / max(np.linalg.norm(h), 1.0)))
        bump("2sum(R)+sum(Omega)/2-N",
             float(np.linalg.norm(2 * sum(rs) + half_omega * eye - n_op) / np.linalg.norm(n_op)))

        if with_q:
            q = build_Q(spec, g).entries
            bump("[H,Q]", commutator_residual(h, q))
            for r in rs:
                bump("[R_l,Q]", commutator_residual(r, q))
            o1, o2, o3 = spec.omega
            shift = (o1 / 4) * (1 + g * (o2 / spec.epsilon[1] + o3 / spec.epsilon[2]))
            bump("Q-R1-c", float(np.linalg.norm(q - rs[0] - shift * eye) / max(np.linalg.norm(q), 1.0)))

    closure = su2_closure(spec)
    worst["su2_closure"] = max(max(level.values()) for level in closure)
    report = IdentityReport(tol, worst, constants, closed)
    if report.passed:
        logging.info(f"[model] identities hold over {len(constants)} samples (tol={tol:g})")
    else:
        logging.info(f"[model] identity failures over {len(constants)} samples: {report.failures}")
    return report
