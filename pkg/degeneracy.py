"""degeneracy: turn discriminant roots into classified degeneracies.

Single roots of D(g) are exceptional points: two eigenvalues and their
eigenvectors coalesce and a loop around the point swaps them. Double (or
higher, even) roots are sharp crossings: the eigenvalues touch, the
eigenvectors stay orthogonal and a second integral of motion Q still tells the
two states apart. Three tests vote (multiplicity, monodromy, Q gap) and any
disagreement is raised, never resolved quietly.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

import config
from discriminant import ComplexPolynomial, discriminant_polynomial, eigenvalues, polynomial_roots
from errors import (
    AmbiguousClustering,
    ClassificationConflict,
    ConvergenceFailure,
    PreconditionViolated,
    TrackingAmbiguity,
)
from pairing_model import ModelSpec, build_hamiltonian, build_Q, hamiltonian_parts, hamiltonian_stack

EP = "EP"
CROSSING = "crossing"
HIGHER_ORDER_CROSSING = "higher-order-crossing"
EP_CLUSTER = "EP-cluster"
KINDS = (EP, CROSSING, HIGHER_ORDER_CROSSING, EP_CLUSTER)

REAL_AXIS_TOL = 1e-7
TRACKING_TOL = 1e-10
MIN_TOL_FACTOR = 1e-10
MAX_SUBDIVISIONS = 12
# Snapping roots onto eigenvalue coincidences of H
SNAP_TOL = 1e-13
SNAP_MAX_ITER = 40
SNAP_REACH = 0.1
COINCIDENCE_TOL = 1e-5
# Generic mixing for the joint diagonalisation of H and Q.
JOINT_MIX = 0.6180339887498949


@dataclass(frozen=True)
class Evidence:
    h_gap: float | None = None
    q_gap: float | None = None
    q_dim: int | None = None
    q_verdict: str | None = None
    permutation: tuple[int, ...] | None = None
    monodromy: str | None = None
    overlap: float | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "h_gap": self.h_gap,
            "q_gap": self.q_gap,
            "q_dim": self.q_dim,
            "q_verdict": self.q_verdict,
            "permutation": None if self.permutation is None else list(self.permutation),
            "monodromy": self.monodromy,
            "overlap": self.overlap,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Evidence":
        perm = data.get("permutation")
        return cls(
            h_gap=data.get("h_gap"),
            q_gap=data.get("q_gap"),
            q_dim=data.get("q_dim"),
            q_verdict=data.get("q_verdict"),
            permutation=None if perm is None else tuple(perm),
            monodromy=data.get("monodromy"),
            overlap=data.get("overlap"),
            notes=tuple(data.get("notes", ())),
        )


@dataclass(frozen=True)
class Degeneracy:
    location: complex
    multiplicity: int
    kind: str | None = None
    evidence: Evidence = field(default_factory=Evidence)
    spread: float = 0.0

    @property
    def half_plane(self) -> str:
        g = self.location
        if abs(g.imag) <= REAL_AXIS_TOL * (1 + abs(g)):
            return "real"
        return "lower" if g.imag < 0 else "upper"

    def to_dict(self) -> dict:
        return {
            "g": [self.location.real, self.location.imag],
            "multiplicity": self.multiplicity,
            "kind": self.kind,
            "half_plane": self.half_plane,
            "spread": self.spread,
            "evidence": self.evidence.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Degeneracy":
        re, im = data["g"]
        return cls(
            location=complex(re, im),
            multiplicity=int(data["multiplicity"]),
            kind=data.get("kind"),
            evidence=Evidence.from_dict(data.get("evidence") or {}),
            spread=float(data.get("spread", 0.0)),
        )


@dataclass(frozen=True)
class DegeneracySet:
    degeneracies: tuple[Degeneracy, ...]
    spec: ModelSpec | None = None
    degree: int | None = None

    @property
    def total_root_count(self) -> int:
        return sum(d.multiplicity for d in self.degeneracies)

    def __len__(self) -> int:
        return len(self.degeneracies)

    def __iter__(self):
        return iter(self.degeneracies)

    def census(self) -> dict[str, int]:
        counts = {kind: 0 for kind in KINDS}
        for d in self.degeneracies:
            if d.kind is not None:
                counts[d.kind] += 1
        return counts

    def lower_half(self) -> tuple[Degeneracy, ...]:
        return tuple(d for d in self.degeneracies if d.half_plane == "lower")

    def multiplicities(self) -> list[int]:
        return sorted(d.multiplicity for d in self.degeneracies)


# ---------------------------------------------------------------- clustering

def _linkage_groups(roots: np.ndarray, tol: float) -> list[list[int]]:
    mags = np.abs(roots)
    dist = np.abs(roots[:, None] - roots[None, :])
    limit = tol * (1 + np.maximum(mags[:, None], mags[None, :]))
    _, labels = connected_components(csr_matrix(dist <= limit), directed=False)
    groups: dict[int, list[int]] = {}
    for i, label in enumerate(labels):
        groups.setdefault(int(label), []).append(i)
    return list(groups.values())


def _min_gap(h: np.ndarray) -> float:
    return eigenvalues(h).min_gap()


def _pair_step(h0: np.ndarray, h1: np.ndarray, g: complex) -> tuple[float, float, complex]:
    """(min gap, eigenvalue scale, Newton step) at g.

    The step is (E_a - E_b) / (E_a' - E_b') for the pair whose coincidence it
    predicts closest to g; E' comes from left and right eigenvectors.
    """
    h = h0 + g * h1
    w, vl, vr = scipy.linalg.eig(h, left=True, right=True)
    num = np.einsum("ij,ik,kj->j", vl.conj(), h1, vr)
    den = np.einsum("ij,ij->j", vl.conj(), vr)
    with np.errstate(divide="ignore", invalid="ignore"):
        dw = num / den
        f = w[:, None] - w[None, :]
        steps = f / (dw[:, None] - dw[None, :])
    gaps = np.abs(f)
    np.fill_diagonal(gaps, np.inf)
    reach = np.abs(steps)
    reach[~np.isfinite(reach)] = np.inf
    np.fill_diagonal(reach, np.inf)
    scale = max(1.0, float(np.abs(w).max()))
    i, j = np.unravel_index(np.argmin(reach), reach.shape)
    step = complex(steps[i, j]) if np.isfinite(reach[i, j]) else complex("nan")
    return float(gaps.min()), scale, step


def _snap(h0: np.ndarray, h1: np.ndarray, root: complex, reach: float) -> complex:
    """Move a root onto the nearby point where two eigenvalues of H coincide.

    Each iteration tries the Newton step scaled by 1, 1/2 and 2 (linear
    crossing, square-root branch point, tangency) and keeps whichever lowers
    the smallest gap. Stays within `reach` of the root.
    """
    g = complex(root)
    try:
        gap, scale, step = _pair_step(h0, h1, g)
        for _ in range(SNAP_MAX_ITER):
            if gap <= SNAP_TOL * scale or not np.isfinite(step):
                break
            best_gap, best = gap, None
            for factor in (1.0, 0.5, 2.0):
                candidate = g - factor * step
                if abs(candidate - root) > reach:
                    continue
                candidate_gap = _min_gap(h0 + candidate * h1)
                if candidate_gap < best_gap:
                    best_gap, best = candidate_gap, candidate
            if best is None:
                break
            g = best
            gap, scale, step = _pair_step(h0, h1, g)
    except (np.linalg.LinAlgError, ConvergenceFailure) as e:
        logging.debug(f"[degeneracy] snapping {root:.6g} stopped: {e}")
    return complex(g)


def discriminant_order(spec: ModelSpec, g: complex) -> int | None:
    """Order of the zero of D at g predicted from the eigenvalues of H(g).

    Eigenvalues within COINCIDENCE_TOL form groups. A semisimple group of a
    eigenvalues (a crossing) adds a(a-1); a defective pair (an EP) adds 1.
    None when the structure is neither, e.g. a tangency or a higher EP.
    """
    h = build_hamiltonian(spec, g).entries
    w = eigenvalues(h).values
    scale = max(1.0, float(np.abs(w).max()))
    limit = COINCIDENCE_TOL * scale
    close = np.abs(w[:, None] - w[None, :]) <= limit
    _, labels = connected_components(csr_matrix(close), directed=False)
    order = 0
    for label in np.unique(labels):
        members = np.nonzero(labels == label)[0]
        a = len(members)
        if a < 2:
            continue
        lam = w[members].mean()
        singular = scipy.linalg.svdvals(h - lam * np.eye(len(w)))
        geometric = int(np.sum(singular <= limit))
        if geometric >= a:
            order += a * (a - 1)
        elif a == 2 and geometric == 1:
            order += 1
        else:
            return None
    return order


def _group_by_eigenvalues(
    spec: ModelSpec, roots: np.ndarray, tol: float
) -> list[tuple[list[int], complex]]:
    """Roots grouped around the coincidence points of H they belong to.

    Snapped roots are linked with the tolerance factor. When the predicted
    orders of those points account for every root, the roots are handed out
    by one optimal assignment, so a widely split multiple root cannot lend
    roots to its neighbour. Otherwise the snapped groups stand.
    """
    h0, h1 = hamiltonian_parts(spec)
    snapped = np.array([_snap(h0, h1, r, SNAP_REACH * (1 + abs(r))) for r in roots], dtype=complex)
    groups = _linkage_groups(snapped, tol)
    centres = [complex(snapped[g].mean()) for g in groups]
    orders = [discriminant_order(spec, c) for c in centres]
    fallback = list(zip(groups, centres))
    if any(o is None for o in orders):
        return fallback
    kept = [(c, o) for c, o in zip(centres, orders) if o > 0]
    if sum(o for _, o in kept) != len(roots):
        logging.debug(f"[degeneracy] orders {orders} do not account for {len(roots)} roots; keeping snapped groups")
        return fallback
    slots = np.array([k for k, (_, o) in enumerate(kept) for _ in range(o)])
    where = np.array([kept[k][0] for k in slots], dtype=complex)
    rows, cols = linear_sum_assignment(np.abs(roots[:, None] - where[None, :]) ** 2)
    members: dict[int, list[int]] = {}
    for r, c in zip(rows, cols):
        members.setdefault(int(slots[c]), []).append(int(r))
    return [(members[k], kept[k][0]) for k in sorted(members)]


def _refine_location(poly: ComplexPolynomial, centre: complex, multiplicity: int, spread: float) -> complex:
    """Newton on the (m-1)-th derivative; a multiple root is a simple root there."""
    if multiplicity < 2:
        return centre
    d = poly.derivative(multiplicity - 1)
    dd = d.derivative()
    z = centre
    for _ in range(config.NEWTON_MAX_ITER):
        slope = dd(z)
        if slope == 0:
            break
        step = d(z) / slope
        z = z - step
        if abs(step) <= config.NEWTON_TOL * (1 + abs(z)):
            break
    if not np.isfinite(z) or abs(z - centre) > 2 * spread + config.NEWTON_TOL * (1 + abs(centre)):
        return centre
    return complex(z)


def _check_separated(points: Sequence[np.ndarray], tol: float) -> None:
    for ra, rb in itertools.combinations(points, 2):
        gap = np.abs(ra[:, None] - rb[None, :])
        limit = 3 * tol * (1 + np.maximum(np.abs(ra)[:, None], np.abs(rb)[None, :]))
        if np.any(gap < limit):
            raise AmbiguousClustering(
                f"clusters near {ra.mean():.6g} and {rb.mean():.6g} are {gap.min():.2e} apart (tol factor {tol:g})"
            )


def cluster_roots(
    roots: Sequence[complex],
    tol: float | None = None,
    poly: ComplexPolynomial | None = None,
    spec: ModelSpec | None = None,
) -> DegeneracySet:
    """Group roots into degeneracies with multiplicities; kinds stay unset.

    `tol` is a factor: roots r_i, r_j link when |r_i - r_j| <= tol (1 + max(|r_i|, |r_j|)).
    With `spec`, roots are first snapped onto the eigenvalue coincidences of
    H and the coincidence point is the location. Without it, the location is
    the centroid, polished on the derivatives of `poly` when given.
    """
    tol = config.CLUSTER_TOL if tol is None else tol
    arr = np.asarray(list(roots), dtype=complex)
    if arr.size == 0:
        return DegeneracySet(())

    if spec is not None:
        grouped = _group_by_eigenvalues(spec, arr, tol)
        _check_separated([np.array([c]) for _, c in grouped], tol)
    else:
        groups = _linkage_groups(arr, tol)
        _check_separated([arr[g] for g in groups], tol)
        grouped = [(g, complex(arr[g].mean())) for g in groups]

    out = []
    for members, centre in grouped:
        spread = float(np.abs(arr[members] - centre).max())
        location = centre
        if spec is None and poly is not None:
            location = _refine_location(poly, centre, len(members), spread)
        out.append(Degeneracy(location=location, multiplicity=len(members), spread=spread))
    out.sort(key=lambda d: (d.location.real, d.location.imag))
    degree = poly.degree if poly is not None else len(arr)
    return DegeneracySet(tuple(out), degree=degree)


# ------------------------------------------------------------------ Q test

@dataclass(frozen=True)
class QTest:
    h_gap: float
    q_gap: float
    q_dim: int
    q_scale: float

    @property
    def verdict(self) -> str | None:
        """'crossing', 'coalescence' or None when the gap sits between the thresholds."""
        if self.q_gap > config.Q_CROSSING_GAP * self.q_scale:
            return "crossing"
        if self.q_gap < config.Q_COALESCE_GAP * self.q_scale:
            return "coalescence"
        return None


def _require_second_integral(spec: ModelSpec) -> None:
    if spec.zeta != 1.0:
        raise PreconditionViolated(f"Q(g) is an integral of motion only at zeta = 1, got {spec.zeta}")
    if not spec.has_second_integral():
        raise PreconditionViolated("Q(g) needs three levels with epsilon_1 = 0")


def q_independence_test(spec: ModelSpec, g0: complex) -> QTest:
    """H gap of the closest eigenvalue pair at g0 and the Q gap on that H eigenspace."""
    _require_second_integral(spec)
    h = build_hamiltonian(spec, g0).entries
    q = build_Q(spec, g0).entries
    values = eigenvalues(h).values
    n = len(values)
    d = np.abs(values[:, None] - values[None, :])
    d[np.diag_indices(n)] = np.inf
    i, j = np.unravel_index(np.argmin(d), d.shape)
    h_gap = float(d[i, j])
    centre = 0.5 * (values[i] + values[j])
    width = max(config.EIGENSPACE_TOL * max(1.0, float(np.abs(values).max())), h_gap)

    def near(x):
        return abs(x - centre) <= width

    _, z, sdim = scipy.linalg.schur(h, output="complex", sort=near)
    basis = z[:, :sdim]
    block = basis.conj().T @ q @ basis
    q_values = np.linalg.eigvals(block)
    q_gap = float(min(abs(a - b) for a, b in itertools.combinations(q_values, 2))) if sdim > 1 else float("inf")
    q_scale = max(1.0, float(np.abs(np.linalg.eigvals(q)).max()))
    return QTest(h_gap=h_gap, q_gap=q_gap, q_dim=int(sdim), q_scale=q_scale)


# --------------------------------------------------------------- monodromy

def _follow(spec: ModelSpec, path: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues at path[0] and their continuation to path[-1], index by index.

    Steps that move an eigenvalue by more than half the current minimum gap
    are bisected.
    """
    eig = np.linalg.eigvals(hamiltonian_stack(spec, path))
    scale = max(1.0, float(np.abs(eig).max()))
    current = eig[0]
    for k in range(1, len(path)):
        pending = [(path[k - 1], path[k], eig[k], 0)]
        while pending:
            a, b, target, depth = pending.pop()
            gaps = np.abs(current[:, None] - current[None, :])
            gaps[np.diag_indices_from(gaps)] = np.inf
            if gaps.min() < TRACKING_TOL * scale:
                raise TrackingAmbiguity(f"eigenvalues within {gaps.min():.2e} near g={a:.6g}")
            cost = np.abs(current[:, None] - target[None, :])
            _, cols = linear_sum_assignment(cost)
            moved = float(cost[np.arange(len(cols)), cols].max())
            if moved < 0.5 * gaps.min() or depth >= MAX_SUBDIVISIONS:
                current = target[cols]
                continue
            mid = 0.5 * (a + b)
            mid_eig = np.linalg.eigvals(hamiltonian_stack(spec, [mid]))[0]
            pending.append((mid, b, target, depth + 1))
            pending.append((a, mid, mid_eig, depth + 1))
    return eig[0], current


def monodromy(spec: ModelSpec, center: complex, radius: float, steps: int = config.MONODROMY_STEPS) -> tuple[int, ...]:
    """Permutation of eigenvalue indices after one loop around `center`.

    perm[i] = j means the eigenvalue that started at index i ends at index j
    of the starting (sorted) order.
    """
    steps = max(int(steps), 64)
    t = np.arange(steps + 1) / steps
    path = center + radius * np.exp(2j * np.pi * t)
    path[-1] = path[0]
    start, end = _follow(spec, path)
    _, landing = linear_sum_assignment(np.abs(end[:, None] - start[None, :]))
    order = np.lexsort((start.imag, start.real))
    rank = np.empty(len(start), dtype=int)
    rank[order] = np.arange(len(start))
    return tuple(int(rank[landing[i]]) for i in order)


def is_identity(perm: Sequence[int]) -> bool:
    return all(i == p for i, p in enumerate(perm))


# -------------------------------------------------------- eigenvector tests

def eigenvector_overlaps(spec: ModelSpec, g0: complex, radius: float | None = None, depth: int = 4) -> list[float]:
    """|<v1|v2>| / (|v1||v2|) of the closest eigenpair along g0 + r 10^-k e^{i pi/4}.

    Tends to 1 at an exceptional point and to 0 at a crossing.
    """
    radius = 1e-2 * max(1.0, abs(g0)) if radius is None else radius
    out = []
    for k in range(depth + 1):
        g = g0 + radius * 10.0 ** (-k) * np.exp(1j * np.pi / 4)
        w, v = np.linalg.eig(build_hamiltonian(spec, g).entries)
        d = np.abs(w[:, None] - w[None, :])
        d[np.diag_indices_from(d)] = np.inf
        i, j = np.unravel_index(np.argmin(d), d.shape)
        a, b = v[:, i], v[:, j]
        out.append(float(abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))))
    return out


def functional_independence_residual(spec: ModelSpec, g: complex) -> float:
    """How far Q(g) is from any polynomial in H(g), relative to |q|.

    Both are diagonalised jointly through H + tQ; q_k is fitted as a
    polynomial of degree n-1 in E_k. Directions the E_k cannot resolve are
    dropped (rcond 1e-8), so at a crossing the fit fails by a finite amount.
    """
    _require_second_integral(spec)
    h = build_hamiltonian(spec, g).entries
    q = build_Q(spec, g).entries
    _, v = np.linalg.eig(h + JOINT_MIX * q)
    vinv = np.linalg.inv(v)
    e = np.diag(vinv @ h @ v)
    qk = np.diag(vinv @ q @ v)
    spread = max(float(np.abs(e - e.mean()).max()), 1e-300)
    x = (e - e.mean()) / spread
    vander = np.vander(x, len(x), increasing=True)
    coef, *_ = np.linalg.lstsq(vander, qk, rcond=1e-8)
    return float(np.linalg.norm(vander @ coef - qk) / max(np.linalg.norm(qk), 1e-300))


# ---------------------------------------------------------- classification

def _monodromy_radius(location: complex, others: Sequence[complex]) -> float:
    if not others:
        return config.MONODROMY_RADIUS * max(1.0, abs(location))
    return config.MONODROMY_RADIUS * min(abs(location - o) for o in others)


def _classify_one(spec: ModelSpec, deg: Degeneracy, others: Sequence[complex], evidence: bool) -> Degeneracy:
    g0 = deg.location
    m = deg.multiplicity
    notes: list[str] = []
    with_q = evidence and spec.zeta == 1.0 and spec.has_second_integral()

    perm = None
    if m >= 2 or evidence:
        perm = monodromy(spec, g0, _monodromy_radius(g0, others))
    identity = None if perm is None else is_identity(perm)

    qt = q_independence_test(spec, g0) if with_q else None
    verdict = None if qt is None else qt.verdict
    overlap = eigenvector_overlaps(spec, g0)[-1] if evidence else None
    h_gap = qt.h_gap if qt is not None else (eigenvalues(build_hamiltonian(spec, g0)).min_gap() if evidence else None)

    if m == 1:
        kind = EP
        if identity:
            notes.append("single root with trivial monodromy")
        if verdict == "crossing":
            notes.append("single root with split Q eigenvalues")
    else:
        if identity and verdict == "coalescence":
            raise ClassificationConflict(
                f"g={g0:.8g} (multiplicity {m}): trivial monodromy but Q eigenvalues coalesce (gap {qt.q_gap:.2e})"
            )
        if not identity and verdict == "crossing":
            raise ClassificationConflict(
                f"g={g0:.8g} (multiplicity {m}): nontrivial monodromy {perm} but Q eigenvalues split (gap {qt.q_gap:.2e})"
            )
        if identity and m % 2 == 0:
            kind = CROSSING if m == 2 else HIGHER_ORDER_CROSSING
        else:
            kind = EP_CLUSTER
            notes.append("anomalous multiple root")
            logging.warning(f"[degeneracy] anomalous cluster at g={g0:.8g}: multiplicity {m}, monodromy {perm}")

    ev = Evidence(
        h_gap=h_gap,
        q_gap=None if qt is None else qt.q_gap,
        q_dim=None if qt is None else qt.q_dim,
        q_verdict=verdict,
        permutation=perm,
        monodromy=None if perm is None else ("identity" if identity else "nontrivial"),
        overlap=overlap,
        notes=tuple(notes),
    )
    return replace(deg, kind=kind, evidence=ev)


def classify(
    spec: ModelSpec,
    clusters: DegeneracySet,
    *,
    evidence: bool = True,
    workers: int = config.WORKERS,
) -> DegeneracySet:
    """Assign a kind to every cluster. `evidence=False` skips the Q and
    eigenvector tests and the monodromy of single roots."""
    locations = [d.location for d in clusters]

    def one(i: int) -> Degeneracy:
        others = locations[:i] + locations[i + 1:]
        return _classify_one(spec, clusters.degeneracies[i], others, evidence)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        classified = tuple(pool.map(one, range(len(locations))))
    result = DegeneracySet(classified, spec=spec, degree=clusters.degree)
    logging.info(f"[degeneracy] eps={spec.epsilon} zeta={spec.zeta:g}: {result.census()}")
    return result


def find_degeneracies(spec: ModelSpec, *, evidence: bool = True, tol: float | None = None) -> DegeneracySet:
    """Discriminant, roots, clusters, kinds; tightens the cluster tolerance on ambiguity."""
    poly = discriminant_polynomial(spec)
    roots = polynomial_roots(poly)
    factor = config.CLUSTER_TOL if tol is None else tol
    while True:
        try:
            clusters = cluster_roots(roots, factor, poly, spec)
            break
        except AmbiguousClustering as e:
            if factor / 10 < MIN_TOL_FACTOR:
                raise
            logging.info(f"[degeneracy] {e}; retrying with tol factor {factor / 10:g}")
            factor /= 10
    return classify(spec, clusters, evidence=evidence)
