"""continuation: follow degeneracies while a model parameter moves.

A sweep steps epsilon_3 (pairing limit) or zeta (between the two integrable
limits) and matches the clusters of consecutive steps into trajectories.
Matching works on root units: a cluster of multiplicity m contributes m units
and every root that is missing from the polynomial or lies beyond the escape
radius sits in one "infinity" bin, so both sides always hold n(n-1) units and
one square assignment covers merges, splits, entries and escapes.

Distances are chordal (on the Riemann sphere), so a root racing in from
g = infinity moves a bounded distance per step like any other.
"""
from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import linear_sum_assignment

import config
from degeneracy import (
    CROSSING,
    EP,
    EP_CLUSTER,
    HIGHER_ORDER_CROSSING,
    Degeneracy,
    DegeneracySet,
    find_degeneracies,
)
from errors import BracketInvalid, InvalidSpec, StepUnderflow
from pairing_model import ModelSpec, reference_spec

INF = -1
CONJUGATE_TOL = 1e-6
# Bracket width at which a collision counts as located.
MERGE_WIDTH = 1e-5
# Largest distance between the two halves of a merging pair at that width.
MERGE_REACH = 1e-2

COLLISION = "collision"
SPLIT = "split"
ESCAPE = "escape"
ENTRY = "entry"
EVENT_KINDS = (COLLISION, SPLIT, ESCAPE, ENTRY)


def chordal(z: complex | None, w: complex | None) -> float:
    """Chordal distance on the Riemann sphere; None stands for infinity."""
    if z is None and w is None:
        return 0.0
    if z is None or w is None:
        finite = w if z is None else z
        return 2.0 / np.sqrt(1.0 + abs(finite) ** 2)
    return 2.0 * abs(z - w) / np.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


class SweepPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    spec: ModelSpec
    parameter: Literal["epsilon3", "zeta"]
    start: float
    end: float
    initial_step: float = Field(config.INITIAL_STEP, gt=0)
    min_step: float = Field(config.MIN_STEP, gt=0)
    max_displacement: float = Field(config.MAX_DISPLACEMENT, gt=0)
    escape_radius: float = Field(config.ESCAPE_RADIUS, gt=0)
    label: str | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.start == self.end:
            raise InvalidSpec("sweep range is empty")
        if self.min_step > self.initial_step:
            raise InvalidSpec(f"min_step {self.min_step} exceeds initial_step {self.initial_step}")
        lo, hi = sorted((self.start, self.end))
        if self.parameter == "zeta":
            if lo < 0.0 or hi > 1.0:
                raise InvalidSpec(f"zeta range [{lo}, {hi}] leaves [0, 1]")
        else:
            if self.spec.levels != 3:
                raise InvalidSpec("epsilon3 sweeps need three levels")
            for j, eps in enumerate(self.spec.epsilon[:2]):
                if lo <= eps <= hi:
                    raise InvalidSpec(f"epsilon3 range [{lo}, {hi}] passes epsilon_{j + 1} = {eps}")
        return self

    @property
    def direction(self) -> float:
        return 1.0 if self.end > self.start else -1.0

    def spec_at(self, value: float) -> ModelSpec:
        if self.parameter == "zeta":
            return self.spec.with_zeta(value)
        return self.spec.with_epsilon3(value)

    def name(self) -> str:
        return self.label or f"{self.parameter} {self.start:g}->{self.end:g}"


@dataclass(frozen=True)
class Event:
    kind: str
    parameter: float
    trajectory: int
    multiplicity: int
    location: complex | None = None
    partners: tuple[int, ...] = ()
    monotone: bool | None = None

    def to_dict(self) -> dict:
        loc = None if self.location is None else [self.location.real, self.location.imag]
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "trajectory": self.trajectory,
            "multiplicity": self.multiplicity,
            "g": loc,
            "partners": list(self.partners),
            "monotone": self.monotone,
        }


@dataclass
class Trajectory:
    id: int
    parameters: list[float] = field(default_factory=list)
    locations: list[complex] = field(default_factory=list)
    multiplicities: list[int] = field(default_factory=list)
    kinds: list[str | None] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    parent: int | None = None
    ended: bool = False

    def add(self, parameter: float, deg: Degeneracy) -> None:
        self.parameters.append(parameter)
        self.locations.append(deg.location)
        self.multiplicities.append(deg.multiplicity)
        self.kinds.append(deg.kind)

    def growing(self, count: int = 3) -> bool:
        """|g| strictly increased over the last `count` points."""
        mags = [abs(z) for z in self.locations[-count:]]
        return len(mags) == count and all(a < b for a, b in zip(mags, mags[1:]))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "parent": self.parent,
            "ended": self.ended,
            "points": [
                {"parameter": p, "g": [z.real, z.imag], "multiplicity": m, "kind": k}
                for p, z, m, k in zip(self.parameters, self.locations, self.multiplicities, self.kinds)
            ],
            "events": [e.to_dict() for e in self.events],
        }


@dataclass(frozen=True)
class StepRecord:
    parameter: float
    degree: int
    tracked: int
    escaped: int
    clusters: int


@dataclass
class SweepResult:
    plan: SweepPlan
    trajectories: list[Trajectory] = field(default_factory=list)
    steps: list[StepRecord] = field(default_factory=list)
    ledger: list[Event] = field(default_factory=list)
    initial: DegeneracySet | None = None
    final: DegeneracySet | None = None

    def events(self, kind: str | None = None) -> list[Event]:
        return [e for e in self.ledger if kind is None or e.kind == kind]

    def counts(self) -> dict[str, int]:
        counts = Counter(e.kind for e in self.ledger)
        out = {kind: counts.get(kind, 0) for kind in EVENT_KINDS}
        out["entered_roots"] = sum(e.multiplicity for e in self.ledger if e.kind == ENTRY)
        out["escaped_roots"] = sum(e.multiplicity for e in self.ledger if e.kind == ESCAPE)
        return out

    def trajectory(self, tid: int) -> Trajectory:
        return self.trajectories[tid]


# ------------------------------------------------------------------ matching

@lru_cache(maxsize=1024)
def _fast_set(spec: ModelSpec) -> DegeneracySet:
    return find_degeneracies(spec, evidence=False)


@dataclass
class _Track:
    deg: Degeneracy
    tid: int


@dataclass(frozen=True)
class _Matching:
    flows: Counter
    displacement: float


def _finite(dset: DegeneracySet, radius: float) -> tuple[list[Degeneracy], int]:
    inside = [d for d in dset if abs(d.location) <= radius]
    return inside, sum(d.multiplicity for d in dset) - sum(d.multiplicity for d in inside)


def _match(prev: Sequence[Degeneracy], new: Sequence[Degeneracy], units: int) -> _Matching:
    """Optimal unit assignment between two cluster lists plus their infinity bins."""
    def expand(clusters):
        out = [i for i, d in enumerate(clusters) for _ in range(d.multiplicity)]
        return out + [INF] * (units - len(out))

    src, dst = expand(prev), expand(new)
    loc_src = [None if i == INF else prev[i].location for i in src]
    loc_dst = [None if j == INF else new[j].location for j in dst]
    cost = np.array([[chordal(a, b) ** 2 for b in loc_dst] for a in loc_src])
    rows, cols = linear_sum_assignment(cost)
    flows = Counter((src[r], dst[c]) for r, c in zip(rows, cols))
    disp = max((float(np.sqrt(cost[r, c])) for r, c in zip(rows, cols)), default=0.0)
    return _Matching(flows, disp)


def _real(z: complex) -> bool:
    return abs(z.imag) <= CONJUGATE_TOL * (1 + abs(z))


def _conjugates(a: complex, b: complex) -> bool:
    return not _real(a) and abs(a - b.conjugate()) <= CONJUGATE_TOL * (1 + abs(a))


def _separation(a: complex, b: complex) -> float:
    """Positive for two points on the real axis, negative for a conjugate pair."""
    d = a - b
    return abs(d.real) - abs(d.imag)


def _collides(a0: complex, b0: complex, a1: complex, b1: complex) -> bool:
    """A real pair turned into a conjugate pair, or the reverse."""
    return (_real(a0) and _real(b0) and _conjugates(a1, b1)) or (
        _conjugates(a0, b0) and _real(a1) and _real(b1)
    )


def _pair_near(dset: DegeneracySet, a: complex, b: complex, multiplicity: int) -> tuple[Degeneracy, Degeneracy] | Degeneracy | None:
    """The merged cluster around (a, b), or the two clusters continuing a and b."""
    centre = 0.5 * (a + b)
    reach = abs(a - b) + CONJUGATE_TOL * (1 + abs(centre))
    merged = [d for d in dset if d.multiplicity >= 2 * multiplicity and abs(d.location - centre) <= reach]
    if merged:
        return min(merged, key=lambda d: abs(d.location - centre))
    same = [d for d in dset if d.multiplicity == multiplicity]
    if len(same) < 2:
        return None
    da = min(same, key=lambda d: abs(d.location - a))
    rest = [d for d in same if d is not da]
    db = min(rest, key=lambda d: abs(d.location - b))
    return da, db


@dataclass(frozen=True)
class _Merge:
    parameter: float
    width: float
    dset: DegeneracySet | None
    location: complex | None


def _side(spec_at: Callable[[float], ModelSpec], value: float, a: complex, b: complex, multiplicity: int):
    """(side, dset, found) at one parameter value.

    side is +1 for a real pair, -1 for a conjugate pair, 0 when a merged
    cluster sits there and None when the pair is lost.
    """
    dset = _fast_set(spec_at(value))
    found = _pair_near(dset, a, b, multiplicity)
    if found is None:
        return None, dset, None
    if isinstance(found, Degeneracy):
        return 0, dset, found
    return (1 if _separation(found[0].location, found[1].location) > 0 else -1), dset, found


def _merged_set(dset: DegeneracySet, pair: tuple[Degeneracy, Degeneracy]) -> tuple[DegeneracySet, Degeneracy]:
    """dset with the two members of `pair` replaced by one cluster at their midpoint."""
    da, db = pair
    crossing_like = all(d.kind in (CROSSING, HIGHER_ORDER_CROSSING) for d in pair)
    merged = Degeneracy(
        location=0.5 * (da.location + db.location),
        multiplicity=da.multiplicity + db.multiplicity,
        kind=HIGHER_ORDER_CROSSING if crossing_like else EP_CLUSTER,
        spread=0.5 * abs(da.location - db.location),
    )
    rest = [d for d in dset if d is not da and d is not db] + [merged]
    rest.sort(key=lambda d: (d.location.real, d.location.imag))
    return DegeneracySet(tuple(rest), spec=dset.spec, degree=dset.degree), merged


def _bisect_merge(
    spec_at: Callable[[float], ModelSpec],
    lo: float,
    hi: float,
    pair_lo: tuple[complex, complex],
    multiplicity: int,
    width: float = MERGE_WIDTH,
) -> _Merge:
    """Bisect on the real/conjugate separation until the bracket is narrower
    than `width`, then confirm the merge at the final midpoint.

    `lo` is the end where pair_lo was seen; it may lie above `hi`. A merged
    cluster counts as the far side, so the result is where the pair first
    merges, located to `width`.
    """
    a, b = pair_lo
    sign_lo = 1 if _separation(a, b) > 0 else -1
    merged_at_hi = None
    while abs(hi - lo) > width:
        mid = 0.5 * (lo + hi)
        side, dset, found = _side(spec_at, mid, a, b, multiplicity)
        if side is None:
            break
        if side == sign_lo:
            lo, a, b = mid, found[0].location, found[1].location
        else:
            hi = mid
            merged_at_hi = (dset, found) if side == 0 else None

    mid, span = 0.5 * (lo + hi), abs(hi - lo)
    if span > width:
        return _Merge(mid, span, None, None)
    if merged_at_hi is not None:
        dset, found = merged_at_hi
        return _Merge(hi, span, dset, found.location)
    side, dset, found = _side(spec_at, mid, a, b, multiplicity)
    if side == 0:
        return _Merge(mid, span, dset, found.location)
    if side is None:
        return _Merge(mid, span, None, None)
    da, db = found
    if abs(da.location - db.location) > MERGE_REACH * (1 + abs(da.location)):
        logging.warning(f"[sweep] pair still {abs(da.location - db.location):.2e} apart at the end of bisection")
        return _Merge(mid, span, None, None)
    dset, cluster = _merged_set(dset, found)
    return _Merge(mid, span, dset, cluster.location)


# -------------------------------------------------------------------- sweep

class _Sweep:
    """Mutable state of one running sweep."""

    def __init__(self, plan: SweepPlan):
        self.plan = plan
        self.result = SweepResult(plan)
        self.tracks: list[_Track] = []
        self.units = 0

    def _new_trajectory(self, parent: int | None = None) -> Trajectory:
        traj = Trajectory(id=len(self.result.trajectories), parent=parent)
        self.result.trajectories.append(traj)
        return traj

    def _event(self, traj: Trajectory, kind: str, parameter: float, multiplicity: int,
               location: complex | None, partners: Sequence[int] = (), monotone: bool | None = None) -> None:
        event = Event(kind, parameter, traj.id, multiplicity, location, tuple(sorted(partners)), monotone)
        traj.events.append(event)
        self.result.ledger.append(event)

    def _record(self, parameter: float, dset: DegeneracySet, inside: Sequence[Degeneracy], escaped: int) -> None:
        self.result.steps.append(StepRecord(
            parameter=parameter,
            degree=dset.degree if dset.degree is not None else dset.total_root_count,
            tracked=sum(d.multiplicity for d in inside),
            escaped=escaped,
            clusters=len(inside),
        ))

    def start(self, parameter: float, dset: DegeneracySet) -> None:
        n_units = self.plan.spec_at(parameter).max_degree
        self.units = n_units
        inside, escaped = _finite(dset, self.plan.escape_radius)
        for deg in inside:
            traj = self._new_trajectory()
            traj.add(parameter, deg)
            self.tracks.append(_Track(deg, traj.id))
        self._record(parameter, dset, inside, escaped)
        self.result.initial = dset

    def advance(self, parameter: float, dset: DegeneracySet, matching: _Matching | None = None) -> None:
        inside, escaped = _finite(dset, self.plan.escape_radius)
        prev = [t.deg for t in self.tracks]
        if matching is None:
            matching = _match(prev, inside, self.units)
        trajs = self.result.trajectories

        targets: dict[int, Counter] = {}
        sources: dict[int, Counter] = {}
        for (i, j), count in matching.flows.items():
            targets.setdefault(i, Counter())[j] += count
            sources.setdefault(j, Counter())[i] += count

        def heir(i: int) -> int:
            return sorted(targets[i].items(), key=lambda kv: (-kv[1], kv[0] == INF, kv[0]))[0][0]

        heirs = {i: heir(i) for i in range(len(prev))}
        new_ids: list[int] = []
        for j, deg in enumerate(inside):
            finite_sources = [i for i in sources.get(j, {}) if i != INF]
            claimants = [self.tracks[i].tid for i in finite_sources if heirs[i] == j]
            if claimants:
                tid = min(claimants)
                traj = trajs[tid]
                others = [self.tracks[i].tid for i in finite_sources if self.tracks[i].tid != tid]
                if others:
                    self._event(traj, COLLISION, parameter, deg.multiplicity, deg.location, others)
                    for other in set(claimants) - {tid}:
                        trajs[other].ended = True
            else:
                parent = min((self.tracks[i].tid for i in finite_sources), default=None)
                traj = self._new_trajectory(parent)
                if parent is not None and len(finite_sources) > 1:
                    others = [self.tracks[i].tid for i in finite_sources]
                    self._event(traj, COLLISION, parameter, deg.multiplicity, deg.location, others)
            entered = sources.get(j, Counter()).get(INF, 0)
            if entered:
                self._event(traj, ENTRY, parameter, entered, deg.location)
            traj.add(parameter, deg)
            new_ids.append(traj.id)

        for i, track in enumerate(self.tracks):
            traj = trajs[track.tid]
            finite_targets = [j for j in targets[i] if j != INF]
            children = [new_ids[j] for j in finite_targets if new_ids[j] != track.tid]
            if len(targets[i]) > 1 and children:
                self._event(traj, SPLIT, parameter, track.deg.multiplicity, track.deg.location, children)
            gone = targets[i].get(INF, 0)
            if gone:
                monotone = traj.growing()
                if not monotone:
                    logging.warning(f"[sweep] trajectory {traj.id} escaped at {self.plan.parameter}={parameter:.6g} without growing |g|")
                self._event(traj, ESCAPE, parameter, gone, track.deg.location, monotone=monotone)
            if heirs[i] == INF:
                traj.ended = True

        self.tracks = [_Track(deg, tid) for deg, tid in zip(inside, new_ids)]
        self._record(parameter, dset, inside, escaped)

    def collision_between(self, p0: float, p1: float, dset1: DegeneracySet, matching: _Matching) -> _Merge | None:
        """A real/conjugate pair change between two accepted steps, bisected to its merge."""
        inside, _ = _finite(dset1, self.plan.escape_radius)
        one_to_one = {}
        for (i, j), _count in matching.flows.items():
            if i == INF or j == INF:
                continue
            one_to_one.setdefault(i, set()).add(j)
        simple = {i: next(iter(js)) for i, js in one_to_one.items() if len(js) == 1}
        idx = sorted(simple)
        for x, ia in enumerate(idx):
            for ib in idx[x + 1:]:
                da, db = self.tracks[ia].deg, self.tracks[ib].deg
                ja, jb = simple[ia], simple[ib]
                if ja == jb or da.multiplicity != db.multiplicity:
                    continue
                if da.multiplicity < 2:
                    continue
                if _collides(da.location, db.location, inside[ja].location, inside[jb].location):
                    merge = _bisect_merge(self.plan.spec_at, p0, p1, (da.location, db.location), da.multiplicity)
                    if merge.dset is not None:
                        return merge
                    logging.info(f"[sweep] pair near {da.location:.6g} changed sides without a resolved merge")
        return None


def run_sweep(plan: SweepPlan) -> SweepResult:
    """Step the plan's parameter from start to end and build the trajectories."""
    sweep = _Sweep(plan)
    p = plan.start
    dset = _fast_set(plan.spec_at(p))
    sweep.start(p, dset)
    h = plan.initial_step
    span = abs(plan.end - plan.start)
    logging.info(f"[sweep] {plan.name()}: start with {len(sweep.tracks)} clusters")

    while abs(plan.end - p) > 1e-12 * max(1.0, span):
        step = min(h, abs(plan.end - p))
        p_next = plan.end if abs(plan.end - p) - step <= 1e-12 * max(1.0, span) else p + plan.direction * step
        dset_next = _fast_set(plan.spec_at(p_next))
        inside, _ = _finite(dset_next, plan.escape_radius)
        matching = _match([t.deg for t in sweep.tracks], inside, sweep.units)
        if matching.displacement > plan.max_displacement:
            if h / 2 < plan.min_step:
                raise StepUnderflow(p_next, matching.displacement)
            h /= 2
            continue

        merge = sweep.collision_between(p, p_next, dset_next, matching)
        if merge is not None:
            logging.info(f"[sweep] {plan.name()}: merge at {plan.parameter}={merge.parameter:.9g} (width {merge.width:.1e})")
            sweep.advance(merge.parameter, merge.dset)
        sweep.advance(p_next, dset_next, None if merge is not None else matching)
        p = p_next
        h = min(2 * h, plan.initial_step)

    sweep.result.final = _fast_set(plan.spec_at(p))
    counts = sweep.result.counts()
    logging.info(f"[sweep] {plan.name()}: {len(sweep.result.steps)} steps, events {counts}")
    return sweep.result


def run_sweeps(plans: Sequence[SweepPlan], workers: int = config.WORKERS) -> list[SweepResult]:
    """Independent plans on the thread pool; results keep the input order."""
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(plans) or 1))) as pool:
        return list(pool.map(run_sweep, plans))


# ------------------------------------------------------------------ presets

CRITICAL_EPSILON3 = 1.8499


def _presets() -> dict[str, SweepPlan]:
    return {
        "fig1": SweepPlan(spec=reference_spec(6.0), parameter="epsilon3", start=6.0, end=1.2, label="fig1"),
        "fig2a": SweepPlan(spec=reference_spec(7 / 3), parameter="zeta", start=1.0, end=0.0, label="fig2a"),
        "fig2b": SweepPlan(spec=reference_spec(CRITICAL_EPSILON3), parameter="zeta", start=1.0, end=0.0, label="fig2b"),
        "fig2c": SweepPlan(spec=reference_spec(1.5), parameter="zeta", start=1.0, end=0.0, label="fig2c"),
    }


PRESETS = _presets()


def preset(name: str, **overrides) -> SweepPlan:
    """A named plan, optionally with step / cap / radius overrides."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    plan = PRESETS[name]
    if not overrides:
        return plan
    return SweepPlan(**{**plan.model_dump(), "spec": plan.spec, **overrides})


# ---------------------------------------------------------- critical point

@dataclass(frozen=True)
class CriticalPoint:
    epsilon3: float
    width: float
    degeneracies: DegeneracySet | None
    location: complex | None

    @property
    def merged(self) -> bool:
        return self.location is not None


def _crossing_pair(dset: DegeneracySet) -> tuple[complex, complex] | complex:
    """The two double-root crossings, or the location of their merged cluster."""
    multiple = [d for d in dset if d.multiplicity >= 2]
    merged = [d for d in multiple if d.multiplicity >= 4]
    if len(merged) == 1 and len(multiple) == 1:
        return merged[0].location
    doubles = [d for d in multiple if d.multiplicity == 2]
    if len(doubles) != 2:
        raise BracketInvalid(f"expected two double roots, found multiplicities {[d.multiplicity for d in multiple]}")
    a, b = sorted((d.location for d in doubles), key=lambda z: (z.real, z.imag))
    return a, b


def bisect_critical_epsilon3(spec: ModelSpec, bracket: tuple[float, float]) -> CriticalPoint:
    """epsilon_3 where the two crossings collide, with the achieved bracket width."""
    if spec.zeta != 1.0:
        raise BracketInvalid(f"the crossing collision is defined at zeta = 1, got {spec.zeta}")
    lo, hi = sorted(float(x) for x in bracket)
    spec_at = spec.with_epsilon3
    end_lo = _crossing_pair(_fast_set(spec_at(lo)))
    end_hi = _crossing_pair(_fast_set(spec_at(hi)))
    for end, value in ((end_lo, lo), (end_hi, hi)):
        if not isinstance(end, tuple):
            dset = _fast_set(spec_at(value))
            return CriticalPoint(value, 0.0, dset, end)
    s_lo, s_hi = _separation(*end_lo), _separation(*end_hi)
    if (s_lo > 0) == (s_hi > 0) or not (_collides(*end_lo, *end_hi)):
        raise BracketInvalid(
            f"no real/conjugate change of the crossing pair on [{lo}, {hi}] (separations {s_lo:.3g}, {s_hi:.3g})"
        )
    merge = _bisect_merge(spec_at, lo, hi, end_lo, 2)
    if merge.dset is None:
        logging.warning(f"[critical] bracket shrank to {merge.width:.1e} without a merged cluster")
    else:
        logging.info(f"[critical] eps3_cr={merge.parameter:.9g} width={merge.width:.1e} at g={merge.location:.8g}")
    return CriticalPoint(merge.parameter, merge.width, merge.dset, merge.location)


def locate_critical_epsilon3(spec: ModelSpec, bracket: tuple[float, float]) -> float:
    return bisect_critical_epsilon3(spec, bracket).epsilon3


# ------------------------------------------------------------- asymptotics

@dataclass(frozen=True)
class AsymptoticRow:
    epsilon3: float
    crossings: tuple[complex, ...]
    ep_count: int

    @property
    def reach(self) -> tuple[float, ...]:
        return tuple(abs(z.real) for z in self.crossings)


@dataclass(frozen=True)
class AsymptoticReport:
    rows: tuple[AsymptoticRow, ...]
    threshold: float = 3.0

    @property
    def monotone(self) -> bool:
        """Both crossings move strictly outward over the values >= threshold."""
        rows = [r for r in self.rows if r.epsilon3 >= self.threshold and len(r.crossings) == 2]
        for a, b in zip(rows, rows[1:]):
            if not all(x < y for x, y in zip(sorted(a.reach), sorted(b.reach))):
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "monotone": self.monotone,
            "rows": [
                {"epsilon3": r.epsilon3, "crossings": [[z.real, z.imag] for z in r.crossings], "eps": r.ep_count}
                for r in self.rows
            ],
        }


def asymptotic_check(spec: ModelSpec, epsilon3_values: Sequence[float]) -> AsymptoticReport:
    """Where the two crossings sit as epsilon_3 grows (they drift to +-infinity)."""
    rows = []
    for value in sorted(epsilon3_values):
        dset = _fast_set(spec.with_epsilon3(value))
        crossings = tuple(sorted((d.location for d in dset if d.kind == CROSSING), key=lambda z: z.real))
        rows.append(AsymptoticRow(float(value), crossings, sum(1 for d in dset if d.kind == EP)))
    report = AsymptoticReport(tuple(rows))
    logging.info(f"[asymptotic] {len(rows)} values, monotone={report.monotone}")
    return report
