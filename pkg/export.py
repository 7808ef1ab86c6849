"""
JSON and CSV output for specs, polynomials, degeneracy sets and sweeps.

Everything the CLI writes goes through here. JSON keys are sorted so the same
run produces byte-identical files; writes hold an exclusive lock so a single
writer owns the file at a time.
"""

import csv
import fcntl
import json
import logging
from pathlib import Path

from continuation import SweepResult
from degeneracy import Degeneracy, DegeneracySet
from pairing_model import ModelSpec

CSV_COLUMNS = ("parameter", "trajectory_id", "re_g", "im_g", "multiplicity", "kind", "event")


def load_json(path: str | Path) -> dict:
    """Read a JSON file. Missing files and bad JSON raise to the caller."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def save_json(path: str | Path, payload: dict):
    """Write payload as sorted, indented JSON under an exclusive lock."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        fcntl.flock(f, fcntl.LOCK_EX)
        try:
            f.write(dumps(payload))
            f.write("\n")
        finally:
            fcntl.flock(f, fcntl.LOCK_UN)
    logging.info(f"[export] wrote {path}")


def write_csv(path: str | Path, rows: list[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        fcntl.flock(f, fcntl.LOCK_EX)
        try:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow({col: row.get(col, "") for col in CSV_COLUMNS})
        finally:
            fcntl.flock(f, fcntl.LOCK_UN)
    logging.info(f"[export] wrote {len(rows)} rows to {path}")


def spec_from_dict(data: dict) -> ModelSpec:
    return ModelSpec.model_validate(data)


def spec_to_dict(spec: ModelSpec) -> dict:
    return spec.model_dump(mode="json")


def degeneracy_set_to_dict(dset: DegeneracySet) -> dict:
    return {
        "spec": None if dset.spec is None else spec_to_dict(dset.spec),
        "degree": dset.degree,
        "total_root_count": dset.total_root_count,
        "census": dset.census(),
        "degeneracies": [d.to_dict() for d in dset.degeneracies],
    }


def degeneracy_set_from_dict(data: dict) -> DegeneracySet:
    spec = data.get("spec")
    return DegeneracySet(
        degeneracies=tuple(Degeneracy.from_dict(d) for d in data["degeneracies"]),
        spec=None if spec is None else spec_from_dict(spec),
        degree=data.get("degree"),
    )


def sweep_to_dict(result: SweepResult) -> dict:
    return {
        "plan": result.plan.model_dump(mode="json"),
        "counts": result.counts(),
        "steps": [
            {"parameter": s.parameter, "degree": s.degree, "tracked": s.tracked,
             "escaped": s.escaped, "clusters": s.clusters}
            for s in result.steps
        ],
        "events": [e.to_dict() for e in result.events()],
        "trajectories": [t.to_dict() for t in result.trajectories],
    }


def sweep_rows(result: SweepResult, lower_half_only: bool = False) -> list[dict]:
    """One CSV row per trajectory point; events are attached to the point where they happen."""
    marks: dict[tuple[int, float], list[str]] = {}
    for e in result.events():
        marks.setdefault((e.trajectory, e.parameter), []).append(e.kind)
    rows = []
    for traj in result.trajectories:
        for p, z, m, kind in zip(traj.parameters, traj.locations, traj.multiplicities, traj.kinds):
            if lower_half_only and z.imag > 0:
                continue
            rows.append({
                "parameter": p,
                "trajectory_id": traj.id,
                "re_g": z.real,
                "im_g": z.imag,
                "multiplicity": m,
                "kind": kind or "",
                "event": "+".join(marks.get((traj.id, p), [])),
            })
    rows.sort(key=lambda r: (r["trajectory_id"], result.plan.direction * r["parameter"]))
    return rows


def degeneracy_rows(dset: DegeneracySet, parameter: float | None = None) -> list[dict]:
    return [
        {
            "parameter": "" if parameter is None else parameter,
            "trajectory_id": i,
            "re_g": d.location.real,
            "im_g": d.location.imag,
            "multiplicity": d.multiplicity,
            "kind": d.kind or "",
            "event": "",
        }
        for i, d in enumerate(dset.degeneracies)
    ]
