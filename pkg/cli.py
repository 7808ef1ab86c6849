#!/usr/bin/env python3
"""
Command-line front end for the crossroads experiments.

Usage:
    python cli.py verify --preset reference [--zeta 0.5] [--seed 7]
    python cli.py spectrum --preset reference --g 0.3-0.2j
    python cli.py discriminant --spec spec.json
    python cli.py roots --preset reference --epsilon3 2.3333333 [--format csv --output roots.csv]
    python cli.py sweep --preset fig1|fig2a|fig2b|fig2c|all [--output data/fig1.json]
    python cli.py critical --preset reference --bracket 1.5 2.5

Exit codes: 0 success, 1 numerical or classification failure (or a failed
identity check), 2 bad input.
"""

import logger_setup

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

import config
import export
from continuation import PRESETS, SweepPlan, bisect_critical_epsilon3, preset, run_sweep, run_sweeps
from degeneracy import find_degeneracies
from discriminant import discriminant_polynomial, eigenvalues
from errors import CrossroadsError, InvalidSpec
from pairing_model import ModelSpec, build_hamiltonian, reference_spec, verify_identities

PRESET_NAMES = ("reference", *PRESETS, "all")


class RunConfig(BaseModel):
    command: Literal["verify", "spectrum", "discriminant", "roots", "sweep", "critical"]
    spec_path: Optional[str] = Field(None, description="JSON file holding a ModelSpec")
    spec_json: Optional[str] = Field(None, description="Inline ModelSpec JSON")
    preset: Optional[str] = Field(None, description="reference, a sweep preset name, or 'all' for sweep")
    epsilon3: Optional[float] = None
    zeta: Optional[float] = None
    g: str = Field("0", description="Complex coupling for spectrum, e.g. 0.3-0.2j")
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    seed: int = 0
    samples: int = Field(10, ge=1)
    bracket: tuple[float, float] = (1.5, 2.5)
    parameter: Optional[Literal["epsilon3", "zeta"]] = None
    start: Optional[float] = None
    end: Optional[float] = None
    fast: bool = False
    lower_half: bool = False
    commutator_tol: float = Field(config.COMMUTATOR_TOL, gt=0)
    cluster_tol: Optional[float] = Field(None, gt=0)
    overrides: dict[str, float] = Field(default_factory=dict)

    @field_validator("g")
    @classmethod
    def _complex(cls, v: str) -> str:
        complex(v.replace(" ", ""))
        return v

    @property
    def coupling(self) -> complex:
        return complex(self.g.replace(" ", ""))

    @model_validator(mode="after")
    def _one_source(self):
        given = [x for x in (self.spec_path, self.spec_json, self.preset) if x is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of --spec, --spec-json, --preset")
        if self.preset is not None and self.preset not in PRESET_NAMES:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {PRESET_NAMES}")
        if self.preset == "all" and self.command != "sweep":
            raise ValueError("--preset all is only meaningful for sweep")
        if self.format == "csv" and self.command not in ("roots", "sweep"):
            raise ValueError("csv output is available for roots and sweep")
        return self


def load_spec(run: RunConfig) -> ModelSpec:
    if run.spec_path is not None:
        spec = export.spec_from_dict(export.load_json(run.spec_path))
    elif run.spec_json is not None:
        spec = export.spec_from_dict(json.loads(run.spec_json))
    elif run.preset in PRESETS:
        spec = PRESETS[run.preset].spec
    else:
        spec = reference_spec()
    if run.epsilon3 is not None:
        spec = spec.with_epsilon3(run.epsilon3)
    if run.zeta is not None:
        spec = spec.with_zeta(run.zeta)
    return spec


def _emit(run: RunConfig, payload: dict, rows: list[dict] | None = None):
    if run.output is None:
        return
    if run.format == "csv":
        export.write_csv(run.output, rows or [])
    else:
        export.save_json(run.output, payload)


def _samples(run: RunConfig) -> list[complex]:
    """Uniform points in the disc |g| <= 5."""
    rng = np.random.default_rng(run.seed)
    radius = 5.0 * np.sqrt(rng.random(run.samples))
    angle = 2 * np.pi * rng.random(run.samples)
    return [complex(z) for z in radius * np.exp(1j * angle)]


def cmd_verify(run: RunConfig) -> int:
    spec = load_spec(run)
    report = verify_identities(spec, _samples(run), tol=run.commutator_tol)
    for name, value in sorted(report.residuals.items()):
        shown = "n/a" if value is None else f"{value:.3e}"
        flag = "  FAIL" if name in report.failures else ""
        print(f"{name:28s} {shown}{flag}")
    print("identities hold" if report.passed else f"violated: {', '.join(report.failures)}")
    _emit(run, report.to_dict())
    return 0 if report.passed else 1


def cmd_spectrum(run: RunConfig) -> int:
    spec = load_spec(run)
    values = eigenvalues(build_hamiltonian(spec, run.coupling)).values
    values = sorted(values, key=lambda z: (z.real, z.imag))
    for z in values:
        print(f"{z.real:+.12f} {z.imag:+.12f}j")
    _emit(run, {"spec": export.spec_to_dict(spec), "g": [run.coupling.real, run.coupling.imag],
                "eigenvalues": [[z.real, z.imag] for z in values]})
    return 0


def cmd_discriminant(run: RunConfig) -> int:
    spec = load_spec(run)
    poly = discriminant_polynomial(spec)
    print(f"degree {poly.degree}")
    for j, c in enumerate(poly.coeffs):
        print(f"  |c{j}| = {abs(c):.6e}")
    _emit(run, {"spec": export.spec_to_dict(spec), **poly.to_dict()})
    return 0


def summary_line(dset) -> str:
    census = dset.census()
    return (
        f"M={dset.degree}, crossings={census['crossing']}, EPs={census['EP']}, "
        f"higher-order={census['higher-order-crossing']}, EP-clusters={census['EP-cluster']}"
    )


def cmd_roots(run: RunConfig) -> int:
    spec = load_spec(run)
    dset = find_degeneracies(spec, evidence=not run.fast, tol=run.cluster_tol)
    shown = dset.lower_half() + tuple(d for d in dset if d.half_plane == "real") if run.lower_half else dset.degeneracies
    for d in sorted(shown, key=lambda d: (d.location.real, d.location.imag)):
        print(f"{d.location.real:+.10f} {d.location.imag:+.10f}j  m={d.multiplicity}  {d.kind}")
    print(summary_line(dset))
    _emit(run, export.degeneracy_set_to_dict(dset), export.degeneracy_rows(dset))
    return 0


def _plan_overrides(run: RunConfig) -> dict:
    keys = ("initial_step", "min_step", "max_displacement", "escape_radius")
    return {k: v for k, v in run.overrides.items() if k in keys}


def _plans(run: RunConfig) -> list[SweepPlan]:
    overrides = _plan_overrides(run)
    if run.preset == "all":
        return [preset(name, **overrides) for name in PRESETS]
    if run.preset in PRESETS and run.parameter is None:
        return [preset(run.preset, **overrides)]
    spec = load_spec(run)
    if run.parameter is None or run.start is None or run.end is None:
        raise InvalidSpec("a custom sweep needs --parameter, --start and --end")
    return [SweepPlan(spec=spec, parameter=run.parameter, start=run.start, end=run.end, **overrides)]


def cmd_sweep(run: RunConfig) -> int:
    plans = _plans(run)
    results = run_sweeps(plans) if len(plans) > 1 else [run_sweep(plans[0])]
    for result in results:
        c = result.counts()
        print(
            f"{result.plan.name()}: steps={len(result.steps)} collisions={c['collision']} splits={c['split']} "
            f"entries={c['entry']} (roots {c['entered_roots']}) escapes={c['escape']} (roots {c['escaped_roots']})"
        )
        for e in result.events():
            where = "inf" if e.location is None else f"{e.location:.6g}"
            print(f"  {e.kind:9s} {result.plan.parameter}={e.parameter:.9g}  g={where}  m={e.multiplicity}")
    if run.output is None:
        return 0
    if len(results) == 1:
        result = results[0]
        _emit(run, export.sweep_to_dict(result), export.sweep_rows(result, run.lower_half))
        return 0
    out = Path(run.output)
    for result in results:
        target = out.with_name(f"{out.stem}-{result.plan.name()}{out.suffix}")
        if run.format == "csv":
            export.write_csv(target, export.sweep_rows(result, run.lower_half))
        else:
            export.save_json(target, export.sweep_to_dict(result))
    return 0


def cmd_critical(run: RunConfig) -> int:
    spec = load_spec(run)
    point = bisect_critical_epsilon3(spec, run.bracket)
    merged = "unresolved" if point.location is None else f"g={point.location:.10g}"
    multiplicity = None
    if point.degeneracies is not None and point.location is not None:
        multiplicity = max(d.multiplicity for d in point.degeneracies if d.location == point.location)
    print(f"eps3_cr={point.epsilon3:.9f} width={point.width:.1e} {merged} multiplicity={multiplicity}")
    _emit(run, {"epsilon3": point.epsilon3, "width": point.width, "multiplicity": multiplicity,
                "g": None if point.location is None else [point.location.real, point.location.imag],
                "degeneracies": None if point.degeneracies is None else export.degeneracy_set_to_dict(point.degeneracies)})
    return 0


HANDLERS = {
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "discriminant": cmd_discriminant,
    "roots": cmd_roots,
    "sweep": cmd_sweep,
    "critical": cmd_critical,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Degeneracies of the three-level pairing model")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("input (exactly one)")
    source.add_argument("--spec", dest="spec_path", help="Path to a ModelSpec JSON file")
    source.add_argument("--spec-json", help="Inline ModelSpec JSON")
    source.add_argument("--preset", help=f"One of {', '.join(PRESET_NAMES)}")
    common.add_argument("--epsilon3", type=float, help="Override epsilon_3 of the spec")
    common.add_argument("--zeta", type=float, help="Override zeta of the spec")
    common.add_argument("--output", help="Write the result here")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0, help="Seed for random verification samples (default: 0)")
    tol = common.add_argument_group("tolerances")
    tol.add_argument("--commutator-tol", type=float, default=config.COMMUTATOR_TOL)
    tol.add_argument("--trim-tol", type=float, help=f"Degree trimming (default: {config.TRIM_TOL:g})")
    tol.add_argument("--cluster-tol", type=float, help=f"Cluster linkage factor (default: {config.CLUSTER_TOL:g})")
    tol.add_argument("--escape-radius", type=float, help=f"default: {config.ESCAPE_RADIUS:g}")
    tol.add_argument("--max-displacement", type=float, help=f"default: {config.MAX_DISPLACEMENT:g}")
    tol.add_argument("--min-step", type=float, help=f"default: {config.MIN_STEP:g}")
    tol.add_argument("--initial-step", type=float, help=f"default: {config.INITIAL_STEP:g}")

    p = sub.add_parser("verify", parents=[common], help="Check the operator identities")
    p.add_argument("--samples", type=int, default=10, help="Random couplings in |g| <= 5 (default: 10)")

    p = sub.add_parser("spectrum", parents=[common], help="Eigenvalues of H at one coupling")
    p.add_argument("--g", default="0", help="Complex coupling, e.g. 0.3-0.2j")

    sub.add_parser("discriminant", parents=[common], help="Degree and coefficients of D(g)")

    p = sub.add_parser("roots", parents=[common], help="Classified degeneracies")
    p.add_argument("--fast", action="store_true", help="Skip the Q and eigenvector evidence")
    p.add_argument("--lower-half", action="store_true", help="Print real and lower half-plane only")

    p = sub.add_parser("sweep", parents=[common], help="Follow degeneracies along a parameter")
    p.add_argument("--parameter", choices=("epsilon3", "zeta"))
    p.add_argument("--start", type=float)
    p.add_argument("--end", type=float)
    p.add_argument("--lower-half", action="store_true", help="CSV rows for real and lower half-plane only")

    p = sub.add_parser("critical", parents=[common], help="Bisect the crossing collision in epsilon_3")
    p.add_argument("--bracket", type=float, nargs=2, default=(1.5, 2.5), metavar=("LO", "HI"))
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        key: getattr(args, key)
        for key in ("trim_tol", "escape_radius", "max_displacement", "min_step", "initial_step")
        if getattr(args, key, None) is not None
    }
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields and v is not None}
    return RunConfig(**fields, overrides=overrides)


def apply_overrides(run: RunConfig):
    if "trim_tol" in run.overrides:
        config.TRIM_TOL = run.overrides["trim_tol"]
    if "escape_radius" in run.overrides:
        config.ESCAPE_RADIUS = run.overrides["escape_radius"]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = run_config(args)
        apply_overrides(run)
        return HANDLERS[run.command](run)
    except (ValidationError, InvalidSpec, json.JSONDecodeError, FileNotFoundError, IsADirectoryError) as e:
        logging.error(f"[cli] bad input: {e}")
        return 2
    except CrossroadsError as e:
        logging.error(f"[cli] {type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
