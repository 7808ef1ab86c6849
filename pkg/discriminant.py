"""discriminant: D(g) = prod_{m<m'} (E_m(g) - E_m'(g))^2 of the pairing family.

D is a polynomial in g of degree at most n(n-1). It is rebuilt exactly from
samples on circles around the origin: each circle gives every coefficient
through one FFT, and a ladder of radii lets each coefficient be read where it
is best resolved. Products of squared gaps overflow quickly, so samples are
carried as (log|D|, arg D) and normalised by their geometric mean before the
transform.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

import config
from errors import ConvergenceFailure, IllConditioned
from pairing_model import ModelSpec, OperatorMatrix, basis_dimension, hamiltonian_stack

LADDER_PER_DECADE = 3
MIN_RADIUS = 1e-3
# Lowest and highest radius the ladder may be extended to.
FLOOR_RADIUS = 1e-8
CEILING_FACTOR = 100.0
MAX_LADDER_PASSES = 4
REALITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EigenSet:
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def min_gap(self) -> float:
        if len(self.values) < 2:
            return float("inf")
        d = np.abs(self.values[:, None] - self.values[None, :])
        d[np.diag_indices_from(d)] = np.inf
        return float(d.min())


@dataclass(frozen=True)
class DiscriminantValue:
    value: complex
    log_abs: float
    phase: float

    def __complex__(self) -> complex:
        return self.value

    def __abs__(self) -> float:
        return abs(self.value)


@dataclass(frozen=True, eq=False)
class ComplexPolynomial:
    """Coefficients c_0..c_M in ascending order, with per-coefficient absolute
    error estimates when the polynomial came from sampling."""

    coeffs: np.ndarray
    errors: np.ndarray | None = None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, g):
        return P.polyval(g, self.coeffs)

    def derivative(self, order: int = 1) -> "ComplexPolynomial":
        if order == 0:
            return self
        if order > self.degree:
            return ComplexPolynomial(np.zeros(1, dtype=complex))
        coeffs = P.polyder(self.coeffs, order)
        errors = None if self.errors is None else P.polyder(self.errors, order)
        return ComplexPolynomial(coeffs, errors)

    def scale(self, g) -> float:
        """sum |c_j| |g|^j, the natural size of a value of the polynomial at g."""
        return float(P.polyval(abs(g), np.abs(self.coeffs)))

    def noise(self, g) -> float:
        if self.errors is None:
            return float(np.finfo(float).eps) * self.scale(g)
        return float(P.polyval(abs(g), self.errors))

    def to_dict(self) -> dict:
        out = {
            "degree": self.degree,
            "coeffs": [[float(c.real), float(c.imag)] for c in np.asarray(self.coeffs, dtype=complex)],
        }
        if self.errors is not None:
            out["errors"] = [float(e) for e in self.errors]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ComplexPolynomial":
        coeffs = np.array([complex(re, im) for re, im in data["coeffs"]], dtype=complex)
        errors = data.get("errors")
        return cls(coeffs, None if errors is None else np.asarray(errors, dtype=float))


def eigenvalues(h: OperatorMatrix | np.ndarray) -> EigenSet:
    """All eigenvalues of a general complex matrix."""
    entries = h.entries if isinstance(h, OperatorMatrix) else np.asarray(h)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {entries.shape}")
    try:
        values = np.linalg.eigvals(entries)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"eigensolver did not converge: {e}") from e
    return EigenSet(values)


def _log_discriminants(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log|D|, arg D) for every matrix of a (k, n, n) stack."""
    try:
        eig = np.linalg.eigvals(stack)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"eigensolver did not converge: {e}") from e
    n = eig.shape[1]
    if n < 2:
        zeros = np.zeros(eig.shape[0])
        return zeros, zeros
    upper, lower = np.triu_indices(n, 1)
    diffs = eig[:, upper] - eig[:, lower]
    with np.errstate(divide="ignore"):
        log_abs = 2.0 * np.log(np.abs(diffs)).sum(axis=1)
    phase = np.mod(2.0 * np.angle(diffs).sum(axis=1), 2 * np.pi)
    return log_abs, phase


def _as_value(log_abs: float, phase: float) -> DiscriminantValue:
    with np.errstate(over="ignore"):
        value = complex(np.exp(log_abs) * np.exp(1j * phase))
    return DiscriminantValue(value, float(log_abs), float(phase))


def discriminant_of_matrix(h: OperatorMatrix | np.ndarray) -> DiscriminantValue:
    entries = h.entries if isinstance(h, OperatorMatrix) else np.asarray(h, dtype=complex)
    log_abs, phase = _log_discriminants(entries[None, :, :])
    return _as_value(log_abs[0], phase[0])


def discriminant_at(spec: ModelSpec, g: complex) -> DiscriminantValue:
    log_abs, phase = _log_discriminants(hamiltonian_stack(spec, [g]))
    return _as_value(log_abs[0], phase[0])


@dataclass(frozen=True, eq=False)
class _Circle:
    """Coefficient estimates from one sampling circle."""

    radius: float
    coeffs: np.ndarray
    errors: np.ndarray
    degree: int


def _circle(spec: ModelSpec, radius: float, max_degree: int, attempts: int = 3) -> _Circle:
    k_samples = 2 * max_degree + 2
    k = np.arange(k_samples)
    gs = radius * np.exp(2j * np.pi * (k + 0.5) / k_samples)
    log_abs, phase = _log_discriminants(hamiltonian_stack(spec, gs))
    if not np.all(np.isfinite(log_abs)):
        if attempts == 0:
            raise IllConditioned(f"discriminant vanishes on every circle near radius {radius:g}")
        # A sample landed on a root; nudge the circle.
        return _circle(spec, radius * (1 + 1e-3), max_degree, attempts - 1)

    shift = float(log_abs.mean())
    samples = np.exp(log_abs - shift + 1j * phase)
    b = np.fft.fft(samples) / k_samples
    b = b * np.exp(-1j * np.pi * k / k_samples)

    peak = float(np.abs(b).max())
    surplus = float(np.abs(b[max_degree + 1:]).max())
    if surplus > config.ILLCOND_TOL * peak:
        raise IllConditioned(
            f"surplus coefficients at radius {radius:g} reach {surplus / peak:.2e} of the peak"
        )
    floor = max(surplus, float(np.finfo(float).eps) * peak)

    kept = np.abs(b[: max_degree + 1])
    significant = np.nonzero(kept > config.TRIM_TOL * peak)[0]
    degree = int(significant[-1]) if significant.size else 0

    j = np.arange(max_degree + 1)
    log_r = np.log(radius)
    with np.errstate(divide="ignore"):
        log_mag = np.log(kept) + shift - j * log_r
    coeffs = np.exp(log_mag) * np.exp(1j * np.angle(b[: max_degree + 1]))
    errors = np.exp(np.log(floor) + shift - j * log_r)
    return _Circle(radius, coeffs, errors, degree)


def _combine(circles: Sequence[_Circle], max_degree: int, real: bool) -> ComplexPolynomial:
    errs = np.stack([c.errors for c in circles])
    best = errs.argmin(axis=0)
    cols = np.arange(max_degree + 1)
    coeffs = np.stack([c.coeffs for c in circles])[best, cols]
    errors = errs[best, cols]
    degree = max(c.degree for c in circles)
    coeffs, errors = coeffs[: degree + 1], errors[: degree + 1]
    if real:
        imag = np.abs(coeffs.imag)
        allowed = np.maximum(REALITY_TOL * np.abs(coeffs), 10 * errors)
        if np.any(imag > allowed):
            worst = int(np.argmax(imag - allowed))
            logging.warning(f"[discriminant] coefficient {worst} has imaginary part {imag[worst]:.3e} beyond tolerance")
        coeffs = coeffs.real.astype(complex)
    return ComplexPolynomial(coeffs, errors)


def _root_extent(poly: ComplexPolynomial) -> tuple[float, float] | None:
    if poly.degree < 1:
        return None
    roots = np.abs(polynomial_roots(poly, refine=False))
    roots = roots[np.isfinite(roots)]
    if not roots.size:
        return None
    return float(roots.min()), float(roots.max())


def _ladder(lo: float, hi: float) -> np.ndarray:
    count = max(2, int(np.ceil(np.log10(hi / lo) * LADDER_PER_DECADE)) + 1)
    return np.geomspace(lo, hi, count)


def discriminant_polynomial(spec: ModelSpec) -> ComplexPolynomial:
    """Exact-degree reconstruction of D(g) for one member of the family.

    The ladder always spans MIN_RADIUS to the escape radius. It is then
    extended until it brackets the roots of the combined polynomial with a
    factor 2 margin on both sides.
    """
    n = basis_dimension(spec)
    if n < 2:
        return ComplexPolynomial(np.ones(1, dtype=complex), np.zeros(1))
    max_degree = n * (n - 1)
    real = True

    top = max(config.ESCAPE_RADIUS, 10 * MIN_RADIUS)
    circles = [_circle(spec, float(r), max_degree) for r in _ladder(MIN_RADIUS, top)]
    poly = _combine(circles, max_degree, real)
    for _ in range(MAX_LADDER_PASSES):
        extent = _root_extent(poly)
        if extent is None:
            break
        radii = [c.radius for c in circles]
        lo, hi = min(radii), max(radii)
        want_lo = max(0.5 * extent[0], FLOOR_RADIUS)
        want_hi = min(2.0 * extent[1], CEILING_FACTOR * top)
        extra = []
        if want_lo < lo:
            extra.extend(_ladder(want_lo, lo)[:-1])
        if want_hi > hi:
            extra.extend(_ladder(hi, want_hi)[1:])
        if not extra:
            break
        logging.debug(f"[discriminant] extending ladder by {len(extra)} radii to [{min(lo, want_lo):.2e}, {max(hi, want_hi):.2e}]")
        circles.extend(_circle(spec, float(r), max_degree) for r in extra)
        poly = _combine(circles, max_degree, real)

    logging.info(f"[discriminant] {spec.omega} eps={spec.epsilon} zeta={spec.zeta:g}: degree {poly.degree} of {max_degree} from {len(circles)} radii")
    return poly


def _newton(poly: ComplexPolynomial, z: complex) -> complex:
    """Polish z while |p| decreases; stop below NEWTON_TOL * scale."""
    dpoly = poly.derivative()
    value = poly(z)
    for _ in range(config.NEWTON_MAX_ITER):
        if abs(value) < config.NEWTON_TOL * poly.scale(z):
            break
        slope = dpoly(z)
        if slope == 0:
            break
        candidate = z - value / slope
        new_value = poly(candidate)
        if not abs(new_value) < abs(value):
            break
        z, value = candidate, new_value
    return complex(z)


def polynomial_roots(poly: ComplexPolynomial, *, refine: bool = True) -> list[complex]:
    """All roots with multiplicity: companion eigenvalues, then Newton polish.

    A constant polynomial has no roots.
    """
    coeffs = np.asarray(poly.coeffs, dtype=complex)
    m = len(coeffs) - 1
    if m < 1:
        return []
    lead, const = abs(coeffs[-1]), abs(coeffs[0])
    s = (const / lead) ** (1.0 / m) if const > 0 and lead > 0 else 1.0
    if not np.isfinite(s) or s == 0:
        s = 1.0
    scaled = coeffs * s ** np.arange(m + 1)
    scaled = scaled / scaled[-1]
    try:
        roots = P.polyroots(scaled) * s
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"companion eigenvalues did not converge: {e}") from e
    if not np.all(np.isfinite(roots)):
        raise ConvergenceFailure("companion matrix produced non-finite roots")
    if refine:
        roots = [_newton(poly, complex(z)) for z in roots]
    return sorted((complex(z) for z in roots), key=lambda z: (z.real, z.imag))
