"""Fringe fitting and visibility thresholds.

Model: y(phi) = a * [1 - V cos(N phi + phi0)], fitted by weighted least
squares with Poisson weights 1/max(y, 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.optimize import least_squares

from .errors import DomainError, FitError

CLASSICAL_LIMIT = 0.20
SQL_THRESHOLD = 0.816
MAX_VISIBILITY = 1.5
PHASE_STARTS = (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    visibility: float
    phase_offset: float
    n_photons: int
    residual_norm: float
    visibility_std_error: float
    out_of_range: bool = False

    def csv_line(self) -> str:
        return (f"{self.n_photons}, {self.amplitude!r}, {self.visibility!r}, "
                f"{self.visibility_std_error!r}, {self.phase_offset!r}, {self.residual_norm!r}")

    def summary(self) -> str:
        flag = " (above 1: unphysical)" if self.out_of_range else ""
        return (f"N={self.n_photons}: V = {self.visibility:.4f} +/- "
                f"{self.visibility_std_error:.4f}{flag}, a = {self.amplitude:.4g}, "
                f"phi0 = {self.phase_offset:.4f} rad")


FIT_CSV_HEADER = "n, a, V, V_stderr, phi0, residual_norm"


@dataclass(frozen=True)
class ThresholdVerdict:
    visibility: float
    classical_limit_pass: bool
    sql_pass: bool
    classical_margin: float
    sql_margin: float

    def summary(self) -> str:
        def word(ok):
            return "pass" if ok else "fail"
        return (f"classical limit {CLASSICAL_LIMIT}: {word(self.classical_limit_pass)} "
                f"(margin {self.classical_margin:+.4f}); SQL {SQL_THRESHOLD}: "
                f"{word(self.sql_pass)} (margin {self.sql_margin:+.4f})")


def fringe_model(phi, amplitude, visibility, phase_offset, n_photons):
    return amplitude * (1 - visibility * np.cos(n_photons * np.asarray(phi) + phase_offset))


def _wrap(angle: float) -> float:
    return float((angle + np.pi) % (2 * np.pi) - np.pi)


def fit_fringe(phi, counts, n_photons: int, max_nfev: int = 2000) -> FitResult:
    phi = np.asarray(phi, dtype=float).ravel()
    y = np.asarray(counts, dtype=float).ravel()
    if n_photons < 1:
        raise DomainError(f"n_photons must be positive, got {n_photons}")
    if phi.shape != y.shape:
        raise DomainError("phase and count arrays differ in length")
    if phi.size < 6:
        raise DomainError(f"need at least 6 points, got {phi.size}")
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(y))):
        raise DomainError("non-finite phase or count")
    if np.any(y < 0):
        raise DomainError("counts must be non-negative")
    period = 2 * np.pi / n_photons
    spacing = np.ptp(phi) / (phi.size - 1)
    # a grid that tiles one period without repeating its endpoint also qualifies
    if np.ptp(phi) + spacing < period * (1 - 1e-9):
        raise DomainError(f"phase grid spans {np.ptp(phi):.4g} rad, less than one "
                          f"period {period:.4g} rad")

    sigma = np.sqrt(np.maximum(y, 1.0))

    def residuals(p):
        return (fringe_model(phi, p[0], p[1], p[2], n_photons) - y) / sigma

    a0 = max(float(np.mean(y)), 1e-12)
    v0 = float(np.ptp(y) / (np.max(y) + np.min(y))) if np.max(y) > 0 else 0.0
    best = None
    for start in PHASE_STARTS:
        sol = least_squares(residuals, x0=[a0, max(v0, 0.1), start], method="lm",
                            max_nfev=max_nfev, xtol=1e-14, ftol=1e-14, gtol=1e-14)
        if sol.status <= 0:
            continue
        if best is None or sol.cost < best.cost:
            best = sol
    if best is None:
        raise FitError(f"fringe fit did not converge within {max_nfev} evaluations")

    a, v, p0 = best.x
    if v < 0:
        v, p0 = -v, p0 + np.pi
    jac = best.jac
    cov = np.linalg.pinv(jac.T @ jac)
    v_err = float(np.sqrt(max(cov[1, 1], 0.0)))
    return FitResult(
        amplitude=float(a),
        visibility=float(min(v, MAX_VISIBILITY)),
        phase_offset=_wrap(p0),
        n_photons=n_photons,
        residual_norm=float(np.linalg.norm(best.fun)),
        visibility_std_error=v_err,
        out_of_range=bool(v > 1 + 1e-9),
    )


def evaluate_thresholds(fit: FitResult) -> ThresholdVerdict:
    if fit.n_photons != 4:
        raise DomainError("visibility thresholds are defined for the four-photon fringe")
    v = fit.visibility
    return ThresholdVerdict(
        visibility=v,
        classical_limit_pass=v > CLASSICAL_LIMIT,
        sql_pass=v > SQL_THRESHOLD,
        classical_margin=v - CLASSICAL_LIMIT,
        sql_margin=v - SQL_THRESHOLD,
    )


def visibility_minmax(data, window: int = 3) -> float:
    """(max - min)/(max + min) after a ``window``-point moving average."""
    y = np.asarray(data, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("no data")
    if window > 1 and y.size >= window:
        y = uniform_filter1d(y, size=window, mode="nearest")
    hi, lo = float(np.max(y)), float(np.min(y))
    if hi + lo <= 0:
        raise DomainError("max + min must be positive")
    return (hi - lo) / (hi + lo)
