"""Mach-Zehnder interferometer built from BS1, a phase shifter and BS2.

Mode order is (upper, lower) throughout: (A, B) at the input, (C, D) inside,
(E, F) at the output; in the polarization version (H, V), (H', V'), (H'', V'').

BS2 is the inverse of BS1, so the interferometer is the identity at zero
phase and a lone photon entering A exits in F with probability
(1 - cos phi)/2.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np

from .errors import DomainError
from .fock import (
    FockState,
    PureState,
    TwoModeUnitary,
    apply_two_mode_unitary,
    beamsplitter_5050,
    phase_shifter,
    probability,
)

SUPPORTED_N = (1, 2, 4)

# post-selected outcome (E, F) that carries the N-photon fringe
FRINGE_OUTCOME = {1: (0, 1), 2: (2, 0), 4: (3, 1)}
# input (A, B) used for each fringe
FRINGE_INPUT = {1: (1, 0), 2: (1, 1), 4: (2, 2)}


@dataclass(frozen=True)
class MziSettings:
    phi: float

    def __post_init__(self):
        if not isfinite(self.phi):
            raise DomainError(f"phase must be finite, got {self.phi}")


@dataclass(frozen=True)
class FringeCurve:
    n_photons: int
    phi: np.ndarray
    probability: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.phi.tolist(), self.probability.tolist()))


def bs1() -> TwoModeUnitary:
    return beamsplitter_5050()


def bs2() -> TwoModeUnitary:
    return beamsplitter_5050().dagger()


def mzi_unitary(phi: float) -> TwoModeUnitary:
    return bs2() @ phase_shifter(phi) @ bs1()


def mzi_output(state: PureState, phi: float) -> PureState:
    if state.mode_count != 2:
        raise DomainError(f"the interferometer acts on 2 modes, state has {state.mode_count}")
    MziSettings(phi)
    out = apply_two_mode_unitary(state, (0, 1), bs1())
    out = apply_two_mode_unitary(out, (0, 1), phase_shifter(phi))
    return apply_two_mode_unitary(out, (0, 1), bs2())


def detection_probability(state: PureState, outcome, phi: float) -> float:
    return probability(mzi_output(state, phi), outcome)


def analytic_fringe(n_photons: int, phi):
    """Closed-form post-selected fringe for N = 1, 2, 4; vectorizes over ``phi``."""
    phi = np.asarray(phi, dtype=float)
    if n_photons == 1:
        out = (1 - np.cos(phi)) / 2
    elif n_photons == 2:
        out = (1 - np.cos(2 * phi)) / 4
    elif n_photons == 4:
        out = 3 * (1 - np.cos(4 * phi)) / 16
    else:
        raise DomainError(f"n_photons must be one of {SUPPORTED_N}, got {n_photons}")
    return out if out.ndim else float(out)


def polarization_mzi_transform(retardance: float) -> TwoModeUnitary:
    """LCVR with its axes at 45 degrees, expressed in the H/V basis.

    Returns R(-45) diag(1, e^{i delta}) R(45); the output is read in H''/V''
    behind a polarizing beamsplitter.
    """
    if not isfinite(retardance):
        raise DomainError(f"retardance must be finite, got {retardance}")
    c = s = np.sqrt(0.5)
    rot_p45 = np.array([[c, -s], [s, c]])
    rot_m45 = rot_p45.T
    return TwoModeUnitary(rot_m45 @ np.diag([1.0, np.exp(1j * retardance)]) @ rot_p45)


def polarization_mzi_output(state: PureState, retardance: float) -> PureState:
    return apply_two_mode_unitary(state, (0, 1), polarization_mzi_transform(retardance))


def fringe_curve(n_photons: int, phi_grid) -> FringeCurve:
    phi = np.asarray(phi_grid, dtype=float).ravel()
    if phi.size == 0:
        raise DomainError("phase grid is empty")
    if not np.all(np.isfinite(phi)):
        raise DomainError("phase grid has non-finite values")
    prob = np.atleast_1d(analytic_fringe(n_photons, phi))
    return FringeCurve(n_photons=n_photons, phi=phi, probability=prob)


def outcome_distribution(state: PureState, phi: float) -> dict[tuple[int, int], float]:
    """All (E, F) outcome probabilities after the interferometer."""
    return mzi_output(state, phi).probabilities()


__all__ = [
    "FRINGE_INPUT", "FRINGE_OUTCOME", "FockState", "FringeCurve", "MziSettings",
    "SUPPORTED_N", "analytic_fringe", "bs1", "bs2", "detection_probability",
    "fringe_curve", "mzi_output", "mzi_unitary", "outcome_distribution",
    "polarization_mzi_output", "polarization_mzi_transform",
]
