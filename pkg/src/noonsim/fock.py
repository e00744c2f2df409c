"""Few-photon Fock states on a handful of optical modes.

States are stored sparsely as ``{occupations: amplitude}`` maps. Linear optics
acts on creation operators: a two-mode unitary ``u`` sends

    a_i^dag -> u[0, 0] a_i^dag + u[1, 0] a_j^dag
    a_j^dag -> u[0, 1] a_i^dag + u[1, 1] a_j^dag

so a single photon's amplitude vector transforms as ``psi -> u @ psi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial, isfinite, sqrt
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError

DEFAULT_CUTOFF = 8
PRUNE_THRESHOLD = 1e-15
UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class FockState:
    """Occupation-number vector over a fixed list of modes."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if any(n < 0 for n in occ):
            raise DomainError(f"negative occupation in {occ}")
        object.__setattr__(self, "occupations", occ)

    @property
    def total(self) -> int:
        return sum(self.occupations)

    @property
    def mode_count(self) -> int:
        return len(self.occupations)

    def __iter__(self):
        return iter(self.occupations)

    def __repr__(self):
        return "|" + ",".join(map(str, self.occupations)) + ">"


def _as_occupations(outcome) -> tuple[int, ...]:
    if isinstance(outcome, FockState):
        return outcome.occupations
    return FockState(tuple(outcome)).occupations


@dataclass(frozen=True)
class PureState:
    """Normalized superposition of Fock basis states.

    Construct through :func:`basis_state` or :meth:`from_terms`; the mapping
    is treated as immutable once built.
    """

    terms: Mapping[tuple[int, ...], complex]
    mode_count: int
    cutoff: int = DEFAULT_CUTOFF

    @classmethod
    def from_terms(cls, terms: Mapping, mode_count: int | None = None,
                   cutoff: int = DEFAULT_CUTOFF, normalize: bool = True) -> "PureState":
        clean: dict[tuple[int, ...], complex] = {}
        for key, amp in terms.items():
            occ = _as_occupations(key)
            clean[occ] = clean.get(occ, 0j) + complex(amp)
        if mode_count is None:
            if not clean:
                raise DomainError("cannot infer mode_count from an empty state")
            mode_count = len(next(iter(clean)))
        for occ in clean:
            if len(occ) != mode_count:
                raise DomainError(f"{occ} does not have {mode_count} modes")
            if sum(occ) > cutoff:
                raise DomainError(f"{occ} exceeds the photon-number cutoff {cutoff}")
        clean = {k: v for k, v in clean.items() if abs(v) >= PRUNE_THRESHOLD}
        state = cls(terms=clean, mode_count=mode_count, cutoff=cutoff)
        return state.normalize() if normalize else state

    def norm(self) -> float:
        return sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def normalize(self) -> "PureState":
        nrm = self.norm()
        if nrm == 0.0:
            raise DomainError("cannot normalize the zero vector")
        terms = {k: v / nrm for k, v in self.terms.items() if abs(v / nrm) >= PRUNE_THRESHOLD}
        return PureState(terms=terms, mode_count=self.mode_count, cutoff=self.cutoff)

    def amplitude(self, outcome) -> complex:
        return self.terms.get(_as_occupations(outcome), 0j)

    def photon_number_distribution(self) -> dict[int, float]:
        dist: dict[int, float] = {}
        for occ, amp in self.terms.items():
            n = sum(occ)
            dist[n] = dist.get(n, 0.0) + abs(amp) ** 2
        return dist

    def probabilities(self) -> dict[tuple[int, ...], float]:
        return {occ: abs(amp) ** 2 for occ, amp in self.terms.items()}

    def __repr__(self):
        body = " + ".join(f"({a:.6g}){FockState(k)!r}" for k, a in sorted(self.terms.items()))
        return f"PureState({body or '0'})"


@dataclass(frozen=True)
class TwoModeUnitary:
    """A 2x2 unitary acting on the creation operators of a mode pair."""

    u: np.ndarray = field(repr=True)

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        if u.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise DomainError("matrix has non-finite entries")
        if np.max(np.abs(u.conj().T @ u - np.eye(2))) > UNITARITY_TOL:
            raise DomainError("matrix is not unitary within 1e-12")
        u.flags.writeable = False
        object.__setattr__(self, "u", u)

    def dagger(self) -> "TwoModeUnitary":
        return TwoModeUnitary(self.u.conj().T)

    def __matmul__(self, other: "TwoModeUnitary") -> "TwoModeUnitary":
        """Composition; ``(a @ b)`` applies ``b`` first."""
        return TwoModeUnitary(self.u @ other.u)


def basis_state(occupations: Iterable[int], cutoff: int = DEFAULT_CUTOFF) -> PureState:
    occ = FockState(tuple(occupations)).occupations
    if sum(occ) > cutoff:
        raise DomainError(f"total photon number {sum(occ)} exceeds cutoff {cutoff}")
    return PureState(terms={occ: 1.0 + 0j}, mode_count=len(occ), cutoff=cutoff)


def beamsplitter_5050() -> TwoModeUnitary:
    """Balanced beamsplitter with a_A^dag -> (a_C^dag - a_D^dag)/sqrt2."""
    return TwoModeUnitary(np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0))


def phase_shifter(phi: float) -> TwoModeUnitary:
    """Phase ``phi`` on the second mode of the pair."""
    if not isfinite(phi):
        raise DomainError(f"phase must be finite, got {phi}")
    return TwoModeUnitary(np.diag([1.0, np.exp(1j * phi)]))


def apply_two_mode_unitary(state: PureState, mode_pair: tuple[int, int],
                           u: TwoModeUnitary) -> PureState:
    i, j = mode_pair
    m = state.mode_count
    if i == j or not (0 <= i < m and 0 <= j < m):
        raise DomainError(f"invalid mode pair {mode_pair} for {m} modes")
    if not isinstance(u, TwoModeUnitary):
        u = TwoModeUnitary(u)
    (u00, u01), (u10, u11) = u.u
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.terms.items():
        ni, nj = occ[i], occ[j]
        total = ni + nj
        pref = amp / sqrt(factorial(ni) * factorial(nj))
        # coefficient of (a_i^dag)^p (a_j^dag)^(total - p) in the expanded product
        poly = [0j] * (total + 1)
        for k in range(ni + 1):
            ck = comb(ni, k) * u00 ** k * u10 ** (ni - k)
            for l in range(nj + 1):
                poly[k + l] += ck * comb(nj, l) * u01 ** l * u11 ** (nj - l)
        for p, coeff in enumerate(poly):
            if coeff == 0:
                continue
            new = list(occ)
            new[i], new[j] = p, total - p
            key = tuple(new)
            out[key] = out.get(key, 0j) + pref * coeff * sqrt(factorial(p) * factorial(total - p))
    return PureState.from_terms(out, mode_count=m, cutoff=state.cutoff)


def probability(state: PureState, outcome) -> float:
    occ = _as_occupations(outcome)
    if len(occ) != state.mode_count:
        raise DomainError(f"outcome {occ} does not match {state.mode_count} modes")
    return abs(state.terms.get(occ, 0j)) ** 2


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b>, antilinear in ``a``."""
    if a.mode_count != b.mode_count:
        raise DomainError(f"mode counts differ: {a.mode_count} vs {b.mode_count}")
    small, large = (a, b) if len(a.terms) <= len(b.terms) else (b, a)
    acc = 0j
    for occ in small.terms:
        if occ in large.terms:
            acc += a.terms[occ].conjugate() * b.terms[occ]
    return acc
