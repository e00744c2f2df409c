"""Joint spectral amplitude of a group-velocity-matched type-II SPDC source.

The JSA is sigma(ws, wi) = f(ws, wi) * g(ws + wi) on a uniform angular
frequency grid. The phase-matching function uses a first-order expansion of
the wavevector mismatch about degeneracy, with the poling period assumed to
cancel the zeroth-order term:

    dk * L / 2 = L/2 * [(tau_p - tau_s) Ws + (tau_p - tau_i) Wi]

where tau are inverse group velocities (ps/mm) and W are detunings from the
degenerate frequency.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import ConfigurationError, DomainError

# x at which sinc(x)^2 = 1/2
_SINC2_HALF = 1.3915573782515103

# Inverse group velocities shipped as defaults. Only the differences to the
# pump matter; the offset of +/-0.1307 ps/mm around the pump value is the
# calibration that minimizes |K - 1.21| on the default grid
# (scripts/calibrate_group_delay.py).
DEFAULT_GROUP_DELAY_PUMP = 6.2300
DEFAULT_GROUP_DELAY_OFFSET = 0.1307
DEFAULT_GROUP_DELAY_SIGNAL = DEFAULT_GROUP_DELAY_PUMP - DEFAULT_GROUP_DELAY_OFFSET
DEFAULT_GROUP_DELAY_IDLER = DEFAULT_GROUP_DELAY_PUMP + DEFAULT_GROUP_DELAY_OFFSET

ENVELOPES = ("gaussian", "flat")


def wavelength_to_omega(wavelength_nm: float) -> float:
    return 2 * np.pi * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)


def bandwidth_nm_to_omega(fwhm_nm: float, center_nm: float) -> float:
    """Convert a small wavelength FWHM to angular frequency about ``center_nm``."""
    return 2 * np.pi * SPEED_OF_LIGHT * fwhm_nm * 1e-9 / (center_nm * 1e-9) ** 2


def bandwidth_omega_to_nm(fwhm_omega: float, center_omega: float) -> float:
    return 2 * np.pi * SPEED_OF_LIGHT * fwhm_omega / center_omega ** 2 * 1e9


@dataclass(frozen=True)
class PumpSpec:
    center_wavelength_nm: float = 792.0
    fwhm_bandwidth_nm: float = 0.4  # intensity FWHM; inf gives a flat envelope
    repetition_rate_hz: float = 8.0e7
    envelope_shape: str = "gaussian"

    def __post_init__(self):
        if self.envelope_shape not in ENVELOPES:
            raise ConfigurationError(f"unknown pump envelope {self.envelope_shape!r}")
        for name in ("center_wavelength_nm", "fwhm_bandwidth_nm", "repetition_rate_hz"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"pump {name} must be positive")

    @property
    def is_flat(self) -> bool:
        return self.envelope_shape == "flat" or np.isinf(self.fwhm_bandwidth_nm)

    @property
    def fwhm_omega(self) -> float:
        if self.is_flat:
            return np.inf
        return bandwidth_nm_to_omega(self.fwhm_bandwidth_nm, self.center_wavelength_nm)

    def envelope(self, detuning):
        """Field amplitude at pump detuning (rad/s), unit peak."""
        detuning = np.asarray(detuning, dtype=float)
        if self.is_flat:
            return np.ones_like(detuning)
        # intensity exp(-W^2/s^2) has FWHM 2 s sqrt(ln 2)
        s = self.fwhm_omega / (2 * np.sqrt(np.log(2)))
        return np.exp(-detuning ** 2 / (2 * s ** 2))


@dataclass(frozen=True)
class PhaseMatchSpec:
    crystal_length_mm: float = 30.0
    poling_period_um: float = 46.1
    group_delay_signal_ps_per_mm: float = DEFAULT_GROUP_DELAY_SIGNAL
    group_delay_idler_ps_per_mm: float = DEFAULT_GROUP_DELAY_IDLER
    group_delay_pump_ps_per_mm: float = DEFAULT_GROUP_DELAY_PUMP
    degenerate_wavelength_nm: float = 1584.0
    signal_idler_offset_nm: float = 0.0
    beam_waist_um: float = 50.0  # metadata only

    def __post_init__(self):
        for name in ("crystal_length_mm", "poling_period_um", "degenerate_wavelength_nm",
                     "beam_waist_um"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"phase-matching {name} must be positive")
        for name in ("group_delay_signal_ps_per_mm", "group_delay_idler_ps_per_mm",
                     "group_delay_pump_ps_per_mm", "signal_idler_offset_nm"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigurationError(f"phase-matching {name} must be finite")

    @property
    def mismatch_slopes(self) -> tuple[float, float]:
        """d(dk L / 2)/dW for signal and idler, in seconds."""
        half_length = self.crystal_length_mm / 2
        a = (self.group_delay_pump_ps_per_mm - self.group_delay_signal_ps_per_mm) * 1e-12
        b = (self.group_delay_pump_ps_per_mm - self.group_delay_idler_ps_per_mm) * 1e-12
        return a * half_length, b * half_length

    @property
    def fwhm_omega(self) -> float:
        """FWHM of |f|^2 along the more steeply phase-matched frequency axis."""
        steepest = max(abs(s) for s in self.mismatch_slopes)
        if steepest == 0:
            return np.inf
        return 2 * _SINC2_HALF / steepest

    def amplitude(self, ws, wi):
        """Phase-matching amplitude at signal/idler detunings (rad/s)."""
        a, b = self.mismatch_slopes
        shift = 0.5 * bandwidth_nm_to_omega(self.signal_idler_offset_nm,
                                            self.degenerate_wavelength_nm)
        x = a * (np.asarray(ws) - shift) + b * (np.asarray(wi) + shift)
        return np.sinc(x / np.pi)


@dataclass(frozen=True)
class GridSpec:
    """Square frequency grid centred on degeneracy.

    The half-width is ``span`` times the pump FWHM (the phase-matching FWHM
    for a flat pump) unless ``half_span_rad_s`` pins it explicitly.
    """

    n_signal: int = 256
    n_idler: int = 256
    span: float = 8.0
    half_span_rad_s: float | None = None

    def half_width(self, pump: PumpSpec, pm: PhaseMatchSpec) -> float:
        if self.half_span_rad_s is not None:
            return float(self.half_span_rad_s)
        unit = pump.fwhm_omega if not pump.is_flat else pm.fwhm_omega
        return self.span * unit


@dataclass(frozen=True)
class JsaMatrix:
    signal_axis: np.ndarray
    idler_axis: np.ndarray
    amplitude: np.ndarray  # rows = signal, cols = idler

    def __post_init__(self):
        s = np.array(self.signal_axis, dtype=float)
        i = np.array(self.idler_axis, dtype=float)
        amp = np.array(self.amplitude, dtype=complex)
        if amp.shape != (s.size, i.size):
            raise DomainError(f"amplitude shape {amp.shape} does not match axes "
                              f"({s.size}, {i.size})")
        for ax in (s, i):
            if ax.size > 1 and not np.all(np.diff(ax) > 0):
                raise DomainError("frequency axes must be strictly increasing")
        for arr in (s, i, amp):
            arr.flags.writeable = False
        object.__setattr__(self, "signal_axis", s)
        object.__setattr__(self, "idler_axis", i)
        object.__setattr__(self, "amplitude", amp)

    @property
    def cell_area(self) -> float:
        ds = self.signal_axis[1] - self.signal_axis[0] if self.signal_axis.size > 1 else 1.0
        di = self.idler_axis[1] - self.idler_axis[0] if self.idler_axis.size > 1 else 1.0
        return ds * di

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def normalized(self) -> "JsaMatrix":
        total = np.sum(self.intensity) * self.cell_area
        if total == 0:
            raise DomainError("cannot normalize an all-zero JSA")
        return JsaMatrix(self.signal_axis, self.idler_axis, self.amplitude / np.sqrt(total))


@dataclass(frozen=True)
class SchmidtResult:
    coefficients: np.ndarray
    schmidt_number: float
    purity: float


@dataclass(frozen=True)
class MarginalSpectrum:
    axis: np.ndarray  # rad/s
    density: np.ndarray  # unit peak
    fwhm_rad_s: float
    fwhm_nm: float


def build_jsa(pump: PumpSpec = PumpSpec(), pm: PhaseMatchSpec = PhaseMatchSpec(),
              grid: GridSpec = GridSpec()) -> JsaMatrix:
    if min(grid.n_signal, grid.n_idler) < 64:
        raise ConfigurationError(f"grid sizes must be >= 64, got {grid.n_signal}x{grid.n_idler}")
    finite = [w for w in (pump.fwhm_omega, pm.fwhm_omega) if np.isfinite(w)]
    if not finite:
        raise ConfigurationError("both pump and phase-matching are flat; the JSA is unbounded")
    widest = max(finite)
    half = grid.half_width(pump, pm)
    if not (np.isfinite(half) and 2 * half >= 6 * widest):
        raise ConfigurationError(
            f"grid span {2 * half:.4g} rad/s is narrower than 6x the widest bandwidth "
            f"{widest:.4g} rad/s")
    w0 = wavelength_to_omega(pm.degenerate_wavelength_nm)
    pump_offset = wavelength_to_omega(pump.center_wavelength_nm) - 2 * w0
    ws = np.linspace(-half, half, grid.n_signal)
    wi = np.linspace(-half, half, grid.n_idler)
    WS, WI = np.meshgrid(ws, wi, indexing="ij")
    amp = pm.amplitude(WS, WI) * pump.envelope(WS + WI - pump_offset)
    return JsaMatrix(w0 + ws, w0 + wi, amp).normalized()


def schmidt_decompose(m) -> SchmidtResult:
    """Schmidt spectrum of a JSA (or any real/complex 2-D array)."""
    arr = np.asarray(m.amplitude if isinstance(m, JsaMatrix) else m)
    if arr.ndim != 2:
        raise DomainError(f"expected a matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix has non-finite entries")
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    if scale == 0:
        raise DomainError("matrix is all zero")
    sv = np.linalg.svd(arr / scale, compute_uv=False)
    p = sv ** 2 / np.sum(sv ** 2)
    k = 1.0 / np.sum(p ** 2)
    return SchmidtResult(coefficients=p, schmidt_number=float(k), purity=float(1.0 / k))


def _fwhm(x: np.ndarray, y: np.ndarray) -> float:
    peak = int(np.argmax(y))
    half = y[peak] / 2
    lo = peak
    while lo > 0 and y[lo - 1] >= half:
        lo -= 1
    hi = peak
    while hi < y.size - 1 and y[hi + 1] >= half:
        hi += 1
    step = x[1] - x[0] if x.size > 1 else 1.0
    # beyond the grid edge the curve is taken as zero one step further out
    if lo > 0:
        left = x[lo - 1] + (half - y[lo - 1]) * (x[lo] - x[lo - 1]) / (y[lo] - y[lo - 1])
    else:
        left = x[0] - step + half * step / y[0]
    if hi < y.size - 1:
        right = x[hi] + (y[hi] - half) * (x[hi + 1] - x[hi]) / (y[hi] - y[hi + 1])
    else:
        right = x[-1] + step - half * step / y[-1]
    return float(right - left)


def marginal_spectrum(m: JsaMatrix, which: str = "signal") -> MarginalSpectrum:
    if which == "signal":
        axis, density = m.signal_axis, m.intensity.sum(axis=1)
    elif which == "idler":
        axis, density = m.idler_axis, m.intensity.sum(axis=0)
    else:
        raise DomainError(f"which must be 'signal' or 'idler', got {which!r}")
    density = density / density.max()
    fw = _fwhm(axis, density)
    center = axis[int(np.argmax(density))]
    return MarginalSpectrum(axis=axis, density=density, fwhm_rad_s=fw,
                            fwhm_nm=bandwidth_omega_to_nm(fw, center))


def mean_pairs_per_pulse(rate_per_mw: float, power_mw: float, rep_rate_hz: float) -> float:
    if not (rate_per_mw > 0 and power_mw > 0 and rep_rate_hz > 0):
        raise DomainError("pair rate, power and repetition rate must all be positive")
    return rate_per_mw * power_mw / rep_rate_hz


@dataclass(frozen=True)
class SourceReport:
    k_amplitude: float
    k_intensity: float
    purity: float
    signal_fwhm_nm: float
    idler_fwhm_nm: float
    schmidt: SchmidtResult = field(repr=False)


def analyze_source(jsa: JsaMatrix) -> SourceReport:
    amp = schmidt_decompose(jsa)
    inten = schmidt_decompose(jsa.intensity)
    return SourceReport(
        k_amplitude=amp.schmidt_number,
        k_intensity=inten.schmidt_number,
        purity=amp.purity,
        signal_fwhm_nm=marginal_spectrum(jsa, "signal").fwhm_nm,
        idler_fwhm_nm=marginal_spectrum(jsa, "idler").fwhm_nm,
        schmidt=amp,
    )


def write_jsa_csv(jsa: JsaMatrix, path, metadata: str = "") -> Path:
    """Write the JSA as CSV plus a ``<path>.meta.txt`` sidecar; returns the sidecar path."""
    path = Path(path)
    WS, WI = np.meshgrid(jsa.signal_axis, jsa.idler_axis, indexing="ij")
    table = np.column_stack([WS.ravel(), WI.ravel(), jsa.amplitude.real.ravel(),
                             jsa.amplitude.imag.ravel()])
    np.savetxt(path, table, fmt="%.17g", delimiter=", ",
               header="omega_s_rad_s, omega_i_rad_s, re, im", comments="")
    sidecar = path.with_name(path.name + ".meta.txt")
    sidecar.write_text(
        f"n_signal = {jsa.signal_axis.size}\nn_idler = {jsa.idler_axis.size}\n"
        f"signal_range_rad_s = {jsa.signal_axis[0]!r} .. {jsa.signal_axis[-1]!r}\n"
        f"idler_range_rad_s = {jsa.idler_axis[0]!r} .. {jsa.idler_axis[-1]!r}\n"
        + metadata, encoding="utf-8")
    return sidecar


def read_jsa_csv(path) -> JsaMatrix:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = [h.strip() for h in fh.readline().split(",")]
    if header != ["omega_s_rad_s", "omega_i_rad_s", "re", "im"]:
        raise ConfigurationError(f"{path}: unexpected JSA header {header}")
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    signal = np.unique(table[:, 0])
    idler = np.unique(table[:, 1])
    if table.shape[0] != signal.size * idler.size:
        raise ConfigurationError(f"{path}: rows do not form a rectangular grid")
    amp = (table[:, 2] + 1j * table[:, 3]).reshape(signal.size, idler.size)
    return JsaMatrix(signal, idler, amp)


def spec_dict(pump: PumpSpec, pm: PhaseMatchSpec, grid: GridSpec) -> dict:
    return {"pump": asdict(pump), "phasematch": asdict(pm), "grid": asdict(grid)}
