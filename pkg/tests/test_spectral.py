import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noonsim.errors import ConfigurationError, DomainError
from noonsim.spectral import (GridSpec, JsaMatrix, PhaseMatchSpec, PumpSpec, analyze_source,
                              bandwidth_nm_to_omega, bandwidth_omega_to_nm, build_jsa,
                              marginal_spectrum, mean_pairs_per_pulse, read_jsa_csv,
                              schmidt_decompose, write_jsa_csv)


@pytest.fixture(scope="module")
def default_jsa():
    return build_jsa()


def gaussian(x, width):
    return np.exp(-x ** 2 / (2 * width ** 2))


# ---- types -------------------------------------------------------------------

def test_pump_envelope_unit_peak_and_intensity_fwhm():
    pump = PumpSpec()
    assert pump.envelope(0.0) == 1.0
    half = pump.fwhm_omega / 2
    assert abs(pump.envelope(half) ** 2 - 0.5) < 1e-12


def test_flat_pump_envelope():
    for pump in (PumpSpec(envelope_shape="flat"), PumpSpec(fwhm_bandwidth_nm=np.inf)):
        assert pump.is_flat
        assert np.all(pump.envelope([-1e14, 0, 3e13]) == 1)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        PumpSpec(fwhm_bandwidth_nm=0)
    with pytest.raises(ConfigurationError):
        PumpSpec(envelope_shape="sech")
    with pytest.raises(ConfigurationError):
        PhaseMatchSpec(crystal_length_mm=-1)
    with pytest.raises(ConfigurationError):
        PhaseMatchSpec(group_delay_idler_ps_per_mm=np.nan)


def test_bandwidth_conversion_round_trip():
    w = bandwidth_nm_to_omega(1.7, 1584.0)
    center = 2 * np.pi * 299792458.0 / 1584e-9
    assert bandwidth_omega_to_nm(w, center) == pytest.approx(1.7, rel=1e-12)


def test_jsa_matrix_validation():
    with pytest.raises(DomainError):
        JsaMatrix([0, 1], [0, 1, 2], np.ones((2, 2)))
    with pytest.raises(DomainError):
        JsaMatrix([1, 0], [0, 1], np.ones((2, 2)))
    m = JsaMatrix([0, 1], [0, 1], np.ones((2, 2)))
    with pytest.raises(ValueError):
        m.amplitude[0, 0] = 2


# ---- build_jsa -----------------------------------------------------------------

def test_build_jsa_is_normalized(default_jsa):
    assert np.sum(default_jsa.intensity) * default_jsa.cell_area == pytest.approx(1, abs=1e-12)
    assert default_jsa.amplitude.shape == (256, 256)


def test_build_jsa_rejects_small_or_narrow_grid():
    with pytest.raises(ConfigurationError):
        build_jsa(grid=GridSpec(n_signal=32, n_idler=256))
    with pytest.raises(ConfigurationError, match="6x"):
        build_jsa(grid=GridSpec(span=1.0))
    with pytest.raises(ConfigurationError):
        build_jsa(PumpSpec(envelope_shape="flat"),
                  PhaseMatchSpec(group_delay_signal_ps_per_mm=6.23,
                                 group_delay_idler_ps_per_mm=6.23))


def test_flat_pump_gives_phase_matching_alone():
    pump, pm = PumpSpec(envelope_shape="flat"), PhaseMatchSpec()
    jsa = build_jsa(pump, pm)
    w0 = jsa.signal_axis.mean()
    WS, WI = np.meshgrid(jsa.signal_axis - w0, jsa.idler_axis - w0, indexing="ij")
    f = pm.amplitude(WS, WI)
    assert np.linalg.matrix_rank(jsa.amplitude, tol=1e-9 * np.abs(jsa.amplitude).max()) == \
        np.linalg.matrix_rank(f, tol=1e-9 * np.abs(f).max())
    assert schmidt_decompose(jsa).schmidt_number == pytest.approx(
        schmidt_decompose(f).schmidt_number, rel=1e-9)


def test_phase_matching_alone_is_positively_correlated():
    pm = PhaseMatchSpec()
    w = np.linspace(-3, 3, 301) * pm.fwhm_omega
    WS, WI = np.meshgrid(w, w, indexing="ij")
    inten = np.abs(pm.amplitude(WS, WI)) ** 2
    inten /= inten.sum()
    cov = np.sum(inten * WS * WI) - np.sum(inten * WS) * np.sum(inten * WI)
    assert cov > 0


def test_default_jsa_is_nearly_round(default_jsa):
    sig = marginal_spectrum(default_jsa, "signal")
    idl = marginal_spectrum(default_jsa, "idler")
    step = default_jsa.signal_axis[1] - default_jsa.signal_axis[0]
    assert abs(sig.fwhm_rad_s - idl.fwhm_rad_s) <= step


def test_signal_idler_offset_shifts_marginals():
    jsa = build_jsa(pm=PhaseMatchSpec(signal_idler_offset_nm=0.5))
    sig, idl = marginal_spectrum(jsa, "signal"), marginal_spectrum(jsa, "idler")
    peak_s = sig.axis[np.argmax(sig.density)]
    peak_i = idl.axis[np.argmax(idl.density)]
    assert peak_s > peak_i


# ---- schmidt_decompose ---------------------------------------------------------

def test_separable_function_has_k_one():
    x = np.linspace(-5, 5, 128)
    m = np.outer(gaussian(x, 1.0), gaussian(x - 0.5, 2.0) * np.exp(1j * x))
    res = schmidt_decompose(m)
    assert res.schmidt_number == pytest.approx(1, abs=1e-9)
    assert res.purity == pytest.approx(1, abs=1e-9)


def test_schmidt_examples_on_defaults(default_jsa):
    amp = schmidt_decompose(default_jsa)
    inten = schmidt_decompose(default_jsa.intensity)
    assert amp.schmidt_number == pytest.approx(1.21, abs=0.05)
    assert inten.schmidt_number == pytest.approx(1.01, abs=0.02)
    assert amp.purity == pytest.approx(0.83, abs=0.03)


def test_schmidt_coefficients_sorted_and_normalized(default_jsa):
    p = schmidt_decompose(default_jsa).coefficients
    assert np.all(np.diff(p) <= 0)
    assert p.sum() == pytest.approx(1, abs=1e-12)
    assert np.all(p >= 0)


def test_schmidt_errors():
    with pytest.raises(DomainError):
        schmidt_decompose(np.zeros((4, 4)))
    with pytest.raises(DomainError):
        schmidt_decompose(np.array([[1.0, np.nan], [0, 1]]))
    with pytest.raises(DomainError):
        schmidt_decompose(np.ones(4))


matrices = st.integers(0, 2 ** 32 - 1).map(
    lambda s: np.random.default_rng(s).normal(size=(12, 9))
    + 1j * np.random.default_rng(s + 1).normal(size=(12, 9)))


@settings(max_examples=50)
@given(matrices, st.floats(1e-3, 1e3), st.floats(-np.pi, np.pi))
def test_schmidt_scalar_invariance(m, mag, angle):
    a = schmidt_decompose(m)
    b = schmidt_decompose(m * mag * np.exp(1j * angle))
    assert np.allclose(a.coefficients, b.coefficients, atol=1e-12)
    assert abs(a.schmidt_number - b.schmidt_number) < 1e-12
    assert abs(a.purity - b.purity) < 1e-12


@settings(max_examples=50)
@given(matrices)
def test_schmidt_transpose_symmetry(m):
    assert np.allclose(schmidt_decompose(m).coefficients,
                       schmidt_decompose(m.T).coefficients, atol=1e-12)


@settings(max_examples=50)
@given(matrices, st.integers(1, 3))
def test_k_at_least_one_and_rank_one_iff_k_one(m, rank):
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    low = (u[:, :rank] * s[:rank]) @ vh[:rank]
    res = schmidt_decompose(low)
    assert res.schmidt_number >= 1 - 1e-12
    sv = np.linalg.svd(low, compute_uv=False)
    is_rank_one = sv[1] < 1e-9 * sv[0]
    assert is_rank_one == (rank == 1)
    assert (abs(res.schmidt_number - 1) < 1e-9) == is_rank_one


def test_grid_convergence_at_defaults(default_jsa):
    k256 = schmidt_decompose(default_jsa).schmidt_number
    k512 = schmidt_decompose(build_jsa(grid=GridSpec(512, 512))).schmidt_number
    assert abs(k512 - k256) / k256 < 0.005


def test_default_pump_bandwidth_near_optimal():
    pm = PhaseMatchSpec()

    def k(fwhm):
        pump = PumpSpec(fwhm_bandwidth_nm=fwhm)
        half = 8 * max(pump.fwhm_omega, pm.fwhm_omega)
        grid = GridSpec(256, 256, half_span_rad_s=half)
        return schmidt_decompose(build_jsa(pump, pm, grid)).schmidt_number
    sweep = [k(f) for f in np.linspace(0.1, 1.0, 19)]
    assert k(0.4) <= 1.05 * min(sweep)


# ---- marginals -----------------------------------------------------------------

def test_single_pixel_fwhm_is_one_step():
    axis = np.linspace(1e15, 1.001e15, 65)
    amp = np.zeros((65, 65))
    amp[32, 32] = 1
    m = JsaMatrix(axis, axis, amp)
    step = axis[1] - axis[0]
    assert marginal_spectrum(m, "signal").fwhm_rad_s == pytest.approx(step, rel=1e-9)


def test_gaussian_marginal_fwhm_by_interpolation():
    axis = np.linspace(90, 110, 401)
    width = 1.3
    amp = np.outer(gaussian(axis - 100, width), gaussian(axis - 100, 2.0))
    m = JsaMatrix(axis, axis, amp)
    # |amp|^2 has standard deviation width / sqrt(2)
    expected = 2 * np.sqrt(2 * np.log(2)) * width / np.sqrt(2)
    assert marginal_spectrum(m, "signal").fwhm_rad_s == pytest.approx(expected, rel=1e-3)


def test_marginal_rejects_unknown_axis(default_jsa):
    with pytest.raises(DomainError):
        marginal_spectrum(default_jsa, "pump")


# ---- pair rate -----------------------------------------------------------------

def test_mean_pairs_examples():
    assert mean_pairs_per_pulse(48000, 50, 8.0e7) == 0.03
    assert mean_pairs_per_pulse(48000, 1, 8.0e7) == pytest.approx(6.0e-4, rel=1e-15)
    for bad in [(48000, 0, 8e7), (0, 50, 8e7), (48000, 50, -1)]:
        with pytest.raises(DomainError):
            mean_pairs_per_pulse(*bad)


# ---- export --------------------------------------------------------------------

def test_jsa_csv_round_trip_is_bit_exact(tmp_path):
    jsa = build_jsa(grid=GridSpec(64, 64))
    path = tmp_path / "jsa.csv"
    sidecar = write_jsa_csv(jsa, path, metadata="note = test\n")
    assert path.read_text().splitlines()[0] == "omega_s_rad_s, omega_i_rad_s, re, im"
    assert sidecar.name == "jsa.csv.meta.txt"
    assert "n_signal = 64" in sidecar.read_text()
    back = read_jsa_csv(path)
    assert np.array_equal(back.signal_axis, jsa.signal_axis)
    assert np.array_equal(back.idler_axis, jsa.idler_axis)
    assert np.array_equal(back.amplitude, jsa.amplitude)
    a, b = analyze_source(back), analyze_source(jsa)
    assert (a.k_amplitude, a.k_intensity, a.signal_fwhm_nm) == \
        (b.k_amplitude, b.k_intensity, b.signal_fwhm_nm)


def test_read_jsa_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a, b, c, d\n1, 2, 3, 4\n")
    with pytest.raises(ConfigurationError):
        read_jsa_csv(path)
