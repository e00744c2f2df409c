"""Monte Carlo model of the pulsed four-detector counting experiment.

Each pulse: draw a pair number, split the pairs into mutually
distinguishable groups, send every group through the interferometer
exactly, add the groups' output photon numbers, then detect. Three
threshold detectors share the H'' port through a balanced splitter, one
watches V''.

Random streams are keyed by (seed, phase index, chunk index) with a fixed
chunk size, so results do not depend on how chunks are spread over workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError
from .fock import DEFAULT_CUTOFF, basis_state
from .interferometer import SUPPORTED_N, outcome_distribution

CHUNK_SIZE = 2 ** 20
STATISTICS = ("thermal", "poissonian")
COUNT_COLUMNS = {1: "singles", 2: "twofolds", 4: "fourfolds"}


@dataclass(frozen=True)
class SourceModel:
    mean_pairs_per_pulse: float = 0.03
    purity: float = 0.83
    pair_number_statistics: str = "thermal"
    max_pairs: int = 4

    def __post_init__(self):
        if not self.mean_pairs_per_pulse >= 0:
            raise ConfigurationError("mean_pairs_per_pulse must be >= 0")
        if not 0 < self.purity <= 1:
            raise ConfigurationError("purity must lie in (0, 1]")
        if self.pair_number_statistics not in STATISTICS:
            raise ConfigurationError(
                f"pair_number_statistics must be one of {STATISTICS}")
        if self.max_pairs < 1:
            raise ConfigurationError("max_pairs must be >= 1")

    def pair_number_probabilities(self) -> np.ndarray:
        """P(n) for n = 0..max_pairs, renormalized after truncation."""
        mu = self.mean_pairs_per_pulse
        n = np.arange(self.max_pairs + 1)
        if mu == 0:
            p = (n == 0).astype(float)
        elif self.pair_number_statistics == "thermal":
            p = (mu / (1 + mu)) ** n / (1 + mu)
        else:
            log_fact = np.cumsum(np.log(np.maximum(n, 1)))
            p = np.exp(-mu + n * np.log(mu) - log_fact)
        return p / p.sum()


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    dark_count_probability: float = 0.0
    h_fanout: int = 3
    twofold_v_veto: bool = False
    v_detectors: int = field(default=1, init=False)
    number_resolving: bool = field(default=False, init=False)

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise ConfigurationError("efficiency must lie in [0, 1]")
        if not 0 <= self.dark_count_probability <= 1:
            raise ConfigurationError("dark_count_probability must lie in [0, 1]")
        if self.h_fanout < 1:
            raise ConfigurationError("h_fanout must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    pulses_per_phase: int
    phase_grid: tuple[float, ...]
    seed: int = 0
    source: SourceModel = SourceModel()
    detectors: DetectorModel = DetectorModel()
    # condition every pulse on exactly the pair number the fringe needs
    postselect_pairs: bool = False
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        grid = tuple(float(p) for p in np.atleast_1d(self.phase_grid))
        object.__setattr__(self, "phase_grid", grid)
        if self.pulses_per_phase <= 0:
            raise ConfigurationError("pulses_per_phase must be positive")
        if not grid:
            raise ConfigurationError("phase grid is empty")
        if not all(np.isfinite(grid)):
            raise ConfigurationError("phase grid has non-finite values")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")


@dataclass
class CountsRecord:
    phase: np.ndarray
    pulses: np.ndarray
    singles: np.ndarray
    twofolds: np.ndarray
    fourfolds: np.ndarray
    dropped: np.ndarray

    def counts(self, n_photons: int) -> np.ndarray:
        if n_photons not in COUNT_COLUMNS:
            raise DomainError(f"n_photons must be one of {SUPPORTED_N}")
        return getattr(self, COUNT_COLUMNS[n_photons])


def sample_pair_number(source: SourceModel, rng: np.random.Generator, size=None):
    """One pair number, or an array of ``size`` of them."""
    p = source.pair_number_probabilities()
    if size is None:
        return int(rng.choice(p.size, p=p))
    return rng.choice(p.size, size=size, p=p)


def distinguishability_assignment(pairs: int, purity: float,
                                  rng: np.random.Generator) -> list[int]:
    """Mode label per pair: label 0 with probability ``purity``, else a fresh one."""
    if not 0 < purity <= 1:
        raise DomainError("purity must lie in (0, 1]")
    labels: list[int] = []
    fresh = 1
    for i in range(pairs):
        if i == 0 or rng.random() < purity:
            labels.append(0)
        else:
            labels.append(fresh)
            fresh += 1
    return labels


def target_pairs(n_photons: int) -> int:
    return 2 if n_photons == 4 else 1


def _group_input(pairs: int, n_photons: int) -> tuple[int, int]:
    # the single-photon fringe blocks the V twin before the interferometer
    return (pairs, 0) if n_photons == 1 else (pairs, pairs)


@lru_cache(maxsize=4096)
def _group_distribution(pairs: int, n_photons: int, phi: float) -> tuple:
    state = basis_state(_group_input(pairs, n_photons), cutoff=2 * pairs)
    return tuple(sorted(outcome_distribution(state, phi).items()))


@lru_cache(maxsize=4096)
def pulse_outcome_distribution(pairs: int, main_group: int, n_photons: int,
                               phi: float) -> tuple[np.ndarray, np.ndarray]:
    """(E, F) photon-number distribution for ``pairs`` pairs of which
    ``main_group`` share one mode and the rest are each distinguishable.

    Returns ``(outcomes, probs)`` with ``outcomes`` of shape (m, 2).
    """
    dist = {(0, 0): 1.0}
    groups = [main_group] + [1] * (pairs - main_group)
    for g in groups:
        nxt: dict[tuple[int, int], float] = {}
        for (e0, f0), p0 in dist.items():
            for (e1, f1), p1 in _group_distribution(g, n_photons, phi):
                key = (e0 + e1, f0 + f1)
                nxt[key] = nxt.get(key, 0.0) + p0 * p1
        dist = nxt
    keys = sorted(dist)
    probs = np.array([dist[k] for k in keys])
    return np.array(keys, dtype=np.int64), probs / probs.sum()


def _simulate_chunk(config: RunConfig, n_photons: int, phase_index: int,
                    chunk_index: int, size: int) -> np.ndarray:
    """Returns [singles, twofolds, fourfolds, dropped] for one chunk."""
    phi = config.phase_grid[phase_index]
    src, det = config.source, config.detectors
    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(phase_index, chunk_index)))

    if config.postselect_pairs:
        pairs = np.full(size, target_pairs(n_photons), dtype=np.int64)
    else:
        # pulse order is irrelevant to the counts, so draw how many pulses carry
        # pairs, then their pair numbers from the distribution conditioned on n >= 1
        prob = src.pair_number_probabilities()
        n_lit = int(rng.binomial(size, 1.0 - prob[0])) if prob[0] < 1 else 0
        cdf = np.cumsum(prob[1:]) / np.sum(prob[1:]) if n_lit else np.ones(1)
        lit_pairs = 1 + np.minimum(np.searchsorted(cdf, rng.random(n_lit), side="right"),
                                   src.max_pairs - 1)
        # empty pulses only matter through dark counts
        n_empty = size - n_lit if det.dark_count_probability > 0 else 0
        pairs = np.concatenate([lit_pairs, np.zeros(n_empty, dtype=np.int64)])
    photons_in = pairs if n_photons == 1 else 2 * pairs
    dropped = photons_in > config.cutoff
    n_dropped = int(np.sum(dropped))
    pairs = pairs[~dropped]
    m = pairs.size
    main = np.where(pairs > 0, 1 + rng.binomial(np.maximum(pairs - 1, 0), src.purity), 0)

    n_e = np.zeros(m, dtype=np.int64)
    n_f = np.zeros(m, dtype=np.int64)
    lit = pairs > 0
    for n, k in sorted(set(zip(pairs[lit].tolist(), main[lit].tolist()))):
        sel = np.flatnonzero((pairs == n) & (main == k))
        outcomes, probs = pulse_outcome_distribution(n, k, n_photons, phi)
        pick = rng.choice(probs.size, size=sel.size, p=probs)
        n_e[sel] = outcomes[pick, 0]
        n_f[sel] = outcomes[pick, 1]

    surv_e = rng.binomial(n_e, det.efficiency)
    surv_f = rng.binomial(n_f, det.efficiency)
    routed = rng.multinomial(surv_e, np.full(det.h_fanout, 1.0 / det.h_fanout))
    dark_h = rng.random((m, det.h_fanout)) < det.dark_count_probability
    dark_v = rng.random(m) < det.dark_count_probability

    clicks_h = ((routed > 0) | dark_h).sum(axis=1)
    click_v = (surv_f > 0) | dark_v
    twofold = clicks_h >= 2
    if det.twofold_v_veto:
        twofold &= ~click_v
    fourfold = (clicks_h >= 3) & click_v
    return np.array([np.sum(click_v), np.sum(twofold), np.sum(fourfold), n_dropped],
                    dtype=np.int64)


def simulate_fringe(config: RunConfig, n_photons: int, workers: int = 1) -> CountsRecord:
    if n_photons not in SUPPORTED_N:
        raise DomainError(f"n_photons must be one of {SUPPORTED_N}, got {n_photons}")
    n_chunks = -(-config.pulses_per_phase // CHUNK_SIZE)
    tasks = []
    for ip in range(len(config.phase_grid)):
        for ic in range(n_chunks):
            size = min(CHUNK_SIZE, config.pulses_per_phase - ic * CHUNK_SIZE)
            tasks.append((ip, ic, size))

    def run(task):
        ip, ic, size = task
        return ip, _simulate_chunk(config, n_photons, ip, ic, size)

    totals = np.zeros((len(config.phase_grid), 4), dtype=np.int64)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    for ip, counts in results:
        totals[ip] += counts

    return CountsRecord(
        phase=np.array(config.phase_grid),
        pulses=np.full(len(config.phase_grid), config.pulses_per_phase, dtype=np.int64),
        singles=totals[:, 0], twofolds=totals[:, 1], fourfolds=totals[:, 2],
        dropped=totals[:, 3])


def config_metadata(config: RunConfig, n_photons: int) -> dict:
    meta = asdict(config)
    meta.pop("phase_grid")
    meta["n_photons"] = n_photons
    meta["phase_points"] = len(config.phase_grid)
    return meta


def format_counts_csv(record: CountsRecord, metadata: str = "") -> str:
    lines = [f"# {line}" if line else "#" for line in metadata.splitlines()]
    lines.append(f"# dropped_pulses = {int(record.dropped.sum())}")
    lines.append("phase_rad, pulses, singles, twofolds, fourfolds")
    for row in zip(record.phase, record.pulses, record.singles, record.twofolds,
                   record.fourfolds):
        lines.append(f"{float(row[0])!r}, {int(row[1])}, {int(row[2])}, {int(row[3])}, "
                     f"{int(row[4])}")
    return "\n".join(lines) + "\n"


def write_counts_csv(record: CountsRecord, path, metadata: str = "") -> None:
    Path(path).write_text(format_counts_csv(record, metadata), encoding="utf-8")


def read_counts_csv(path) -> CountsRecord:
    rows = []
    header = None
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if header is None:
            header = fields
            if header != ["phase_rad", "pulses", "singles", "twofolds", "fourfolds"]:
                raise ConfigurationError(f"{path}: unexpected counts header {header}")
            continue
        if len(fields) != 5:
            raise ConfigurationError(f"{path}: malformed row {line!r}")
        try:
            rows.append((float(fields[0]), *(int(f) for f in fields[1:])))
        except ValueError as exc:
            raise ConfigurationError(f"{path}: malformed row {line!r}") from exc
    if header is None or not rows:
        raise ConfigurationError(f"{path}: no counts found")
    cols = list(zip(*rows))
    return CountsRecord(phase=np.array(cols[0]), pulses=np.array(cols[1]),
                        singles=np.array(cols[2]), twofolds=np.array(cols[3]),
                        fourfolds=np.array(cols[4]), dropped=np.zeros(len(rows), dtype=np.int64))
