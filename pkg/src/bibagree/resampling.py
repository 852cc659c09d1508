"""Bootstrap intervals, stratified sampling, coverage diagnostics.

Replicates resample publications with replacement within each research-area
stratum and rerun the whole statistic computation; intervals are empirical
2.5/97.5 percentiles under the mid-rank convention. Replicate k draws from
a generator seeded by (seed, k), so output does not depend on worker count
or scheduling.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Corpus, PublicationRecord

StatKey = tuple[str, str, str, str]  # (area, metric, level, view)

MISSING_WARN_FRACTION = 0.10


class ResamplingError(Exception):
    pass


@dataclass(frozen=True)
class BootstrapResult:
    area_id: str
    metric_label: str
    level: str
    view: str
    point: float
    lower: float
    upper: float
    n_replicates: int
    seed: int
    n_missing: int = 0
    warn_missing: bool = False

    def key(self) -> StatKey:
        return (self.area_id, self.metric_label, self.level, self.view)


@dataclass(frozen=True)
class CoverageDiagnostic:
    institution_id: str
    sample_count: int
    population_count: int | None
    coverage_ratio: float | None  # None when the population size is unknown


def midrank_quantile(values: list[float], q: float) -> float:
    """Empirical quantile inverting the mid-rank percentile 100*(r-0.5)/n.

    Position r = q*n + 0.5 (1-based), linearly interpolated and clipped to
    the observed range.
    """
    if not values:
        raise ResamplingError("quantile of empty sample")
    data = sorted(values)
    n = len(data)
    pos = q * n + 0.5
    if pos <= 1.0:
        return data[0]
    if pos >= n:
        return data[-1]
    i = int(pos)
    frac = pos - i
    return data[i - 1] + frac * (data[i] - data[i - 1])


def resample_within_areas(corpus: Corpus, rng: np.random.Generator) -> Corpus:
    """One bootstrap replicate: per-area sampling with replacement.

    Preserves each area's publication count; duplicated records get
    suffix-disambiguated pub_ids so downstream uniqueness holds.
    """
    by_area: dict[str, list[PublicationRecord]] = {}
    for rec in sorted(corpus.records, key=lambda r: r.pub_id):
        by_area.setdefault(rec.area_id, []).append(rec)
    out: list[PublicationRecord] = []
    for area in sorted(by_area):
        pool = by_area[area]
        idx = rng.integers(0, len(pool), size=len(pool))
        for copy_no, i in enumerate(idx):
            rec = pool[int(i)]
            out.append(replace(rec, pub_id=f"{rec.pub_id}~{copy_no}"))
    return replace(corpus, records=tuple(out))


def _replicate_values(args) -> tuple[int, dict[StatKey, float]]:
    corpus, statistic_fn, seed, k = args
    rng = np.random.default_rng([seed, k])
    return k, statistic_fn(resample_within_areas(corpus, rng))


def bootstrap_statistics(
    corpus: Corpus,
    statistic_fn,
    point_values: dict[StatKey, float],
    n_replicates: int,
    seed: int,
    n_workers: int = 1,
) -> list[BootstrapResult]:
    """Percentile intervals for every statistic in point_values.

    statistic_fn maps a Corpus to {key: value}; keys absent from a
    replicate (degenerate fits, vanished institutions) count as missing for
    that replicate. Statistics missing in more than 10% of replicates are
    flagged with a warning.
    """
    if n_replicates < 1:
        raise ResamplingError("n_replicates must be >= 1")
    tasks = [(corpus, statistic_fn, seed, k) for k in range(n_replicates)]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            raw = list(pool.map(_replicate_values, tasks, chunksize=max(1, n_replicates // (4 * n_workers))))
    else:
        raw = [_replicate_values(t) for t in tasks]
    raw.sort(key=lambda kv: kv[0])

    collected: dict[StatKey, list[float]] = {key: [] for key in point_values}
    for _, values in raw:
        for key in collected:
            if key in values:
                collected[key].append(values[key])

    results: list[BootstrapResult] = []
    for key in sorted(point_values):
        reps = collected[key]
        n_missing = n_replicates - len(reps)
        if not reps:
            continue
        results.append(
            BootstrapResult(
                area_id=key[0],
                metric_label=key[1],
                level=key[2],
                view=key[3],
                point=point_values[key],
                lower=midrank_quantile(reps, 0.025),
                upper=midrank_quantile(reps, 0.975),
                n_replicates=n_replicates,
                seed=seed,
                n_missing=n_missing,
                warn_missing=n_missing > MISSING_WARN_FRACTION * n_replicates,
            )
        )
    return results


def _area_stream(seed: int, area_id: str) -> np.random.Generator:
    digest = hashlib.sha256(f"stratum:{area_id}".encode("utf-8")).digest()
    return np.random.default_rng([seed, int.from_bytes(digest[:4], "big")])


def stratified_sample(corpus: Corpus, fraction: float, seed: int) -> tuple[Corpus, list[str]]:
    """Draw round(fraction * n) publications per area, without replacement.

    Seeded per area by (seed, hash(area)), so the draw is independent of
    record order. Returns the sample and any skipped (empty) strata.
    """
    if not (0.0 < fraction <= 1.0):
        raise ResamplingError(f"fraction {fraction} outside (0,1]")
    by_area: dict[str, list[PublicationRecord]] = {}
    for rec in sorted(corpus.records, key=lambda r: r.pub_id):
        by_area.setdefault(rec.area_id, []).append(rec)
    skipped: list[str] = []
    chosen: list[PublicationRecord] = []
    for area in sorted(by_area):
        pool = by_area[area]
        k = int(fraction * len(pool) + 0.5)
        if k == 0:
            skipped.append(area)
            continue
        rng = _area_stream(seed, area)
        idx = rng.choice(len(pool), size=k, replace=False)
        chosen.extend(pool[int(i)] for i in sorted(idx))
    return replace(corpus, records=tuple(chosen)), skipped


def coverage_report(sample: Corpus, population_counts: dict[str, int]) -> list[CoverageDiagnostic]:
    """Sample-to-population coverage per institution (post-stratification check)."""
    counts: dict[str, int] = {}
    for rec in sample.records:
        counts[rec.institution_id] = counts.get(rec.institution_id, 0) + 1
    out = []
    for inst in sorted(counts):
        pop = population_counts.get(inst)
        out.append(
            CoverageDiagnostic(
                institution_id=inst,
                sample_count=counts[inst],
                population_count=pop,
                coverage_ratio=(counts[inst] / pop) if pop else None,
            )
        )
    return out
