"""
Monte Carlo coverage study

Each replication simulates a training sample, grows a forest on it, builds
OOB intervals at every nominal level from one shared replicate vector, and
checks them against the forest's error on a large fresh test sample. The
report aggregates coverage and average width per level (and per n).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from oob_forest.datagen import gen_friedman, gen_spheres
from oob_forest.errors import InvalidArgumentError
from oob_forest.forest.ensemble import loss, predict_forest_batch, train_forest
from oob_forest.forest.rng import REPLICATION_STREAM, derive_seeds
from oob_forest.models import CoverageReport, CoverageRow, LevelOutcome, ReplicationRecord, SimConfig
from oob_forest.oobci import (
    bootstrap_replicates,
    build_augmented,
    ci_from_replicates,
    oob_estimate,
    per_observation_errors,
)
from oob_forest.utils.logger import logger
from oob_forest.utils.storage import save_csv


def _generator(process: str):
    return gen_friedman if process == "friedman" else gen_spheres


def replication_seeds(config: SimConfig, replication_id: int) -> Tuple[int, int, int, int]:
    """(train data, forest, bootstrap, test data) seeds of one replication"""
    train_seed, forest_seed, boot_seed, test_seed = derive_seeds(
        config.seed, REPLICATION_STREAM, config.n, replication_id, count=4
    )
    return train_seed, forest_seed, boot_seed, test_seed


def run_replication(config: SimConfig, replication_id: int) -> ReplicationRecord:
    """
    One pass of the study: simulate, train, bound, test

    Seeds depend only on (config.seed, config.n, replication_id), so the
    record is the same whichever worker runs it and in whatever order.
    """
    train_seed, forest_seed, boot_seed, test_seed = replication_seeds(config, replication_id)
    generate = _generator(config.process)

    train = generate(config.n, train_seed)
    forest = train_forest(train, config.n_trees, config.tree_params(), forest_seed)
    errors = per_observation_errors(build_augmented(forest, train), train)
    point = oob_estimate(errors)
    replicates = bootstrap_replicates(errors, config.n_boot, boot_seed)

    test = generate(config.n_test, test_seed)
    predictions = predict_forest_batch(forest, test.features)
    true_gamma = float(loss(test.response, predictions, test.task).mean())

    outcomes = []
    for level in config.levels:
        ci = ci_from_replicates(replicates, level, point, boot_seed, errors.task)
        outcomes.append(LevelOutcome(
            level=level,
            lower=ci.lower,
            upper=ci.upper,
            width=ci.width,
            covered=bool(ci.lower <= true_gamma <= ci.upper),
        ))

    logger.debug(
        f"Replication {replication_id} (n={config.n}): true={true_gamma:.6g} oob={point:.6g}"
    )
    return ReplicationRecord(
        replication_id=replication_id,
        n=config.n,
        true_gamma=true_gamma,
        oob_estimate=point,
        outcomes=outcomes,
    )


def coverage_report(
    records: Sequence[ReplicationRecord],
    config: Optional[SimConfig] = None,
    process: Optional[str] = None,
) -> CoverageReport:
    """
    Fraction of replications covering the true error, and the mean interval width, per level

    Records may mix training sizes; rows are produced per (n, level).
    """
    if not records:
        raise InvalidArgumentError("coverage report needs at least one replication record")
    levels = records[0].levels
    if any(r.levels != levels for r in records):
        raise InvalidArgumentError("all replication records must share one level grid")
    process = process or (config.process if config else "friedman")

    rows: List[CoverageRow] = []
    counts = []
    for n in sorted({r.n for r in records}):
        group = [r for r in records if r.n == n]
        counts.append(len(group))
        covered = np.array([[o.covered for o in r.outcomes] for r in group], dtype=np.float64)
        widths = np.array([[o.width for o in r.outcomes] for r in group], dtype=np.float64)
        for k, level in enumerate(levels):
            rows.append(CoverageRow(
                process=process,
                n=n,
                level=level,
                coverage=float(covered[:, k].mean()),
                avg_width=float(widths[:, k].mean()),
            ))
    return CoverageReport(rows=rows, config=config, n_replications=min(counts))


def _run_all(config: SimConfig, threads: int) -> List[ReplicationRecord]:
    ids = range(config.n_replications)
    logger.info(
        f"Monte Carlo study: {config.process} n={config.n} N={config.n_replications} "
        f"B={config.n_trees} M={config.n_boot} n_test={config.n_test} threads={threads}"
    )

    def job(replication_id: int) -> ReplicationRecord:
        record = run_replication(config, replication_id)
        done = replication_id + 1
        if done % max(1, config.n_replications // 10) == 0:
            logger.info(f"  replication {done}/{config.n_replications} finished")
        return record

    if threads == 1:
        return [job(i) for i in ids]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(job, ids))


def run_study(config: SimConfig, threads: int = 1) -> CoverageReport:
    """All N replications at config.n, aggregated into a report"""
    if threads < 1:
        raise InvalidArgumentError(f"threads must be positive, got {threads}")
    return coverage_report(_run_all(config, threads), config)


def run_sweep(config: SimConfig, sizes: Iterable[int], threads: int = 1) -> CoverageReport:
    """The study repeated at every training size in `sizes`, in one report"""
    records: List[ReplicationRecord] = []
    for n in sizes:
        records.extend(_run_all(config.model_copy(update={"n": int(n)}), threads))
    return coverage_report(records, config)


def estimate_shrink_rate(width_by_n: Sequence[Tuple[float, float]]) -> float:
    """
    Exponent c in width ~ n^(-c): the negated least-squares slope of log(width) on log(n)
    """
    pairs = [(float(n), float(w)) for n, w in width_by_n]
    if any(w <= 0 for _, w in pairs):
        raise InvalidArgumentError("widths must be positive to fit a shrink rate")
    if any(n <= 0 for n, _ in pairs):
        raise InvalidArgumentError("sample sizes must be positive")
    if len({n for n, _ in pairs}) < 2:
        raise InvalidArgumentError("need at least two distinct sample sizes")
    log_n = np.log([n for n, _ in pairs])
    log_w = np.log([w for _, w in pairs])
    slope = np.polyfit(log_n, log_w, 1)[0]
    return float(-slope)


def shrink_rates(report: CoverageReport, levels: Optional[Sequence[float]] = None) -> List[Tuple[float, float]]:
    """(level, fitted exponent) for each requested level of a multi-n report"""
    levels = levels or sorted({row.level for row in report.rows})
    rates = []
    for level in levels:
        widths = report.widths_at(level)
        if len(widths) >= 2:
            rates.append((level, estimate_shrink_rate(sorted(widths.items()))))
    return rates


def report_frame(report: CoverageReport) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.process, r.n, r.level, r.coverage, r.avg_width) for r in report.rows],
        columns=["process", "n", "level", "coverage", "avg_width"],
    )


def report_to_csv(report: CoverageReport, path: str, sizes: Optional[Sequence[int]] = None) -> str:
    """CSV with the study configuration echoed as a leading comment line"""
    header = [report.config.header(list(sizes) if sizes else None)] if report.config else None
    return save_csv(report_frame(report), path, header_lines=header)


def report_to_text(report: CoverageReport) -> str:
    """Aligned coverage table, one block of columns per training size"""
    sizes = sorted({r.n for r in report.rows})
    levels = sorted({r.level for r in report.rows})
    by_key = {(r.n, r.level): r for r in report.rows}
    process = report.rows[0].process

    header = f"{'nominal':>8}" + "".join(f" | {'coverage':>9} {'avg len':>10}" for _ in sizes)
    title = f"{'':>8}" + "".join(f" | {f'{process} n = {n}':^20}" for n in sizes)
    lines = [title, header, "-" * len(header)]
    for level in levels:
        cells = []
        for n in sizes:
            row = by_key.get((n, level))
            cells.append(f" | {row.coverage:>9.3f} {row.avg_width:>10.5f}" if row else f" | {'':>20}")
        lines.append(f"{level:>8.2f}" + "".join(cells))
    if len(sizes) >= 2:
        lines.append("")
        for level, rate in shrink_rates(report):
            if math.isclose(level, 0.95) or math.isclose(level, levels[-1]):
                lines.append(f"width shrink exponent at level {level:g}: {rate:.3f}")
    return "\n".join(lines)
