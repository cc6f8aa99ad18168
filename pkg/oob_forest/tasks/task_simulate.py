"""
Task: Simulate
Runs the Monte Carlo coverage study over one or more training sizes and
writes the report as CSV and aligned text (optionally PDF).
"""
from pathlib import Path

from oob_forest.models import CoverageReport, RunConfig, SimConfig
from oob_forest.montecarlo import report_to_csv, report_to_text, run_sweep, shrink_rates
from oob_forest.utils.logger import logger
from oob_forest.utils.pdf_report import generate_coverage_pdf
from oob_forest.utils.storage import ensure_dir, save_text


def sim_config(config: RunConfig) -> SimConfig:
    return SimConfig(
        process=config.process,
        n=config.sizes[0],
        n_test=config.n_test,
        n_trees=config.n_trees,
        n_boot=config.n_boot,
        n_replications=config.n_replications,
        levels=config.levels,
        seed=config.seed,
        mtry=config.mtry,
        min_node_size=config.min_node_size,
    )


def cmd_simulate(config: RunConfig) -> CoverageReport:
    """
    Run the study and write coverage_<process>.csv / .txt under out_dir

    Returns:
        The CoverageReport
    """
    sim = sim_config(config)
    report = run_sweep(sim, config.sizes, threads=config.threads)
    text = report_to_text(report)
    print(text)

    if config.out_dir:
        out_dir = ensure_dir(config.out_dir)
        stem = f"coverage_{sim.process}"
        header = [sim.header(config.sizes)]
        csv_path = report_to_csv(report, str(out_dir / f"{stem}.csv"), config.sizes)
        save_text("\n".join(f"# {h}" for h in header) + "\n" + text, out_dir / f"{stem}.txt")
        logger.info(f"[simulate] Report written to {csv_path}")
        if config.pdf:
            notes = [f"width shrink exponent at level {lv:g}: {rate:.3f}" for lv, rate in shrink_rates(report)]
            pdf_path = generate_coverage_pdf(report, str(Path(out_dir) / f"{stem}.pdf"), notes)
            logger.info(f"[simulate] PDF written to {pdf_path}")
    return report
