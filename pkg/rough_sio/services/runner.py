"""
Full verification run: every check family on a thread pool, assembled into
one report ordered by check id.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Optional

from tqdm import tqdm

from rough_sio.config.settings import thread_cap
from rough_sio.config.suite_config import SuiteConfig
from rough_sio.models.report import CheckRecord, Report
from rough_sio.services.checks import cover_tasks, maximal_tasks, operator_tasks, weight_tasks
from rough_sio.services.probes import probe_tasks
from rough_sio.services.verification import Task, identity_tasks, run_task

logger = logging.getLogger(__name__)


def all_tasks(cfg: SuiteConfig) -> List[Task]:
    """Identity suite, covers, weights, maximal operators, the operator matrix and the probes."""
    tasks = (identity_tasks(cfg) + cover_tasks(cfg) + weight_tasks(cfg) + maximal_tasks(cfg)
             + operator_tasks(cfg) + probe_tasks(cfg))
    names = [name for name, _ in tasks]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise ValueError(f"duplicate task names: {duplicates}")
    return tasks


def run_tasks(tasks: List[Task], workers: Optional[int] = None, progress: bool = False) -> List[CheckRecord]:
    """Run tasks concurrently; the result order follows the task list, not completion."""
    workers = workers or thread_cap()
    results: Dict[str, List[CheckRecord]] = {}
    logger.info("Running %d check tasks on %d workers", len(tasks), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(run_task, name, task): name for name, task in tasks}
        for future in tqdm(as_completed(futures), total=len(futures), desc="checks", disable=not progress):
            results[futures[future]] = future.result()
    return [record for name, _ in tasks for record in results[name]]


def run_all(cfg: SuiteConfig, out: Optional[str] = None, csv_dir: Optional[str] = None,
            progress: bool = False) -> Report:
    """Execute every check and write the JSON report and CSV bundle when paths are given.

    Probe records gate the verdict only when ``cfg.strict`` is set. The JSON
    report is sorted by check id and carries no timestamps, so identical
    configurations produce identical files.
    """
    report = Report(title="rough-sio verification", strict=cfg.strict)
    report.extend(run_tasks(all_tasks(cfg), progress=progress))
    logger.info("Verification finished: %d checks, %d gating failures", len(report.records), len(report.failures))
    if out:
        report.write_json(out)
        logger.info("Wrote report to %s", out)
    if csv_dir:
        written = report.write_csv_bundle(csv_dir)
        logger.info("Wrote %d CSV files to %s", len(written), csv_dir)
    return report
