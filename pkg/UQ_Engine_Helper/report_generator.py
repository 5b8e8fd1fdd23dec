"""
Report generation logic for UQ Engine Helper package.
Builds header-first tables for experiments and benchmark runs, and exports
worker timelines.
"""

import logging
from pathlib import Path
from typing import Any, List, Sequence, Union

import pandas as pd

from .bench import EfficiencyReport
from .engine import Experiment
from .exceptions import ReportIoError

logger = logging.getLogger(__name__)

TIMELINE_COLUMNS = ["worker_id", "busy_start", "busy_end", "experiment_id"]

PLOT_SCRIPT = '''"""Plot the worker timeline written next to this script."""
import sys

import matplotlib.pyplot as plt
import pandas as pd

source = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
timeline = pd.read_csv(source)
figure, axis = plt.subplots(figsize=(10, 0.3 * max(timeline["worker_id"].nunique(), 4)))
for experiment, rows in timeline.groupby("experiment_id"):
    axis.hlines(rows["worker_id"], rows["busy_start"], rows["busy_end"], linewidth=4, label=str(experiment))
axis.set_xlabel("Time [s]")
axis.set_ylabel("Worker")
axis.legend(loc="upper right", fontsize="small")
figure.tight_layout()
figure.savefig(source.rsplit(".", 1)[0] + ".png", dpi=150)
'''


class ReportGenerator:
    """Generates tables from experiments and bench reports."""

    @staticmethod
    def generate_experiment_overview(experiments: Sequence[Experiment]) -> List[List[Any]]:
        """One row per experiment: status, progress and best value."""
        report = [["Experiment", "Solver", "Status", "Generations", "Evaluations", "Best Value", "Outcome"]]
        for experiment in experiments:
            value, _ = experiment.solver.best()
            outcome = experiment.error or experiment.termination_reason or ""
            report.append([
                experiment.name,
                experiment.solver.TYPE,
                experiment.status.value,
                experiment.generation,
                experiment.evaluations,
                "" if value is None else f"{value:.6g}",
                outcome,
            ])
        return report

    @staticmethod
    def generate_generation_summary(summary_csv: Union[str, Path], last: int = 0) -> List[List[Any]]:
        """
        Per-generation rows from an experiment's summary file.

        Args:
            summary_csv: Path of ``summary.csv``
            last: Keep only the last rows; 0 keeps all
        """
        try:
            summary = pd.read_csv(summary_csv)
        except (OSError, pd.errors.EmptyDataError) as e:
            raise ReportIoError(f"Cannot read summary {summary_csv}: {e}")
        if last:
            summary = summary.tail(last)
        return [list(summary.columns)] + summary.values.tolist()

    @staticmethod
    def generate_efficiency_report(reports: Sequence[EfficiencyReport]) -> List[List[Any]]:
        report = [["Scheduling", "Workers", "Clock", "Evaluations", "Makespan [s]", "Ideal [s]",
                   "Busy [s]", "Idle [s]", "e_ideal", "e_busy"]]
        for r in reports:
            report.append([
                r.scheduling, r.workers, r.clock, r.evaluations,
                round(r.makespan, 4), round(r.ideal_time, 4), round(r.busy_time, 4), round(r.idle_time, 4),
                f"{r.e_ideal:.1%}", f"{r.e_busy:.1%}",
            ])
        return report

    @staticmethod
    def generate_sweep_report(sweep: pd.DataFrame) -> List[List[Any]]:
        report = [["Workers", "Repetitions", "Median e", "Min e", "Max e", "Median e_busy"]]
        for row in sweep.itertuples(index=False):
            report.append([
                int(row[0]), int(row[1]),
                f"{row[2]:.1%}", f"{row[3]:.1%}", f"{row[4]:.1%}", f"{row[5]:.1%}",
            ])
        return report


def timeline_frame(report: EfficiencyReport) -> pd.DataFrame:
    frame = pd.DataFrame(report.intervals, columns=TIMELINE_COLUMNS)
    return frame.sort_values(["worker_id", "busy_start"], kind="stable").reset_index(drop=True)


def timeline_export(report: EfficiencyReport, path: Union[str, Path]) -> Path:
    """
    Write the busy intervals as CSV plus a plotting script next to it.

    Returns:
        Path of the CSV file

    Raises:
        ReportIoError: The files cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        timeline_frame(report).to_csv(path, index=False)
        script = path.with_name(path.stem + "_plot.py")
        script.write_text(PLOT_SCRIPT.format(csv_name=path.name), encoding="utf-8")
    except OSError as e:
        raise ReportIoError(f"Cannot write timeline {path}: {e}")
    logger.info(f"Timeline with {len(report.intervals)} interval(s) written to {path}")
    return path
