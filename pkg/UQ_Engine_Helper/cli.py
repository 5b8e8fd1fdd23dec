"""
Command-line entry point: run, resume, bench and validate.

Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 a resumed
run diverged from the straight run (``run --self-check``).
"""

import argparse
import logging
import sys
import tempfile
from pathlib import Path
from typing import List, Optional

import pandas as pd

from utils.config import RESULTS_ROOT

from .bench import Clock, Scheduling, WaitModel, bench_run, weak_scaling_sweep
from .conduit import teams_for_processes
from .engine import Engine, Experiment, engine_run, fresh_seed, run_in_stints
from .exceptions import (
    CheckpointError,
    ConduitError,
    ProblemError,
    ReportIoError,
    SolverError,
    ValidationError,
)
from .excel_exporter import ExcelExporter
from .experiment_loader import ExperimentLoader
from .report_generator import ReportGenerator, timeline_export
from .results_browser import ResultsBrowser
from .text_report import TextReportGenerator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_DIVERGENCE = 3

MODES = {"thread": "thread", "process": "process", "sim": "simulated"}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uq-engine", description="Sampling and optimization experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one or more experiment files concurrently")
    run.add_argument("files", nargs="+", type=Path)
    run.add_argument("--workers", type=_positive_int, default=1)
    run.add_argument("--team-size", type=_positive_int, default=1)
    run.add_argument("--processes", type=_positive_int,
                     help="Total ranks; one is kept for the engine, the rest form worker teams")
    run.add_argument("--mode", choices=sorted(MODES), default="thread")
    run.add_argument("--out", type=Path, help=f"Results root (default: File Output/Path or {RESULTS_ROOT})")
    run.add_argument("--seed", type=int)
    run.add_argument("--self-check", action="store_true",
                     help="Compare a straight run with one resumed after every generation")

    resume = commands.add_parser("resume", help="Continue an experiment from a checkpoint")
    resume.add_argument("checkpoint", type=Path,
                        help="State file, 'latest' pointer, experiment directory or experiment name under --root")
    resume.add_argument("--root", type=Path, help=f"Results root for experiment names (default: {RESULTS_ROOT})")
    resume.add_argument("--max-generations", help="Absolute generation count, or +N for N more")
    resume.add_argument("--workers", type=_positive_int, default=1)
    resume.add_argument("--team-size", type=_positive_int, default=1)
    resume.add_argument("--processes", type=_positive_int,
                        help="Total ranks; one is kept for the engine, the rest form worker teams")
    resume.add_argument("--mode", choices=sorted(MODES), default="thread")

    bench = commands.add_parser("bench", help="Synthetic wait benchmark")
    bench.add_argument("--workers", type=_positive_int, default=8)
    bench.add_argument("--generations", type=_positive_int, default=5)
    bench.add_argument("--population-factor", type=_positive_int, default=4)
    wait = bench.add_mutually_exclusive_group()
    wait.add_argument("--wait-fixed", type=float, metavar="S")
    wait.add_argument("--wait-uniform", type=float, nargs=2, metavar=("LO", "HI"))
    bench.add_argument("--scheduling", nargs="+", default=["single"], metavar="single|multiple K")
    bench.add_argument("--clock", choices=[c.value for c in Clock], default=Clock.SIMULATED.value)
    bench.add_argument("--reps", type=_positive_int, default=1)
    bench.add_argument("--sweep", type=_positive_int, nargs="+", metavar="N",
                       help="Worker counts of a weak-scaling sweep")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", type=Path, default=Path(RESULTS_ROOT))

    validate = commands.add_parser("validate", help="Check experiment files")
    validate.add_argument("files", nargs="+", type=Path)
    return parser


def parse_scheduling(values: List[str]) -> Scheduling:
    kind = values[0].lower()
    if kind == "single" and len(values) == 1:
        return Scheduling.single()
    if kind == "multiple" and len(values) == 2 and values[1].isdigit():
        return Scheduling.multiple(int(values[1]))
    raise ValidationError(f"--scheduling expects 'single' or 'multiple K', got {' '.join(values)}", ["--scheduling"])


def worker_count(args: argparse.Namespace) -> int:
    """Worker teams from --processes when given, else --workers."""
    if args.processes is None:
        return args.workers
    try:
        return teams_for_processes(args.processes, args.team_size)
    except ValueError as e:
        raise ValidationError(str(e), ["--processes"])


def cmd_validate(args: argparse.Namespace) -> int:
    loader = ExperimentLoader()
    for path in args.files:
        loader.load_settings(path)
        print(f"{path}: valid")
    return EXIT_OK


def _report(experiments: List[Experiment]) -> None:
    print(TextReportGenerator.create_text_report(
        "Experiments", {"Overview": ReportGenerator.generate_experiment_overview(experiments)}
    ))


def cmd_run(args: argparse.Namespace) -> int:
    loader = ExperimentLoader()
    if args.self_check:
        return self_check(args, loader)
    experiments = loader.load_many(args.files, args.seed, args.out)
    engine_run(experiments, workers=worker_count(args), team_size=args.team_size, mode=MODES[args.mode])
    _report(experiments)
    return EXIT_RUNTIME if any(e.error for e in experiments) else EXIT_OK


def self_check(args: argparse.Namespace, loader: ExperimentLoader) -> int:
    """Straight vs. resumed-after-every-generation, compared file by file."""
    diverged = False
    engine = Engine(workers=worker_count(args), team_size=args.team_size, mode=MODES[args.mode])
    for path in args.files:
        settings = loader.load_settings(path, args.seed)
        if settings.get("Random Seed") is None:
            settings["Random Seed"] = fresh_seed()
        with tempfile.TemporaryDirectory(prefix="uq-self-check-") as scratch:
            straight = Experiment(settings, name=path.stem, results_root=Path(scratch) / "straight")
            engine.run([straight])
            first = Experiment(settings, name=path.stem, results_root=Path(scratch) / "resumed")
            resumed = run_in_stints(first, engine)[-1]

            names = sorted(p.name for p in straight.directory.glob("gen*.state"))
            other = sorted(p.name for p in resumed.directory.glob("gen*.state"))
            mismatched = [n for n in names if n in other
                          and (straight.directory / n).read_bytes() != (resumed.directory / n).read_bytes()]
            if names != other or mismatched:
                diverged = True
                print(f"{path}: DIVERGED ({len(mismatched)} differing state file(s), "
                      f"{len(names)} vs {len(other)} generations)")
            else:
                print(f"{path}: identical over {len(names)} generation(s)")
    return EXIT_DIVERGENCE if diverged else EXIT_OK


def cmd_resume(args: argparse.Namespace) -> int:
    browser = ResultsBrowser(args.root)
    experiment = Experiment.from_checkpoint(browser.resolve_checkpoint(args.checkpoint))
    if args.max_generations:
        text = args.max_generations.strip()
        try:
            count = int(text.lstrip("+"))
        except ValueError:
            raise ValidationError(f"--max-generations expects N or +N, got {text}", ["--max-generations"])
        if text.startswith("+"):
            experiment.extend_generations(count)
        else:
            experiment.max_generations_override = count
    engine_run([experiment], workers=worker_count(args), team_size=args.team_size, mode=MODES[args.mode])
    _report([experiment])
    if experiment.summary_path.exists():
        print(TextReportGenerator.create_text_report(
            experiment.name, {"Last generations": ReportGenerator.generate_generation_summary(experiment.summary_path, last=5)}
        ))
    return EXIT_RUNTIME if experiment.error else EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    scheduling = parse_scheduling(args.scheduling)
    if args.wait_uniform:
        wait = WaitModel.uniform(args.wait_uniform[0], args.wait_uniform[1], args.clock)
    else:
        wait = WaitModel.fixed(args.wait_fixed if args.wait_fixed is not None else 0.1, args.clock)
    out: Path = args.out
    exporter = ExcelExporter()

    if args.sweep:
        sweep = weak_scaling_sweep(args.sweep, args.reps, args.generations, wait, scheduling,
                                   args.population_factor, out, args.seed)
        table = ReportGenerator.generate_sweep_report(sweep)
        out.mkdir(parents=True, exist_ok=True)
        sweep.to_csv(out / "sweep.csv", index=False)
        exporter.save_workbook(out / "sweep.xlsx", {"Weak Scaling": table}, highlight_column="Median e")
        print(TextReportGenerator.create_text_report("Weak scaling", {"Sweep": table}))
        return EXIT_OK

    reports = []
    for rep in range(args.reps):
        report = bench_run(args.workers, args.generations, wait, scheduling, args.population_factor,
                           out, args.seed + rep)
        timeline_export(report, out / f"rep{rep:02d}_timeline.csv")
        reports.append(report)
    table = ReportGenerator.generate_efficiency_report(reports)
    out.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([r.as_row() for r in reports]).to_csv(out / "efficiency.csv", index=False)
    exporter.save_workbook(out / "efficiency.xlsx", {"Efficiency": table}, highlight_column="e_ideal")
    print(TextReportGenerator.create_text_report("Benchmark", {"Efficiency": table}))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "resume": cmd_resume, "bench": cmd_bench, "validate": cmd_validate}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ProblemError, SolverError, ConduitError, CheckpointError, ReportIoError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
