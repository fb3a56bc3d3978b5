"""Entry point for the bregman-stationarity tool"""

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Annotated, Any, Callable, Optional

import numpy as np
from cyclopts import App, Parameter
from loguru import logger

from bregman_stationarity import __version__, APP_NAME, DATA_DIR, PYTHON_VERSION, PYTHON_EXE, PACKAGES
from bregman_stationarity.config import ExperimentConfig, OutputFormat, load_config
from bregman_stationarity.driver import RunMode, Trajectory, run
from bregman_stationarity.errors import BregmanError, NumericalError, SolverError
from bregman_stationarity.hardness import TrapKind, figure_frame, run_trap
from bregman_stationarity.problem import check_assumptions
from bregman_stationarity.stationarity import Classification, detect, find_spurious_candidates

from .utils.logging_config import setup_logger

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_NUMERICAL_ERROR = 2

app = App(name="bregman-stationarity", version=__version__)

ConfigPath = Annotated[Path, Parameter(name="--config", help="Experiment config file (YAML or JSON)")]
OutPath = Annotated[Optional[Path], Parameter(name="--out", help="Output file, overrides the config's output")]
Format = Annotated[Optional[OutputFormat], Parameter(name="--format", help="csv or json")]
Seed = Annotated[Optional[int], Parameter(name="--seed", help="Seed for randomized sampling")]

PLOT_SCRIPT = """\
import matplotlib.pyplot as plt
import pandas as pd

frame = pd.read_csv({csv!r})
for column in ("x1_entropy", "x1_poly"):
    if column in frame:
        plt.semilogy(frame["k"], frame[column], label=column)
plt.axhline({eps!r}, color="grey", linestyle="--", label="eps")
plt.xlabel("k")
plt.ylabel("x1")
plt.legend()
plt.show()
"""


def _setup(command: str, config_path: Path, seed: Optional[int]) -> ExperimentConfig:
    setup_logger(APP_NAME, __version__, log_file=DATA_DIR / "logs" / f"{APP_NAME}.log")
    config = load_config(config_path)
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    logger.debug(
        f"Starting {APP_NAME} {command}",
        python_version=PYTHON_VERSION,
        python_executable=PYTHON_EXE,
        package_versions=PACKAGES,
        **config.model_dump(mode="json"),
    )
    return config


def _guarded(command: str, body: Callable[[], int]) -> int:
    """Run a command body and map errors to exit codes"""
    with logger.contextualize(command=command):
        try:
            return body()
        except NumericalError as e:
            logger.error("{} failed: {}", command, e, error=type(e).__name__)
            return EXIT_NUMERICAL_ERROR
        except BregmanError as e:
            logger.error("{} failed: {}", command, e, error=type(e).__name__)
            return EXIT_USER_ERROR


def _to_jsonable(obj: Any) -> Any:
    if isinstance(obj, (np.ndarray, np.generic)):
        return obj.tolist()
    return str(obj)


def _write_json(data: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=_to_jsonable) + "\n")
    return path


def _output_path(out: Optional[Path], config: ExperimentConfig, stem: str, fmt: OutputFormat) -> Path:
    if out is not None:
        return out
    if config.output is not None:
        return config.output
    return DATA_DIR / "results" / f"{stem}.{fmt}"


def write_trajectory(trajectory: Trajectory, path: Path, fmt: OutputFormat) -> Path:
    if fmt is OutputFormat.JSON:
        frame = trajectory.to_frame()
        return _write_json({"summary": trajectory.summary(), "rows": frame.to_dict(orient="records")}, path)
    return trajectory.to_csv(path)


@app.command(name="run")
def cmd_run(
    *,
    config: ConfigPath,
    out: OutPath = None,
    format: Format = None,
    force: bool = False,
    log_domain: bool = False,
    seed: Seed = None,
) -> int:
    """Run the method on one instance and write the trajectory"""

    def body() -> int:
        cfg = _setup("run", config, seed)
        fmt = format or cfg.format
        problem = cfg.problem.build()
        report = check_assumptions(problem, seed=cfg.seed)
        if not report.passed:
            details = "; ".join(f"{name}: {report.clauses[name].detail}" for name in report.failed)
            if not force:
                logger.error(f"{problem.name} fails assumption checks ({details}); pass --force to run anyway")
                return EXIT_USER_ERROR
            logger.warning("Running despite failed assumption checks", failed=report.failed)

        run_cfg = cfg.run.run_config(cfg.problem.t)
        if log_domain:
            run_cfg = dataclasses.replace(run_cfg, mode=RunMode.LOG_DOMAIN)
        path = _output_path(out, cfg, problem.name, fmt)
        with logger.contextualize(instance=problem.name):
            try:
                trajectory = run(problem, cfg.run.start(), run_cfg)
            except SolverError as e:
                if e.trajectory is not None and len(e.trajectory):
                    write_trajectory(e.trajectory, path, fmt)
                    logger.info("Partial trajectory written", path=str(path))
                raise
            write_trajectory(trajectory, path, fmt)
            logger.info("Trajectory written", path=str(path), **trajectory.summary())
        return EXIT_OK

    return _guarded("run", body)


@app.command(name="trap")
def cmd_trap(
    *,
    config: ConfigPath,
    out: OutPath = None,
    format: Format = None,
    log_domain: bool = False,
    seed: Seed = None,
) -> int:
    """Run the trap constructions and write the k, x1_entropy, x1_poly table"""

    def body() -> int:
        cfg = _setup("trap", config, seed)
        fmt = format or cfg.format
        settings = cfg.trap
        if log_domain:
            settings = settings.model_copy(update={"mode": RunMode.LOG_DOMAIN})
        trap_configs = settings.trap_configs()

        with ThreadPoolExecutor(max_workers=max(1, len(trap_configs))) as pool:
            outcomes = dict(zip(trap_configs, pool.map(run_trap, trap_configs.values())))

        entropy = outcomes.get(TrapKind.ENTROPY)
        poly = outcomes.get(TrapKind.POLY)
        frame = figure_frame(
            None if entropy is None else entropy.trajectory,
            None if poly is None else poly.trajectory,
        )
        verdicts = {str(kind): outcome.to_dict() for kind, outcome in outcomes.items()}

        path = _output_path(out, cfg, "trap", fmt)
        if fmt is OutputFormat.JSON:
            _write_json({"verdicts": verdicts, "rows": frame.to_dict(orient="list")}, path)
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        logger.info("Trap table written", path=str(path), rows=len(frame))

        if settings.plot_script is not None:
            settings.plot_script.parent.mkdir(parents=True, exist_ok=True)
            settings.plot_script.write_text(PLOT_SCRIPT.format(csv=str(path), eps=settings.eps))
            logger.info("Plot script written", path=str(settings.plot_script))

        print(json.dumps(verdicts, indent=2))
        return EXIT_OK

    return _guarded("trap", body)


@app.command(name="scan")
def cmd_scan(
    *,
    config: ConfigPath,
    out: OutPath = None,
    seed: Seed = None,
) -> int:
    """List spurious stationary points: vertex maximizers of a convex f and any configured points"""

    def body() -> int:
        cfg = _setup("scan", config, seed)
        problem = cfg.problem.build()
        scan = cfg.scan
        convex = problem.f.convex if scan.assume_convex is None else scan.assume_convex

        reports = []
        if convex:
            reports.extend(report for _, report in find_spurious_candidates(problem, convex, cfg.problem.t, scan.tol))
        elif not scan.points:
            logger.error(
                f"{problem.name} has a nonconvex objective, so vertex maximizers need not be spurious; "
                "list candidate points under scan.points to run detect on them"
            )
            return EXIT_USER_ERROR
        reports.extend(detect(problem, np.array(p, dtype=float), cfg.problem.t, scan.tol) for p in scan.points)

        spurious = [r.to_dict() for r in reports if r.classification is Classification.SPURIOUS]
        logger.info("Scan finished", instance=problem.name, checked=len(reports), spurious=len(spurious))
        if out is not None:
            _write_json(spurious, out)
        print(json.dumps(spurious, indent=2, default=_to_jsonable))
        return EXIT_OK

    return _guarded("scan", body)


@app.command(name="check")
def cmd_check(
    *,
    config: ConfigPath,
    out: OutPath = None,
    seed: Seed = None,
) -> int:
    """Check the standing assumptions of an instance; exit 0 iff every clause passes"""

    def body() -> int:
        cfg = _setup("check", config, seed)
        problem = cfg.problem.build()
        report = check_assumptions(problem, seed=cfg.seed)
        if out is not None:
            _write_json(report.to_dict(), out)
        print(json.dumps(report.to_dict(), indent=2))
        if not report.passed:
            logger.error(f"{problem.name} fails assumption checks", failed=report.failed)
            return EXIT_USER_ERROR
        logger.info(f"{problem.name} passes all assumption checks")
        return EXIT_OK

    return _guarded("check", body)


if __name__ == "__main__":
    app()
