#!/usr/bin/env python3
"""
esgb-flrw Command Line

Subcommands:
    simulate    integrate a run backward and forward, write the trajectory CSV
    verify      check a run (or a beta grid of runs) against its envelopes
    admissible  scan an (alpha, beta) grid for membership in the admissible set
    plot        chart one trajectory column, optionally with envelopes, as SVG
    figures     regenerate the bound and evolution charts into a directory

Each subcommand is a Tool with a parameter schema, input validation and a
uniform result dictionary; main() maps results onto the exit-code table:

    0  success
    1  verification failure, refused data or invalid input
    2  integration ended with constraint_drift
    3  integration ended with denominator_event
    4  integration ended with step_budget_exhausted
"""

import argparse
import json
import logging
import sys
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from envelopes import BETA_MAX, EnvelopeMode, EnvelopeSet
from errors import ConfigError, ESGBError, PreconditionError
from initial_data import FreeData, admissible_point, classify, make_initial_state
from integrator import Direction, IntegratorConfig, TerminalStatus, integrate, monitor
from plotting import COLUMN_LABELS, build_series, envelope_series, plot_column, render_svg
from settings import RunManifest, build_manifest, load_config_file, load_environment, parse_mode, parse_sign, resolve
from trajectory_io import stitch, write_region_csv, write_trajectory_csv
from verification import verify_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CODES = {
    TerminalStatus.REACHED_T_END: EXIT_OK,
    TerminalStatus.CONSTRAINT_DRIFT: 2,
    TerminalStatus.DENOMINATOR_EVENT: 3,
    TerminalStatus.STEP_BUDGET_EXHAUSTED: 4,
}
DEFAULT_TRAJECTORY_CSV = "trajectory.csv"
DEFAULT_REGION_CSV = "admissible.csv"


def status_exit_code(statuses: Iterable[TerminalStatus]) -> int:
    """Exit code of the first status that is not reached_t_end."""
    for status in statuses:
        if status is not TerminalStatus.REACHED_T_END:
            return EXIT_CODES[status]
    return EXIT_OK


def run_parallel(worker: Callable[[Any], Any], payloads: Sequence[Any], workers: int) -> List[Any]:
    """Map worker over payloads in order; workers <= 1 runs in-process."""
    if workers > 1 and len(payloads) > 1:
        with Pool(processes=workers) as pool:
            return list(pool.imap(worker, payloads))
    return [worker(payload) for payload in payloads]


def parse_range(text: str) -> Tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"range must look like a:b, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"range {text!r}: {exc}") from exc


def parse_beta_grid(text: str) -> List[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"beta grid must look like a:b:n, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"beta grid {text!r}: {exc}") from exc
    if count < 1:
        raise ConfigError(f"beta grid needs n >= 1, got {count}")
    return np.linspace(start, stop, count).tolist()


def parse_grid(text: str) -> Tuple[int, int]:
    """'N' for N points on both axes or 'NxM' for N alphas and M betas."""
    try:
        parts = [int(part) for part in str(text).lower().split("x")]
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from exc
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or min(parts) < 2:
        raise ConfigError(f"grid needs at least 2 points per axis, got {text!r}")
    return parts[0], parts[1]


def _write_report(summary: Dict[str, Any], path: Optional[Path]) -> None:
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, default=str)
    summary["report_path"] = str(path)
    logger.info(f"Wrote report to {path}")


# Operations

def cmd_simulate(manifest: RunManifest) -> Dict[str, Any]:
    """Integrate both halves of a run and write the stitched trajectory CSV."""
    data = manifest.data
    classification = classify(data)
    if not (classification.theorem21_ok or classification.theorem12_ok):
        for reason in classification.reasons:
            if not reason.endswith(": ok"):
                logger.warning(f"data outside the theorems' hypotheses: {reason}")

    state0 = make_initial_state(data)
    runs = {}
    report = None
    signs_beta = data.beta if 0.0 < data.beta < BETA_MAX else None
    for t_end in (manifest.t_min, manifest.t_max):
        if t_end == 0.0:
            continue
        traj = integrate(state0, t_end, manifest.cfg, branch=data.s)
        runs[traj.direction] = traj
        part = monitor(traj, signs_beta)
        report = part if report is None else report.merge(part)

    frame = stitch(runs.get(Direction.BACKWARD), runs.get(Direction.FORWARD))
    output = write_trajectory_csv(frame, manifest.outputs.get("output", Path(DEFAULT_TRAJECTORY_CSV)))
    return {
        "csv": str(output),
        "samples": len(frame),
        "kappa": classification.kappa,
        "gamma": classification.gamma,
        "phidot0": classification.phidot0,
        "theorem21_ok": classification.theorem21_ok,
        "theorem12_ok": classification.theorem12_ok,
        "reasons": classification.reasons,
        "runs": {
            direction.value: {
                "terminal_status": traj.terminal_status.value,
                "t_reached": float(traj.times[-1]),
                "samples": len(traj),
                "rejected": traj.n_rejected,
                "event_time": traj.event_time,
            }
            for direction, traj in runs.items()
        },
        "monitor": report.to_dict(),
        "exit_code": status_exit_code(traj.terminal_status for traj in runs.values()),
    }


def cmd_verify(manifest: RunManifest) -> Dict[str, Any]:
    """
    Verify one run against its theorem's envelopes and B-signs.

    Raises:
        PreconditionError: data fails the theorem gate (nothing is integrated)
    """
    report = verify_run(manifest.data, manifest.cfg, manifest.t_min, manifest.t_max,
                        manifest.mode, manifest.grid_points)
    summary = report.to_dict()
    if not report.integrations_complete:
        exit_code = status_exit_code(traj.terminal_status for traj in report.trajectories.values())
    else:
        exit_code = EXIT_OK if report.passed else EXIT_FAILURE
    summary["exit_code"] = exit_code
    summary["phi_lower_variants"] = report.variant_summary("phi", "lower")
    _write_report(summary, manifest.outputs.get("report"))
    return summary


def _verify_worker(payload: Tuple[Any, ...]) -> Dict[str, Any]:
    data, cfg, t_min, t_max, mode, grid_points = payload
    try:
        report = verify_run(data, cfg, t_min, t_max, mode, grid_points)
    except (PreconditionError, ConfigError) as exc:
        return {"beta": data.beta, "alpha": data.alpha, "passed": False, "refused": True,
                "first_failure": str(exc)}
    summary = report.to_dict()
    summary["refused"] = False
    return summary


def cmd_verify_grid(manifest: RunManifest, betas: Sequence[float]) -> Dict[str, Any]:
    """Verify independent runs over a beta grid, fanned out over worker processes."""
    payloads = [(replace(manifest.data, beta=beta), manifest.cfg, manifest.t_min, manifest.t_max,
                 manifest.mode, manifest.grid_points) for beta in betas]
    results = run_parallel(_verify_worker, payloads, manifest.workers)
    passed = all(result["passed"] for result in results)
    summary = {"runs": results, "passed": passed, "exit_code": EXIT_OK if passed else EXIT_FAILURE}
    _write_report(summary, manifest.outputs.get("report"))
    return summary


def _admissible_worker(payload: Tuple[float, List[float]]) -> List[Dict[str, Any]]:
    alpha, betas = payload
    rows = []
    for beta in betas:
        kappa, in_A, reason = admissible_point(alpha, beta)
        rows.append({"alpha": alpha, "beta": beta, "kappa": kappa, "in_A": int(in_A), "reason": reason})
    return rows


def cmd_admissible(alpha_range: Tuple[float, float], beta_range: Tuple[float, float],
                   grid: Tuple[int, int], output: Path, workers: int = 0) -> Dict[str, Any]:
    """Scan an (alpha, beta) grid, endpoints included, and write the region CSV."""
    n_alpha, n_beta = grid
    if min(grid) < 2:
        raise ConfigError(f"grid needs at least 2 points per axis, got {grid}")
    alphas = np.linspace(alpha_range[0], alpha_range[1], n_alpha).tolist()
    betas = np.linspace(beta_range[0], beta_range[1], n_beta).tolist()
    rows = [row for chunk in run_parallel(_admissible_worker, [(a, betas) for a in alphas], workers)
            for row in chunk]
    path = write_region_csv(rows, output)
    return {
        "csv": str(path),
        "points": len(rows),
        "admissible": sum(row["in_A"] for row in rows),
        "exit_code": EXIT_OK,
    }


def cmd_plot(input_csv: Path, column: str, output: Path, overlay: Optional[EnvelopeSet] = None,
             log_t: bool = False) -> Dict[str, Any]:
    """Chart one column of a trajectory CSV as SVG."""
    series = plot_column(input_csv, column, output, overlay, log_t)
    return {
        "svg": str(output),
        "series": [{"label": item.label, "role": item.role, "points": len(item.t)} for item in series],
        "exit_code": EXIT_OK,
    }


def cmd_figures(output_dir: Path, cfg: IntegratorConfig) -> Dict[str, Any]:
    """Regenerate the envelope charts and the beta = 1/3 evolution charts."""
    output_dir.mkdir(parents=True, exist_ok=True)
    files: List[str] = []

    bound_charts = [
        ("bounds_H_high_regime.svg", EnvelopeSet(beta=0.5), "H", np.linspace(-2.0, 5.0, 401),
         "Bounds for H (beta > sqrt(5/27))"),
        ("bounds_H_low_regime.svg", EnvelopeSet(beta=1.0 / 3.0), "H", np.linspace(-2.0, 5.0, 401),
         "Bounds for H (beta <= sqrt(5/27))"),
        ("bounds_phi.svg", EnvelopeSet(beta=1.0 / 3.0), "phi", np.linspace(-0.5, 5.0, 401),
         "Bounds for phi"),
    ]
    for name, env, quantity, times, title in bound_charts:
        series = envelope_series(env, quantity, times)
        files.append(str(render_svg(series, output_dir / name, title, COLUMN_LABELS[quantity])))

    data = FreeData(a0=1.0, beta=1.0 / 3.0, alpha=0.0)
    state0 = make_initial_state(data)
    backward = integrate(state0, -5.0, cfg)
    forward = integrate(state0, 20.0, cfg)
    frame = stitch(backward, forward)
    files.append(str(write_trajectory_csv(frame, output_dir / "evolution.csv")))
    overlay = EnvelopeSet(beta=data.beta)
    for column in ("H", "phi"):
        series = build_series(frame, column, overlay)
        files.append(str(render_svg(series, output_dir / f"evolution_{column}.svg",
                                    f"Evolution of {COLUMN_LABELS[column]} (alpha=0, beta=1/3)",
                                    COLUMN_LABELS[column])))
    return {
        "files": files,
        "exit_code": status_exit_code([backward.terminal_status, forward.terminal_status]),
    }


# Tools

@dataclass
class ToolConfig:
    """Configuration for one subcommand tool."""
    name: str
    description: str
    version: str = "1.0.0"


class ToolError(ESGBError):
    """Tool-related error."""
    pass


class ToolValidationError(ToolError):
    """Input failed the tool's parameter schema."""
    pass


class ToolExecutionError(ToolError):
    """The operation behind the tool failed."""
    pass


RUN_PROPERTIES: Dict[str, Dict[str, Any]] = {
    "beta": {"type": "number", "description": "Gauss-Bonnet coupling"},
    "alpha": {"type": "number", "description": "initial scalar field phi(0)"},
    "a0": {"type": "number", "description": "initial scale factor", "exclusiveMinimum": 0.0},
    "s": {"type": "integer", "description": "constraint branch", "enum": [1, -1]},
    "t_min": {"type": "number", "description": "backward end time", "maximum": 0.0},
    "t_max": {"type": "number", "description": "forward end time", "minimum": 0.0},
    "rtol": {"type": "number", "description": "relative tolerance", "exclusiveMinimum": 0.0},
    "atol": {"type": "number", "description": "absolute tolerance", "exclusiveMinimum": 0.0},
    "mode": {"type": "string", "description": "envelope family", "enum": [m.value for m in EnvelopeMode]},
    "output": {"type": "string", "description": "output path"},
    "config": {"type": "string", "description": "YAML config file"},
    "report": {"type": "string", "description": "JSON report path"},
    "workers": {"type": "integer", "description": "worker processes (0 or 1: sequential)", "minimum": 0},
}


class CommandTool(ABC):
    """
    Base class for the subcommands.

    Subclasses declare their parameters and implement _execute_main_logic,
    which returns a dictionary carrying an "exit_code".
    """

    config: ToolConfig

    def __init__(self, config: Optional[ToolConfig] = None):
        self.config = config or self.config
        self.logger = logging.getLogger(f"{__name__}.{self.config.name}")
        self.execution_count = 0
        self.success_count = 0
        self.error_count = 0

    @abstractmethod
    def parameters(self) -> Dict[str, Dict[str, Any]]:
        """Property schemas of the tool's inputs."""

    def required(self) -> List[str]:
        return []

    @abstractmethod
    def _execute_main_logic(self, **kwargs) -> Dict[str, Any]:
        """Run the operation; raises ESGBError subclasses on refusal."""

    def get_schema(self) -> Dict[str, Any]:
        return {
            "name": self.config.name,
            "description": self.config.description,
            "version": self.config.version,
            "parameters": {
                "type": "object",
                "properties": self.parameters(),
                "required": self.required(),
            },
            "returns": {
                "type": "object",
                "properties": {
                    "success": {"type": "boolean"},
                    "data": {"type": "object"},
                    "metadata": {"type": "object"},
                    "error": {"type": "string"},
                },
            },
        }

    def validate_input(self, **kwargs) -> bool:
        """
        Validate input parameters against the tool's schema.

        Raises:
            ToolValidationError: unknown, missing, mistyped or out-of-range parameter
        """
        properties = self.parameters()
        for param in self.required():
            if kwargs.get(param) is None:
                raise ToolValidationError(f"Missing required parameter: {param}")

        for name, value in kwargs.items():
            if name not in properties:
                raise ToolValidationError(f"Unknown parameter: {name}")
            if value is None:
                continue
            schema = properties[name]
            expected = schema.get("type")
            if expected == "string" and not isinstance(value, str):
                raise ToolValidationError(f"Parameter '{name}' must be a string")
            if expected == "integer" and (isinstance(value, bool) or not isinstance(value, int)):
                raise ToolValidationError(f"Parameter '{name}' must be an integer")
            if expected == "number" and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise ToolValidationError(f"Parameter '{name}' must be a number")
            if expected == "boolean" and not isinstance(value, bool):
                raise ToolValidationError(f"Parameter '{name}' must be a boolean")

            if "enum" in schema and value not in schema["enum"]:
                raise ToolValidationError(f"Parameter '{name}' must be one of {schema['enum']}")
            if expected in ("integer", "number"):
                if "minimum" in schema and value < schema["minimum"]:
                    raise ToolValidationError(f"Parameter '{name}' must be >= {schema['minimum']}")
                if "maximum" in schema and value > schema["maximum"]:
                    raise ToolValidationError(f"Parameter '{name}' must be <= {schema['maximum']}")
                if "exclusiveMinimum" in schema and value <= schema["exclusiveMinimum"]:
                    raise ToolValidationError(f"Parameter '{name}' must be > {schema['exclusiveMinimum']}")
        return True

    def _run_operation(self, **kwargs) -> Dict[str, Any]:
        """
        Run _execute_main_logic, reporting I/O failures other than missing inputs.

        Raises:
            ToolExecutionError: an output could not be written or an input not read
        """
        try:
            return self._execute_main_logic(**kwargs)
        except FileNotFoundError:
            raise
        except OSError as exc:
            raise ToolExecutionError(f"{exc.strerror or exc}: {exc.filename}") from exc

    def execute(self, **kwargs) -> Dict[str, Any]:
        """Result dictionary with success, data, metadata and error fields."""
        self.execution_count += 1
        start_time = time.time()
        try:
            self.validate_input(**kwargs)
            self.logger.debug(f"Executing {self.config.name} with parameters: {kwargs}")
            data = self._run_operation(**kwargs)
            self.success_count += 1
            return {
                "success": True,
                "data": data,
                "metadata": self._metadata(kwargs, start_time),
            }
        except ToolValidationError as e:
            error_msg = f"Validation error in {self.config.name}: {e}"
        except ToolExecutionError as e:
            error_msg = f"Execution error in {self.config.name}: {e}"
        except FileNotFoundError as e:
            error_msg = f"Missing file in {self.config.name}: {e}"
        except ESGBError as e:
            error_msg = f"{type(e).__name__} in {self.config.name}: {e}"
        except Exception as e:
            self.logger.error(f"Unexpected error in {self.config.name}: {e}", exc_info=True)
            error_msg = f"Unexpected error in {self.config.name}: {e}"
        self.error_count += 1
        self.logger.error(error_msg)
        return {
            "success": False,
            "data": None,
            "error": error_msg,
            "metadata": self._metadata(kwargs, start_time),
        }

    def _metadata(self, parameters: Dict[str, Any], start_time: float) -> Dict[str, Any]:
        return {
            "tool_name": self.config.name,
            "tool_version": self.config.version,
            "execution_time": time.time() - start_time,
            "execution_count": self.execution_count,
            "parameters": parameters,
        }

    def get_statistics(self) -> Dict[str, Any]:
        return {
            "tool_name": self.config.name,
            "total_executions": self.execution_count,
            "successful_executions": self.success_count,
            "failed_executions": self.error_count,
        }


def _manifest_from(kwargs: Dict[str, Any]) -> RunManifest:
    flags = {key: value for key, value in kwargs.items() if key not in ("config", "report", "beta_grid")}
    manifest = build_manifest(flags, kwargs.get("config"))
    if kwargs.get("report"):
        manifest.outputs["report"] = Path(kwargs["report"])
    return manifest


class SimulateTool(CommandTool):
    config = ToolConfig("simulate", "Integrate a run backward and forward and write the trajectory CSV")

    def parameters(self) -> Dict[str, Dict[str, Any]]:
        names = ("beta", "alpha", "a0", "s", "t_min", "t_max", "rtol", "atol", "mode", "output", "config")
        return {name: RUN_PROPERTIES[name] for name in names}

    def _execute_main_logic(self, **kwargs) -> Dict[str, Any]:
        return cmd_simulate(_manifest_from(kwargs))


class VerifyTool(CommandTool):
    config = ToolConfig("verify", "Check runs against their envelopes and the B-sign conditions")

    def parameters(self) -> Dict[str, Dict[str, Any]]:
        names = ("beta", "alpha", "a0", "s", "t_min", "t_max", "rtol", "atol", "mode", "config",
                 "report", "workers")
        properties = {name: RUN_PROPERTIES[name] for name in names}
        properties["grid_points"] = {"type": "integer", "description": "samples per direction", "minimum": 2}
        properties["beta_grid"] = {"type": "string", "description": "beta grid a:b:n"}
        return properties

    def _execute_main_logic(self, **kwargs) -> Dict[str, Any]:
        manifest = _manifest_from(kwargs)
        if kwargs.get("beta_grid"):
            return cmd_verify_grid(manifest, parse_beta_grid(kwargs["beta_grid"]))
        return cmd_verify(manifest)


class AdmissibleTool(CommandTool):
    config = ToolConfig("admissible", "Scan an (alpha, beta) grid for the admissible set")

    def parameters(self) -> Dict[str, Dict[str, Any]]:
        return {
            "alpha_range": {"type": "string", "description": "alpha range a:b"},
            "beta_range": {"type": "string", "description": "beta range a:b"},
            "grid": {"type": "string", "description": "points per axis, N or NxM"},
            "output": RUN_PROPERTIES["output"],
            "workers": RUN_PROPERTIES["workers"],
        }

    def required(self) -> List[str]:
        return ["alpha_range", "beta_range", "grid"]

    def _execute_main_logic(self, **kwargs) -> Dict[str, Any]:
        return cmd_admissible(
            parse_range(kwargs["alpha_range"]),
            parse_range(kwargs["beta_range"]),
            parse_grid(kwargs["grid"]),
            Path(kwargs.get("output") or DEFAULT_REGION_CSV),
            kwargs.get("workers") or 0,
        )


class PlotTool(CommandTool):
    config = ToolConfig("plot", "Chart one trajectory column as SVG")

    def parameters(self) -> Dict[str, Dict[str, Any]]:
        return {
            "input": {"type": "string", "description": "trajectory CSV"},
            "column": {"type": "string", "description": "column to chart"},
            "output": RUN_PROPERTIES["output"],
            "overlay_bounds": {"type": "boolean", "description": "draw the envelopes"},
            "log_t": {"type": "boolean", "description": "logarithmic t axis (t > 0 only)"},
            "beta": RUN_PROPERTIES["beta"],
            "alpha": RUN_PROPERTIES["alpha"],
            "mode": RUN_PROPERTIES["mode"],
            "config": RUN_PROPERTIES["config"],
        }

    def required(self) -> List[str]:
        return ["input", "column", "output"]

    def _execute_main_logic(self, **kwargs) -> Dict[str, Any]:
        overlay = None
        if kwargs.get("overlay_bounds"):
            run_section = load_config_file(kwargs.get("config")).get("run") or {}
            overlay = EnvelopeSet(
                beta=resolve("beta", kwargs.get("beta"), run_section, 1.0 / 3.0),
                alpha=resolve("alpha", kwargs.get("alpha"), run_section, 0.0),
                mode=parse_mode(resolve("mode", kwargs.get("mode"), run_section, EnvelopeMode.THM21)),
            )
        return cmd_plot(Path(kwargs["input"]), kwargs["column"], Path(kwargs["output"]), overlay,
                        bool(kwargs.get("log_t")))


class FiguresTool(CommandTool):
    config = ToolConfig("figures", "Regenerate the bound and evolution charts")

    def parameters(self) -> Dict[str, Dict[str, Any]]:
        return {
            "output": {"type": "string", "description": "output directory"},
            "rtol": RUN_PROPERTIES["rtol"],
            "atol": RUN_PROPERTIES["atol"],
            "config": RUN_PROPERTIES["config"],
        }

    def _execute_main_logic(self, **kwargs) -> Dict[str, Any]:
        cfg = build_manifest({"rtol": kwargs.get("rtol"), "atol": kwargs.get("atol")}, kwargs.get("config")).cfg
        return cmd_figures(Path(kwargs.get("output") or "figures"), cfg)


TOOLS = {tool.config.name: tool for tool in (SimulateTool, VerifyTool, AdmissibleTool, PlotTool, FiguresTool)}


# Command line

class ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 1; 2 is reserved for constraint drift."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAILURE, f"{self.prog}: error: {message}\n")


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--beta", type=float, help="Gauss-Bonnet coupling")
    parser.add_argument("--alpha", type=float, help="initial scalar field phi(0)")
    parser.add_argument("--a0", type=float, help="initial scale factor")
    parser.add_argument("--s", type=parse_sign, help="constraint branch, +1 or -1")
    parser.add_argument("--t-min", type=float, help="backward end time (<= 0)")
    parser.add_argument("--t-max", type=float, help="forward end time (>= 0)")
    parser.add_argument("--rtol", type=float, help="relative tolerance")
    parser.add_argument("--atol", type=float, help="absolute tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(
        prog="esgb-flrw",
        description="Simulate and verify Einstein-scalar-Gauss-Bonnet FLRW cosmologies",
    )
    parser.add_argument("--config", help="YAML config file (default: config/integrator.yaml)")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parser.add_argument("--quiet", "-q", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help=SimulateTool.config.description)
    _add_run_arguments(simulate)
    simulate.add_argument("--output", help=f"trajectory CSV (default: {DEFAULT_TRAJECTORY_CSV})")
    simulate.add_argument("--mode", choices=[m.value for m in EnvelopeMode], help="thm12 restricts the run to t >= 0")

    verify = sub.add_parser("verify", help=VerifyTool.config.description)
    _add_run_arguments(verify)
    verify.add_argument("--mode", choices=[m.value for m in EnvelopeMode], help="envelope family")
    verify.add_argument("--grid-points", type=int, help="samples per direction")
    verify.add_argument("--beta-grid", help="verify every beta of linspace(a, b, n), given as a:b:n")
    verify.add_argument("--workers", type=int, help="worker processes for --beta-grid")
    verify.add_argument("--report", help="write the JSON report here")

    admissible = sub.add_parser("admissible", help=AdmissibleTool.config.description)
    admissible.add_argument("--alpha-range", default="0:2", help="alpha range a:b")
    admissible.add_argument("--beta-range", default=f"0:{BETA_MAX!r}", help="beta range a:b")
    admissible.add_argument("--grid", default="21", help="points per axis, N or NxM (>= 2)")
    admissible.add_argument("--output", help=f"region CSV (default: {DEFAULT_REGION_CSV})")
    admissible.add_argument("--workers", type=int, help="worker processes")

    plot = sub.add_parser("plot", help=PlotTool.config.description)
    plot.add_argument("--input", required=True, help="trajectory CSV")
    plot.add_argument("--column", required=True, help="column to chart")
    plot.add_argument("--output", required=True, help="SVG path")
    plot.add_argument("--overlay-bounds", action="store_true", help="draw the envelopes")
    plot.add_argument("--log-t", action="store_true", help="logarithmic t axis")
    plot.add_argument("--beta", type=float, help="coupling for the envelopes")
    plot.add_argument("--alpha", type=float, help="phi(0) for the envelopes")
    plot.add_argument("--mode", choices=[m.value for m in EnvelopeMode], help="envelope family")

    figures = sub.add_parser("figures", help=FiguresTool.config.description)
    figures.add_argument("--output", default="figures", help="output directory")
    figures.add_argument("--rtol", type=float, help="relative tolerance")
    figures.add_argument("--atol", type=float, help="absolute tolerance")
    return parser


def _tool_arguments(args: argparse.Namespace, tool: CommandTool) -> Dict[str, Any]:
    accepted = tool.parameters()
    return {name: value for name, value in vars(args).items() if name in accepted and value is not None}


def _print_summary(command: str, data: Dict[str, Any]) -> None:
    if command == "simulate":
        print(f"kappa={data['kappa']:.6g}  gamma={data['gamma']:.6g}  phidot(0)={data['phidot0']:.6g}")
        for direction, run in data["runs"].items():
            print(f"  {direction}: {run['terminal_status']} at t={run['t_reached']:.6g} "
                  f"({run['samples']} samples)")
        print(f"Trajectory: {data['csv']}")
    elif command == "verify":
        runs = data.get("runs", [data])
        for run in runs:
            mark = "✅" if run["passed"] else "❌"
            detail = "" if run["passed"] else f": {run['first_failure']}"
            print(f"{mark} beta={run['beta']:.6g} alpha={run['alpha']:.6g}{detail}")
    elif command == "admissible":
        print(f"{data['admissible']}/{data['points']} points admissible -> {data['csv']}")
    elif command == "plot":
        print(f"Wrote {data['svg']} ({len(data['series'])} series)")
    elif command == "figures":
        for path in data["files"]:
            print(f"Wrote {path}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    load_environment()

    tool = TOOLS[args.command]()
    result = tool.execute(**_tool_arguments(args, tool))
    if not result["success"]:
        print(f"❌ {result['error']}", file=sys.stderr)
        return EXIT_FAILURE
    _print_summary(args.command, result["data"])
    return result["data"]["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
