"""Command-line interface: validate, solve, run and sweep."""

import argparse
import asyncio
import json
import sys
from typing import List, Optional, Sequence

from dotenv import load_dotenv

from . import __version__
from .engine.service import SchedulerService
from .types.models import ApiResponse
from .utils import configure_logging, exit_code_for, get_config
from .utils.errors import InvalidParam


def parse_slos(text: str) -> List[float]:
    """``"20,100,400"`` -> ``[20.0, 100.0, 400.0]``."""
    try:
        slos = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidParam(f"--slo expects comma-separated numbers, got {text!r}") from None
    if not slos or any(not slo > 0 for slo in slos):
        raise InvalidParam(f"--slo values must be > 0 ms, got {text!r}")
    return slos


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON (env GEO_CARBON_CONFIG)")
    common.add_argument("--log-level", help="logging level (env GEO_CARBON_LOG_LEVEL)")

    runs = argparse.ArgumentParser(add_help=False)
    runs.add_argument("--seed", type=int, help="random seed")
    runs.add_argument("--out", help="output directory (env GEO_CARBON_OUT_DIR)")
    runs.add_argument("--hours", type=int, help="hours to simulate (default: whole trace)")

    parser = argparse.ArgumentParser(
        prog="geo-carbon",
        description="Carbon-aware provisioning and request scheduling across regions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", parents=[common], help="check the trace files")
    for kind in ("regions", "latency", "carbon", "workload"):
        validate.add_argument(f"--{kind}", help=f"{kind} file (default: from the config)")

    solve = commands.add_parser("solve", parents=[common], help="print one hour's plan as JSON")
    solve.add_argument("--hour", type=int, required=True)
    solve.add_argument("--policy", help="'latency' or 'carbon-<L>' (default: first carbon policy)")

    run = commands.add_parser("run", parents=[common, runs], help="simulate one policy")
    run.add_argument("--policy", help="policy name (default: first policy in the config)")

    sweep = commands.add_parser("sweep", parents=[common, runs], help="compare policies")
    sweep.add_argument("--slo", help="comma-separated SLOs in ms, e.g. 20,100,400,500")
    return parser


def _fail(result: ApiResponse) -> int:
    name = result.error_name or "InternalError"
    print(f"error: {name}: {result.error}", file=sys.stderr)
    return exit_code_for(name)


async def _dispatch(args: argparse.Namespace, service: SchedulerService) -> int:
    if args.command == "validate":
        paths = {kind: getattr(args, kind) for kind in ("regions", "latency", "carbon", "workload")}
        result = await service.validate(paths)
        if result.data is not None:
            for diag in result.data.files:
                status = "ok" if diag.ok else "FAIL"
                detail = f"  {diag.error_name or ''}: {diag.message}" if not diag.ok else ""
                print(f"{status:4}  {diag.kind:8}  {diag.path}{detail}")
        return 0 if result.success else _fail(result)

    if args.command == "solve":
        result = await service.solve(args.hour, args.policy)
        if not result.success:
            return _fail(result)
        print(json.dumps(result.data, indent=2, sort_keys=True))
        return 0

    overrides = {"seed": args.seed, "hours": args.hours}
    if args.command == "run":
        result = await service.run(args.policy, out_dir=args.out, **overrides)
        if not result.success:
            return _fail(result)
        print(json.dumps(result.data, indent=2, sort_keys=True))
        return 0

    try:
        slos = parse_slos(args.slo) if args.slo else None
    except InvalidParam as e:
        return _fail(ApiResponse(success=False, error=str(e), error_name=e.name))
    result = await service.sweep(slos, out_dir=args.out, **overrides)
    if not result.success:
        return _fail(result)
    print(json.dumps(result.data.model_dump(mode="json", exclude={"manifest"}), indent=2))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    load_dotenv()
    args = build_parser().parse_args(argv)

    config = get_config()
    updates = {}
    if args.config:
        updates["config_path"] = args.config
    if args.log_level:
        updates["log_level"] = args.log_level.upper()
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    config = config.model_copy(update=updates)

    try:
        configure_logging(config.log_level)
    except ValueError:
        error = InvalidParam(f"unknown log level {config.log_level!r}")
        return _fail(ApiResponse(success=False, error=str(error), error_name=error.name))
    return asyncio.run(_dispatch(args, SchedulerService(config)))


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
