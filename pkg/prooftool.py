#!/usr/bin/env python3
"""
Heteroclinic proof tool (prooftool.py)
Runs the computer-assisted proof stages, tunes the free parameters and
exports certified curves for plotting.
"""
import argparse
import logging
import os
import sys
from pathlib import Path

# Add the current directory to Python path so we can import our modules
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

try:
    from dependencies.config import get_settings
    from dependencies.services import get_pipeline_service
    from scripts.check_env import check_environment
    from services.errors import ConfigError, ProofError
    from services.pipeline_service import STAGES
except ImportError as e:
    print(f"❌ Import error: {e}")
    print("Make sure the project dependencies are installed: uv sync")
    sys.exit(1)

LOG_FORMAT = "%(asctime)s [%(levelname)8s] %(name)s: %(message)s"


def show_help():
    """Show detailed help information"""
    help_text = """
Heteroclinic proof tool (prooftool.py)

Validates the equilibria, eigenpairs, local invariant manifolds and the
connecting orbit of the vector field, writing one JSON certificate per stage
and a report to the output directory.

USAGE:
    uv run python prooftool.py <command> [options]

COMMANDS:
    # Proof stages
    equilibria        Validate the two equilibria
    eigen             Validate all eigenpairs at the equilibria
    manifolds         Validate the local stable and unstable manifolds
    connection        Validate the connecting orbit
    all               Run every stage in order, stopping at the first failure

    # Parameters and data
    tune              Resolve "auto" scales, tau and alpha0; writes resolved.toml
    export-trajectory Write the certified orbit (or, with --stage, a manifold boundary) as CSV
    env               Show environment variables and the effective configuration

OPTIONS:
    --config PATH     TOML configuration file (flat dotted keys)
    --out DIR         Output directory (overrides output.out_dir)
    --stage NAME      Export source: connection (default), stable, unstable or a manifold name
    --export-csv PATH CSV destination for export-trajectory
    --log-level LEVEL DEBUG, INFO (default), WARNING or ERROR

EXIT CODES:
    0 success, 2 configuration error, 3 missing upstream certificate, 4 proof failure
    """
    print(help_text)


def run_stages(pipeline, stages) -> int:
    try:
        report = pipeline.run(stages)
    except ProofError as e:
        print(f"❌ {e}")
        return e.exit_code
    for record in report.stages:
        if record.name in stages:
            print(f"✅ {record.name}: {record.status}")
    print(f"📄 Report written to {pipeline.storage.path_for(pipeline.config.output.report_name)}")
    return 0


def run_tune(pipeline) -> int:
    try:
        config = pipeline.tune()
    except ProofError as e:
        pipeline.save_report()
        print(f"❌ {e}")
        return e.exit_code
    print(f"✅ scale_u = {config.manifold.scale_u}, scale_s = {config.manifold.scale_s}")
    print(f"✅ alpha0 = {config.orbit.alpha0!r}, tau = {config.orbit.tau!r}, K = {config.orbit.K}")
    print(f"📄 Resolved configuration written to {pipeline.storage.path_for('resolved.toml')}")
    return 0


def run_export(pipeline, stage: str, path) -> int:
    try:
        text = pipeline.export_trajectory(stage)
    except ProofError as e:
        print(f"❌ {e}")
        return e.exit_code
    if path is None:
        name = "orbit.csv" if stage == "connection" else f"{stage}_boundary.csv"
        target = pipeline.storage.save_text(text, name)
    else:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
    print(f"📄 CSV written to {target}")
    return 0


def main(argv=None) -> int:
    """Main entry point"""
    parser = argparse.ArgumentParser(
        description="Computer-assisted proof of a transverse heteroclinic orbit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  uv run python prooftool.py tune --config heteroproof.toml
  uv run python prooftool.py all --config proofs/resolved.toml
  uv run python prooftool.py export-trajectory --out proofs --export-csv orbit.csv
        """
    )

    parser.add_argument(
        "command",
        nargs="?",
        choices=[*STAGES, "all", "tune", "export-trajectory", "env", "help"],
        help="Command to execute"
    )
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--stage", default="connection", help="Export source for export-trajectory")
    parser.add_argument("--export-csv", dest="export_csv", help="CSV destination for export-trajectory")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level"
    )

    args = parser.parse_args(argv)

    # If no command provided, show help
    if not args.command or args.command == "help":
        show_help()
        return 0

    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)

    if args.command == "env":
        return 0 if check_environment(args.config) else ConfigError.exit_code

    try:
        config = get_settings(args.config)
        pipeline = get_pipeline_service(config, out_dir=args.out)
    except ConfigError as e:
        print(f"❌ {e}")
        return e.exit_code

    if args.command == "tune":
        return run_tune(pipeline)
    if args.command == "export-trajectory":
        return run_export(pipeline, args.stage, args.export_csv)
    stages = list(STAGES) if args.command == "all" else [args.command]
    return run_stages(pipeline, stages)


if __name__ == "__main__":
    sys.exit(main())
