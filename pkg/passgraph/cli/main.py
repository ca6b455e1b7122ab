import argparse
import sys

from passgraph import __version__
from passgraph.cli.commands import COMMANDS, run_pipeline
from passgraph.cli.config import apply_overrides, load_config
from passgraph.utils.errors import PassGraphError
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passgraph",
        description="Pass receiver prediction with a star-graph MPNN.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "pipeline"]:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run config (defaults when omitted)")
        p.add_argument("--seed", type=int, help="override every seed")
        p.add_argument(
            "--strict",
            action="store_true",
            default=None,
            help="single-threaded, bitwise reproducible execution",
        )
        p.add_argument("--out", help="runs root directory")
        p.add_argument("--data", help="snapshot file (JSON lines)")
        p.add_argument("--model", help="MPNN model file")
        p.add_argument("--predictions", help="prediction store (SQLite)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = apply_overrides(
            load_config(args.config),
            seed=args.seed,
            strict=args.strict,
            out=args.out,
            data=args.data,
            model=args.model,
            predictions=args.predictions,
        )
        if args.command == "pipeline":
            run_pipeline(config)
        else:
            run_dir = COMMANDS[args.command](config)
            print(run_dir)
    except PassGraphError as e:
        logger.error("%s failed (%s): %s", args.command, e.category, e)
        print(f"passgraph {args.command}: {e.category} error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
