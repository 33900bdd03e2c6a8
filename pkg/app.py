"""
Command-line entry point of the GCP toolkit.

    python app.py pmf --config cfg.json --n-max 20 --method conv
    python app.py sample --config cfg.json --variant time --paths 5 --grid "0.5,1,1.5"
    python app.py integral --config cfg.json --mode quadrature --alpha "0.5,0.8"
    python app.py mlf --alpha 0.5 --x=-1,0,1 --table
    python app.py residual --config cfg.json --variant space --n 0
    python app.py verify --config cfg.json --suite all --seed 42
"""
import argparse
import json
import sys

from harness.experiment import default_config, load_config
from harness.suites import KNOWN_SUITES
from harness.tools import (
    ComputePmf,
    ComputeResidual,
    EvaluateMittagLeffler,
    RunVerification,
    SampleIntegral,
    SamplePaths,
    parse_grid,
)
from utils import error_handler, logger
from utils.config import config
from utils.error_handler import ValidationError

log = logger.get_logger(__name__)

VARIANT_CHOICES = ("base", "space", "space-mv", "time", "time-mv")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ValidationError(f"'{text}' is not a comma-separated list of numbers") from e


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ValidationError(f"'{text}' is not a comma-separated list of integers") from e


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment file; a built-in base instance when omitted")
    common.add_argument("--seed", type=int, help="Base RNG seed (overrides the config)")
    common.add_argument("--out", help="Output path; stdout when omitted or '-'")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    common.add_argument("--variant", choices=VARIANT_CHOICES, help="Variant (overrides the config)")

    parser = argparse.ArgumentParser(prog="gcp", description="Multiparameter generalized counting process toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    pmf = commands.add_parser("pmf", parents=[common], help="pmf table of the configured variant")
    pmf.add_argument("--n-max", type=int, dest="n_max")
    pmf.add_argument("--method", choices=("direct", "conv", "sumgcp"), default="conv")

    sample = commands.add_parser("sample", parents=[common], help="sample paths on a grid")
    sample.add_argument("--paths", type=int, default=10)
    sample.add_argument("--grid", help="Increasing grid: 't1,t2,...' or 'a:b,c:d' vectors")
    sample.add_argument("--steps", type=int, default=10, help="Points of the default grid")

    integral = commands.add_parser("integral", parents=[common], help="integral replicates")
    integral.add_argument("--mode", choices=("compound", "quadrature"), default="compound")
    integral.add_argument("--alpha", help="RL orders 'a1,..,ad'")
    integral.add_argument("--paths", type=int)

    mlf = commands.add_parser("mlf", parents=[common], help="three-parameter Mittag-Leffler function")
    mlf.add_argument("--alpha", type=float, required=True)
    mlf.add_argument("--beta", type=float, default=1.0)
    mlf.add_argument("--gamma", type=float, default=1.0)
    mlf.add_argument("--x", required=True, help="Argument or comma-separated arguments")
    mlf.add_argument("--table", action="store_true", help="Header row and a leading x column")

    residual = commands.add_parser("residual", parents=[common], help="governing-equation residuals")
    residual.add_argument("--n", default="0,1,2", help="Comma-separated states")
    residual.add_argument("--coordinate", type=int)

    verify = commands.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("--suite", default="all", help=f"One of {', '.join(KNOWN_SUITES)}")
    verify.add_argument("--workers", type=int)
    return parser


def resolve_config(args):
    """Config file (or the built-in instance) with command-line overrides applied"""
    cfg = load_config(args.config) if args.config else default_config()
    overrides = {"seed": args.seed}
    if args.variant and args.variant != cfg.variant.value:
        overrides["variant"] = args.variant
        # multivariate variants run on a scalar time
        if args.variant.endswith("-mv") and not isinstance(cfg.t, float):
            overrides["t"] = float(cfg.time_point().t[0])
    return cfg.with_overrides(**overrides)


def build_tool(args):
    if args.command == "mlf":
        return EvaluateMittagLeffler(alpha=args.alpha, beta=args.beta, gamma=args.gamma, x=_float_list(args.x),
                                     table=args.table, out=args.out)
    cfg = resolve_config(args)
    if args.command == "pmf":
        return ComputePmf(config=cfg, n_max=args.n_max, method=args.method, out=args.out)
    if args.command == "sample":
        grid = parse_grid(args.grid, cfg.d) if args.grid else None
        return SamplePaths(config=cfg, paths=args.paths, grid=grid, steps=args.steps, out=args.out)
    if args.command == "integral":
        alpha = _float_list(args.alpha) if args.alpha else None
        return SampleIntegral(config=cfg, mode=args.mode, alpha=alpha, paths=args.paths, out=args.out)
    if args.command == "residual":
        return ComputeResidual(config=cfg, n=_int_list(args.n), coordinate=args.coordinate, out=args.out)
    return RunVerification(config=cfg, suite=args.suite, workers=args.workers, out=args.out)


@error_handler.handle_errors
def run(args):
    logger.set_run_context()
    log.info("command started", extra={"command": args.command})
    config.validate()
    tool = build_tool(args)
    summary = tool.run()
    log.info("command finished", extra={"command": args.command, "summary": summary})
    if args.command == "verify" and not json.loads(summary)["overall"]:
        return error_handler.EXIT_VERIFICATION_FAILED
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logger.set_level("WARNING" if args.quiet else config.logging.level)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
