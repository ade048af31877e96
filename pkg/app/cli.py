"""
Command line entry point.

    python -m app.cli run --config scenario.toml [--out DIR] [--workers N]
    python -m app.cli plot --input run.csv --channels I_H,I_V --out fig.svg
    python -m app.cli validate --config scenario.toml
    python -m app.cli refine --config scenario.toml --strategy all_controls --alpha 0.9 --n-steps 250,500,1000

Exit codes: 0 all cells converged, 2 some cells failed, 1 usage or config error.
"""

import argparse
import json
import logging
import os
import sys

from dotenv import load_dotenv

# Fix import path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.config import parse_config, with_overrides  # noqa: E402
from core.errors import MalariaOCPError  # noqa: E402
from core.malaria import STRATEGIES, build_problem  # noqa: E402
from core.orchestrator import run_matrix  # noqa: E402
from core.sweep import refinement_study  # noqa: E402
from tools.fractional import TimeGrid  # noqa: E402
from tools.plotting import emit_plot  # noqa: E402

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CELLS_FAILED = 2

logger = logging.getLogger("app.cli")


def _split(values: str):
    return [v.strip() for v in values.split(",") if v.strip()]


def cmd_run(args) -> int:
    config = with_overrides(parse_config(args.config), output_dir=args.out, workers=args.workers)
    records = run_matrix(config)
    failed = [r for r in records if r.failed]
    print(f"{len(records)} cells written to {config.output_dir} ({len(failed)} failed)")
    return EXIT_CELLS_FAILED if failed else EXIT_OK


def cmd_plot(args) -> int:
    path = emit_plot(args.input, _split(args.channels), args.out)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = parse_config(args.config)
    print(json.dumps(config.to_dict(), indent=2))
    return EXIT_OK


def cmd_refine(args) -> int:
    config = parse_config(args.config)
    if args.strategy not in STRATEGIES:
        raise MalariaOCPError(f"unknown strategy {args.strategy!r}; expected one of {list(STRATEGIES)}")
    params = config.params_for(args.alpha)

    def build(n_steps):
        return build_problem(params, STRATEGIES[args.strategy], TimeGrid.from_horizon(config.horizon, n_steps),
                             x0=config.initial_state, variant=config.costate_variant, scheme=config.scheme,
                             name=f"{args.strategy}__alpha_{args.alpha:g}__n_{n_steps}")

    steps = [int(v) for v in _split(args.n_steps)]
    try:
        rows = refinement_study(build, steps, config.sweep)
    except MalariaOCPError as e:
        print(f"refinement failed: {e}", file=sys.stderr)
        return EXIT_CELLS_FAILED

    print("n_steps,J,iterations,change")
    for row in rows:
        change = "" if row["change"] is None else f"{row['change']:.12g}"
        print(f"{row['n_steps']},{row['objective']:.12g},{row['iterations']},{change}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="malaria-ocp",
                                     description="Fractional-order malaria optimal control scenarios")
    parser.add_argument("--log-level", default=os.getenv("MALARIA_OCP_LOG_LEVEL", "INFO"),
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the strategy x alpha matrix")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None, help="output directory (overrides [output].dir)")
    run.add_argument("--workers", type=int, default=None)
    run.set_defaults(handler=cmd_run)

    plot = sub.add_parser("plot", help="plot channels of a trajectory CSV")
    plot.add_argument("--input", required=True)
    plot.add_argument("--channels", required=True, help="comma separated, e.g. u1,u2,u3")
    plot.add_argument("--out", required=True)
    plot.set_defaults(handler=cmd_plot)

    validate = sub.add_parser("validate", help="parse and validate a scenario file")
    validate.add_argument("--config", required=True)
    validate.set_defaults(handler=cmd_validate)

    refine = sub.add_parser("refine", help="converged objective under grid refinement")
    refine.add_argument("--config", required=True)
    refine.add_argument("--strategy", default="all_controls")
    refine.add_argument("--alpha", type=float, default=1.0)
    refine.add_argument("--n-steps", default="250,500,1000")
    refine.set_defaults(handler=cmd_refine)
    return parser


def main(argv=None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.handler(args)
    except (MalariaOCPError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
