import sys
sys.path.append("..")

import argparse
import logging
from pathlib import Path
from time import strftime

from getzlercalc.harness import (CHECKS, SUITES, ConfigError, RunConfig, list_checks, load_config,
                                 run, with_overrides)

subcommands = list(SUITES) + ["all"]

file_name = Path(__file__).stem


def build_config(args):
    """Config file (or defaults), narrowed by the subcommand and overridden by flags."""
    cfg = load_config(args.config) if args.config else RunConfig()
    suites = None if args.suite == "all" else (args.suite,)
    checks = args.check
    if checks:
        # focused reruns pull in whatever suites the named checks belong to
        wanted = {CHECKS[c].suite for c in checks if c in CHECKS}
        suites = tuple(s for s in SUITES if s in wanted) or suites
    elif args.suite == "kirillov" and (args.k is not None or args.s is not None):
        checks = ["kirillov.index"]
    return with_overrides(cfg, seed=args.seed, out=args.out, tolerance=args.tolerance,
                          k=args.k, s=args.s, suites=suites, checks=checks)


def print_checks(suite):
    suites = SUITES if suite == "all" else (suite,)
    for c in list_checks(suites):
        print(f"{c.check_id:50s} {c.anchor}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description="Run the exact Getzler-calculus suites and the Kirillov check")
    parser.add_argument("suite", choices=subcommands, help="suite to run, or all")
    parser.add_argument("--config", type=str, default=None, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", type=str, default=None, help="report path")
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--k", type=int, default=None, help="twisting degree for kirillov")
    parser.add_argument("--s", type=float, default=None, help="rotation angle for kirillov")
    parser.add_argument("--check", action="append", default=None,
                        help="run only this check id; repeatable")
    parser.add_argument("--list-checks", action="store_true")  # Default False
    parser.add_argument("--verbose", action="store_true")  # Default False
    args = parser.parse_args()

    if args.list_checks:
        print_checks(args.suite)
        sys.exit(0)

    Path("./logs").mkdir(parents=True, exist_ok=True)

    path_run_name = "{}-{}".format(file_name, strftime("%Y%m%d-%H%M%S"))

    logging.basicConfig(
        format="%(asctime)s,%(msecs)d %(name)s %(levelname)s %(message)s",
        handlers=[
            logging.FileHandler(f"logs/{path_run_name}_log.txt"),
            logging.StreamHandler()
        ],
        datefmt="%H:%M:%S",
        level=logging.DEBUG if args.verbose else logging.INFO,
    )
    logger = logging.getLogger()

    try:
        cfg = build_config(args)
    except ConfigError as e:
        logger.error(f"configuration error: {e}")
        sys.exit(2)
    logger.info(f"config: {cfg.to_dict()}")
    try:
        report = run(cfg)
    except Exception as e:
        logger.error(e)
        raise e
    counts = report.counts()
    logger.info(f"{counts['pass']} passed, {counts['fail']} failed, "
                f"{counts['inconclusive']} inconclusive")
    sys.exit(report.exit_code)
