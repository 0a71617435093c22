import sys
sys.path.append("..")

import argparse
import logging
from pathlib import Path
from time import strftime

import numpy as np
import pandas as pd

from getzlercalc.harness import ConfigError, RunConfig, load_config, with_overrides
from getzlercalc.kirillov import kirillov_sweep

file_name = Path(__file__).stem


def sweep(cfg, k_values, s_values):
    """One table over all ``k``; logs where agreement first degrades, if anywhere."""
    tables = []
    for k in k_values:
        table = kirillov_sweep(k, s_values, cfg.quadrature, cfg.geometry)
        failed = table.loc[~table["passed"], "s"]
        if failed.empty:
            logger.info(f"k={k}: agreement within {cfg.quadrature.tolerance:g} on "
                        f"[{s_values[0]:g}, {s_values[-1]:g}], "
                        f"max error {table['abs_error'].max():.3e}")
        else:
            logger.warning(f"k={k}: agreement degrades at s={failed.iloc[0]:g}")
        tables.append(table)
    return pd.concat(tables, ignore_index=True)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description="Sweep the Kirillov integral against the character over the rotation angle")
    parser.add_argument("--config", type=str, default=None)
    parser.add_argument("--k", nargs="+", type=int, default=[0, 1, 2])
    parser.add_argument("--s_min", type=float, default=0.0)
    parser.add_argument("--s_max", type=float, default=1.0)
    parser.add_argument("--steps", type=int, default=21)
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--out", type=str, default="results/kirillov_sweep.csv")
    args = parser.parse_args()

    Path("./logs").mkdir(parents=True, exist_ok=True)

    path_run_name = "{}-{}".format(file_name, strftime("%Y%m%d-%H%M%S"))

    logging.basicConfig(
        format="%(asctime)s,%(msecs)d %(name)s %(levelname)s %(message)s",
        handlers=[
            logging.FileHandler(f"logs/{path_run_name}_log.txt"),
            logging.StreamHandler()
        ],
        datefmt="%H:%M:%S",
        level=logging.INFO,
    )
    logger = logging.getLogger()

    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = with_overrides(cfg, tolerance=args.tolerance)
    except ConfigError as e:
        logger.error(f"configuration error: {e}")
        sys.exit(2)
    try:
        s_values = np.linspace(args.s_min, args.s_max, args.steps)
        table = sweep(cfg, args.k, s_values)
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out, index=False)
        logger.info(f"sweep of {len(table)} rows written to {args.out}")
    except Exception as e:
        logger.error(e)
        raise e
