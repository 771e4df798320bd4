#!/usr/bin/env python3
"""End-to-end workflow on one price CSV: fit several model families,
compare them by LOO, and forecast with the best one.

Usage:
    python scripts/fit_compare_forecast.py --data prices.csv --out runs/ \
        --models garch vs fw-rw --horizon 250
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from volbayes.cli import main as cli_main  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", required=True)
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--models", nargs="+", default=["garch", "vs", "fw-rw"])
    ap.add_argument("--horizon", type=int, default=250)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--chains", type=int, default=4)
    ap.add_argument("--warmup", type=int, default=400)
    ap.add_argument("--draws", type=int, default=400)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    fit_dirs = []
    for model in args.models:
        fit_dir = args.out / model.replace("-", "_")
        config = {
            "model": model,
            "data_path": args.data,
            "output_dir": str(fit_dir),
            "seed": args.seed,
            "sampler": {
                "chains": args.chains,
                "warmup": args.warmup,
                "draws": args.draws,
            },
        }
        cfg_path = args.out / f"{model}.json"
        cfg_path.write_text(json.dumps(config, indent=2))
        print(f"== fitting {model} ==")
        if cli_main(["fit", "--config", str(cfg_path)]) != 0:
            raise SystemExit(f"fit failed for {model}")
        cli_main(["diagnose", str(fit_dir)])
        fit_dirs.append(str(fit_dir))

    print("== comparison ==")
    cli_main(["compare", *fit_dirs, "--out", str(args.out / "comparison.csv")])

    print(f"== forecasting {args.horizon} steps with each fit ==")
    for fit_dir in fit_dirs:
        cli_main(["forecast", fit_dir, "--horizon", str(args.horizon)])


if __name__ == "__main__":
    main()
