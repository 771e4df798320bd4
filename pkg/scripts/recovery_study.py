#!/usr/bin/env python3
"""Simulation-recovery experiment.

Simulates one model family at fixed parameters over several seeds, refits
each series, and tabulates the mean / sd / RMSE of the posterior-mean
point estimates, mirroring the calibration-check workflow.

Usage:
    python scripts/recovery_study.py --model fw-fixed --seeds 10 --T 2000
    python scripts/recovery_study.py --model vs --seeds 10 --T 2000 \
        --out recovery_vs.csv
"""

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from volbayes.models import FwModel, GarchModel, VsModel  # noqa: E402
from volbayes.models import fw as fw_mod  # noqa: E402
from volbayes.models import garch as garch_mod  # noqa: E402
from volbayes.models import vs as vs_mod  # noqa: E402
from volbayes.sampler import HmcConfig, run_chains  # noqa: E402

TRUE_PARAMS = {
    "fw-fixed": {
        "phi": 0.12, "xi": 1.5, "sigma_f": 0.758, "sigma_c": 2.087,
        "alpha_0": -0.327, "alpha_n": 1.79, "alpha_p": 18.43,
    },
    "vs": {"mu": 100.0, "tau": 0.999, "sigma_max": 0.01},
    "garch": {"mu": 1e-5, "alpha": 0.1, "beta": 0.85, "sigma1": 0.012},
}


def one_seed(args):
    model_code, seed, T, chains, warmup, draws = args
    rng = np.random.default_rng(seed)
    true = TRUE_PARAMS[model_code]
    if model_code == "fw-fixed":
        sim = fw_mod.simulate(true, T, rng, mode="fixed", p_star=0.0)
        model = FwModel(sim.series, mode="fixed", p_star=0.0)
    elif model_code == "vs":
        sim = vs_mod.simulate(true, T, rng, init_log_price=4.6)
        model = VsModel(sim.series)
    else:
        sim = garch_mod.simulate(true, T, rng, init_log_price=4.6)
        model = GarchModel(sim.series)
    cfg = HmcConfig(chains=chains, warmup=warmup, draws=draws, seed=1000 * seed + 1)
    outputs = run_chains(model, cfg)
    pooled = np.vstack([o.draws for o in outputs if not o.failed])
    return seed, {n: float(pooled[:, j].mean()) for j, n in enumerate(model.param_names)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", choices=sorted(TRUE_PARAMS), default="fw-fixed")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--T", type=int, default=2000)
    ap.add_argument("--chains", type=int, default=4)
    ap.add_argument("--warmup", type=int, default=400)
    ap.add_argument("--draws", type=int, default=400)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    jobs = [
        (args.model, seed, args.T, args.chains, args.warmup, args.draws)
        for seed in range(args.seeds)
    ]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(one_seed, jobs))
    else:
        results = [one_seed(j) for j in jobs]

    true = TRUE_PARAMS[args.model]
    names = list(true)
    estimates = {n: np.array([r[1][n] for r in results]) for n in names}

    header = f"{'parameter':<10}{'true':>10}{'mean':>10}{'sd':>10}{'rmse':>10}"
    print(header)
    print("-" * len(header))
    rows = []
    for n in names:
        est = estimates[n]
        rmse = float(np.sqrt(np.mean((est - true[n]) ** 2)))
        print(f"{n:<10}{true[n]:>10.4g}{est.mean():>10.4g}{est.std(ddof=1):>10.4g}{rmse:>10.4g}")
        rows.append([n, true[n], est.mean(), est.std(ddof=1), rmse])

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["parameter", "true", "mean", "sd", "rmse"])
            w.writerows(rows)
        print(f"\nwritten to {args.out}")


if __name__ == "__main__":
    main()
