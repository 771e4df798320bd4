"""Command-line front end.

Subcommands: fit, simulate, diagnose, compare, forecast, prior-check.
Run configuration is strict JSON; unknown keys are rejected so typos
fail loudly. Every command is deterministic given (config, seed), and a
fit's metadata.json echoes everything needed to reproduce it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, distributions
from .diagnostics import RunReport, SummaryRow, split_rhat, summarize, summary_text
from .forecast import posterior_predictive, prior_predictive, smoothed_states
from .io import IngestError, default_dates, ingest_prices, write_csv, write_price_csv
from .loo import LooResult, pairwise_difference, psis_loo, restrict_to
from .models import MODEL_CODES, build_model
from .models import fw as fw_mod
from .models import garch as garch_mod
from .models import vs as vs_mod
from .sampler import ChainOutput, HmcConfig, run_chains

SAMPLER_KEYS = {
    "chains", "warmup", "draws", "max_tree_depth", "target_accept", "init_radius", "workers",
}
TOP_KEYS = {"model", "data_path", "output_dir", "seed", "sampler", "priors", "p_star", "sim"}
SIM_KEYS = {"params", "T", "init_log_price"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str
    data_path: str | None = None
    output_dir: str | None = None
    seed: int = 0
    sampler: dict = field(default_factory=dict)
    priors: dict = field(default_factory=dict)
    p_star: float = 0.0
    sim: dict = field(default_factory=dict)

    def hmc_config(self) -> HmcConfig:
        return HmcConfig(seed=self.seed, **self.sampler)


def load_config(path: str | Path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(raw, source=str(path))


def parse_config(raw: dict, source: str = "config") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    model = raw.get("model")
    if model not in MODEL_CODES:
        raise ConfigError(f"{source}: model must be one of {MODEL_CODES}, got {model!r}")
    sampler = raw.get("sampler", {})
    if not isinstance(sampler, dict):
        raise ConfigError(f"{source}: sampler must be an object")
    bad = set(sampler) - SAMPLER_KEYS
    if bad:
        raise ConfigError(f"{source}: unknown sampler keys {sorted(bad)}")
    priors = raw.get("priors", {})
    if not isinstance(priors, dict):
        raise ConfigError(f"{source}: priors must be an object")
    for name, spec in priors.items():
        try:
            distributions.from_config(spec)
        except ValueError as exc:
            raise ConfigError(f"{source}: prior for {name!r}: {exc}") from None
    sim = raw.get("sim", {})
    if not isinstance(sim, dict):
        raise ConfigError(f"{source}: sim must be an object")
    bad = set(sim) - SIM_KEYS
    if bad:
        raise ConfigError(f"{source}: unknown sim keys {sorted(bad)}")
    data_path = raw.get("data_path")
    if data_path is not None and not Path(data_path).exists():
        raise ConfigError(f"{source}: data_path {data_path!r} does not exist")
    return RunConfig(
        model=model,
        data_path=data_path,
        output_dir=raw.get("output_dir"),
        seed=int(raw.get("seed", 0)),
        sampler=dict(sampler),
        priors=dict(priors),
        p_star=float(raw.get("p_star", 0.0)),
        sim=dict(sim),
    )


def _build_model_from_config(cfg: RunConfig):
    if cfg.data_path is None:
        raise ConfigError("data_path is required")
    data = ingest_prices(cfg.data_path)
    model = build_model(cfg.model, data, priors=None, p_star=cfg.p_star)
    for name, spec in cfg.priors.items():
        if name not in model.param_names:
            raise ConfigError(
                f"prior override for unknown parameter {name!r}; "
                f"model has {model.param_names}"
            )
        model.priors[name] = distributions.from_config(spec)
    return model, data


def _data_digest(series) -> str:
    return hashlib.sha256(series.log_prices.tobytes()).hexdigest()


def _out_dir(cfg: RunConfig) -> Path:
    if not cfg.output_dir:
        raise ConfigError("output_dir is required")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_draws(path: Path, outputs: list[ChainOutput]) -> None:
    names = outputs[0].param_names

    def rows():
        for out in outputs:
            if out.failed:
                continue
            for it in range(out.draws.shape[0]):
                yield [out.chain_id, it, *out.draws[it]]

    write_csv(path, ["chain", "iteration", *names], rows())


def _write_stats(path: Path, outputs: list[ChainOutput]) -> None:
    def rows():
        for out in outputs:
            if out.failed:
                continue
            s = out.stats
            for it in range(out.draws.shape[0]):
                yield [
                    out.chain_id, it, s["divergent"][it], s["tree_depth"][it],
                    s["accept_stat"][it], s["energy"][it], s["step_size"][it],
                ]

    write_csv(
        path,
        ["chain", "iteration", "divergent", "tree_depth", "accept_stat", "energy", "step_size"],
        rows(),
    )


def _write_summary(out: Path, rows: list[SummaryRow], report: RunReport, notes=()) -> None:
    write_csv(
        out / "summary.csv",
        ["parameter", "mean", "sd", "q2.5", "q50", "q97.5", "rhat", "ess"],
        ([r.name, r.mean, r.sd, r.q2_5, r.q50, r.q97_5, r.rhat, r.ess] for r in rows),
    )
    text = summary_text(rows, report)
    for note in notes:
        text += f"\nnote: {note}"
    (out / "summary.txt").write_text(text + "\n", encoding="utf-8")


def _loglik_matrix(model, outputs: list[ChainOutput]) -> np.ndarray:
    draws = np.vstack([o.unconstrained_draws for o in outputs if not o.failed])
    return np.vstack([model.pointwise_loglik(draws[i]) for i in range(draws.shape[0])])


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(cfg)
    model, data = _build_model_from_config(cfg)
    hmc = cfg.hmc_config()
    outputs = run_chains(model, hmc)
    for o in outputs:
        if o.failed:
            print(f"warning: chain {o.chain_id} failed: {o.error}", file=sys.stderr)

    _write_draws(out / "draws.csv", outputs)
    _write_stats(out / "sampler_stats.csv", outputs)
    rows, report = summarize(outputs)
    notes = []
    if model.name == "fw-rw":
        notes.append("pointwise likelihoods are conditional on the sampled latent path")
    _write_summary(out, rows, report, notes)

    loglik = _loglik_matrix(model, outputs)
    loo = psis_loo(loglik, obs_index=model.obs_return_indices)
    write_csv(
        out / "loo.csv",
        ["obs_index", "elpd_i", "pareto_k"],
        zip(loo.obs_index, loo.elpd_i, loo.pareto_k),
    )

    metadata = {
        "command": "fit",
        "version": __version__,
        "config": {
            "model": cfg.model,
            "data_path": cfg.data_path,
            "output_dir": cfg.output_dir,
            "seed": cfg.seed,
            "sampler": cfg.sampler,
            "priors": cfg.priors,
            "p_star": cfg.p_star,
        },
        "priors_resolved": {n: model.priors[n].to_config() for n in model.param_names},
        "data": {
            "path": cfg.data_path,
            "n_rows": len(data),
            "sha256": _data_digest(data),
            "obs_return_indices": [int(i) for i in model.obs_return_indices],
        },
        "model": {"name": model.name, "dimension": model.dimension},
        "chains": [
            {
                "chain": o.chain_id,
                "seed_entropy": o.seed_entropy,
                "failed": o.failed,
                "error": o.error,
                "step_size": None if o.failed else float(o.step_size),
                "inv_mass": None if o.failed else [float(v) for v in o.inv_mass],
                "divergences": o.n_divergent,
                "treedepth_saturations": o.n_depth_saturated,
            }
            for o in outputs
        ],
        "report": {
            "divergences": report.divergences,
            "treedepth_saturations": report.treedepth_saturations,
            "multimodal": report.multimodal,
            "multimodal_params": report.multimodal_params,
            "chains_failed": report.chains_failed,
        },
        "loo": {
            "elpd": loo.elpd,
            "se": loo.se,
            "n_high_k": loo.n_high_k,
            "n_draws": loo.n_draws,
            "notes": notes,
        },
    }
    (out / "metadata.json").write_text(json.dumps(metadata, indent=2) + "\n", encoding="utf-8")
    print(summary_text(rows, report))
    print(f"\nelpd_loo = {loo.elpd:.2f} +/- {loo.se:.2f} (high pareto-k: {loo.n_high_k})")
    print(f"outputs written to {out}")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(cfg)
    if "params" not in cfg.sim or "T" not in cfg.sim:
        raise ConfigError("simulate needs sim.params and sim.T in the config")
    params = {k: float(v) for k, v in cfg.sim["params"].items()}
    T = int(cfg.sim["T"])
    init = float(cfg.sim.get("init_log_price", 0.0))
    rng = np.random.default_rng(cfg.seed)
    if cfg.model == "garch":
        result = garch_mod.simulate(params, T, rng, init)
    elif cfg.model == "vs":
        result = vs_mod.simulate(params, T, rng, init)
    elif cfg.model == "fw-fixed":
        result = fw_mod.simulate(params, T, rng, init, mode="fixed", p_star=cfg.p_star)
    else:
        result = fw_mod.simulate(params, T, rng, init, mode="rw")

    write_price_csv(out / "simulated.csv", result.series)
    dates = default_dates(T)
    state_names = sorted(result.states)
    write_csv(
        out / "simulated_states.csv",
        ["date", *state_names],
        ([dates[t], *(result.states[k][t] for k in state_names)] for t in range(T)),
    )
    metadata = {
        "command": "simulate",
        "version": __version__,
        "model": cfg.model,
        "seed": cfg.seed,
        "params": params,
        "T": T,
        "init_log_price": init,
        "p_star": cfg.p_star,
    }
    (out / "metadata.json").write_text(json.dumps(metadata, indent=2) + "\n", encoding="utf-8")
    print(f"simulated {T} prices -> {out / 'simulated.csv'}")
    return 0


def _load_fit_dir(fit_dir: Path):
    meta_path = fit_dir / "metadata.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"{fit_dir}: not a fit directory (no metadata.json)")
    metadata = json.loads(meta_path.read_text(encoding="utf-8"))
    if metadata.get("command") != "fit":
        raise ValueError(f"{fit_dir}: metadata is not from a fit run")
    return metadata


def _read_draws_by_chain(fit_dir: Path) -> tuple[list[str], dict[int, np.ndarray]]:
    import csv as _csv

    with open(fit_dir / "draws.csv", newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        names = header[2:]
        per_chain: dict[int, list[list[float]]] = {}
        for row in reader:
            per_chain.setdefault(int(row[0]), []).append([float(v) for v in row[2:]])
    return names, {cid: np.asarray(rows) for cid, rows in per_chain.items()}


def cmd_diagnose(args) -> int:
    fit_dir = Path(args.fit_dir)
    metadata = _load_fit_dir(fit_dir)
    names, per_chain = _read_draws_by_chain(fit_dir)

    rows = []
    multimodal_params = []
    from .diagnostics import _multimodal_signature, ess as _ess  # reuse internals

    total = sum(d.shape[0] for d in per_chain.values())
    for j, name in enumerate(names):
        series = [d[:, j] for d in per_chain.values()]
        pooled = np.concatenate(series)
        try:
            rhat = split_rhat(series)
        except ValueError:
            rhat = np.nan
        try:
            e = min(_ess(series), 1.5 * total)
        except ValueError:
            e = np.nan
        if _multimodal_signature(series):
            multimodal_params.append(name)
        q2, q50, q97 = np.percentile(pooled, [2.5, 50.0, 97.5])
        rows.append(SummaryRow(name, float(pooled.mean()), float(pooled.std(ddof=1)),
                               float(q2), float(q50), float(q97), rhat, e))

    chains_failed = sum(1 for c in metadata["chains"] if c["failed"])
    report = RunReport(
        n_chains=len(metadata["chains"]),
        chains_failed=chains_failed,
        divergences=sum(c["divergences"] for c in metadata["chains"]),
        treedepth_saturations=sum(c["treedepth_saturations"] for c in metadata["chains"]),
        multimodal=bool(multimodal_params) and len(per_chain) >= 2,
        multimodal_params=multimodal_params,
    )
    print(summary_text(rows, report))
    return 1 if (chains_failed > 0 or report.multimodal) else 0


def _loo_from_fit_dir(fit_dir: Path) -> tuple[LooResult, dict]:
    import csv as _csv

    metadata = _load_fit_dir(fit_dir)
    obs, elpd_i, k = [], [], []
    with open(fit_dir / "loo.csv", newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        next(reader)
        for row in reader:
            obs.append(int(row[0]))
            elpd_i.append(float(row[1]))
            k.append(float(row[2]))
    elpd_i = np.asarray(elpd_i)
    k = np.asarray(k)
    result = LooResult(
        elpd=float(elpd_i.sum()),
        se=float(np.sqrt(elpd_i.size * np.var(elpd_i, ddof=1))),
        elpd_i=elpd_i,
        pareto_k=k,
        n_high_k=int(np.sum(k > 0.7)),
        n_draws=int(metadata["loo"]["n_draws"]),
        obs_index=np.asarray(obs, dtype=int),
    )
    return result, metadata


def cmd_compare(args) -> int:
    fits = []
    for d in args.fit_dirs:
        loo, metadata = _loo_from_fit_dir(Path(d))
        fits.append({"dir": d, "loo": loo, "meta": metadata,
                     "model": metadata["model"]["name"]})
    digests = {f["meta"]["data"]["sha256"] for f in fits}
    if len(digests) > 1:
        print("error: observation mismatch: fits use different data", file=sys.stderr)
        return 2

    common = fits[0]["loo"].obs_index
    for f in fits[1:]:
        common = np.intersect1d(common, f["loo"].obs_index)
    for f in fits:
        f["loo_common"] = restrict_to(f["loo"], common)
    fits.sort(key=lambda f: (-f["loo_common"].elpd, f["model"]))

    best = fits[0]["loo_common"]
    table = []
    for f in fits:
        lc = f["loo_common"]
        diff, diff_se = (0.0, 0.0) if lc is best else pairwise_difference(best, f["loo_common"])
        table.append([f["model"], lc.elpd, lc.se, -diff, diff_se, lc.n_high_k, f["dir"]])

    header = f"{'model':<10}{'elpd':>12}{'se':>9}{'d_elpd':>10}{'d_se':>8}{'high_k':>8}  dir"
    print(f"model comparison over {common.size} shared observations")
    print(header)
    print("-" * len(header))
    for row in table:
        print(f"{row[0]:<10}{row[1]:>12.2f}{row[2]:>9.2f}{row[3]:>10.2f}{row[4]:>8.2f}{row[5]:>8d}  {row[6]}")
    notes = {n for f in fits for n in f["meta"]["loo"].get("notes", [])}
    for note in sorted(notes):
        print(f"note: {note}")
    if args.out:
        write_csv(
            args.out,
            ["model", "elpd", "se", "elpd_diff", "diff_se", "n_high_k", "fit_dir"],
            table,
        )
    return 0


def cmd_forecast(args) -> int:
    fit_dir = Path(args.fit_dir)
    metadata = _load_fit_dir(fit_dir)
    cfg = parse_config(metadata["config"], source=str(fit_dir / "metadata.json"))
    model, _ = _build_model_from_config(cfg)
    names, per_chain = _read_draws_by_chain(fit_dir)

    class _Shim:
        failed = False

        def __init__(self, unconstrained):
            self.unconstrained_draws = unconstrained

    chains = []
    for cid in sorted(per_chain):
        draws = per_chain[cid]
        un = np.vstack([model.unconstrain_params(draws[i]) for i in range(draws.shape[0])])
        chains.append(_Shim(un))

    seed = args.seed if args.seed is not None else cfg.seed + 10_000
    rng = np.random.default_rng(seed)
    fan = posterior_predictive(model, chains, args.horizon, rng)

    def fan_rows():
        for series_name, matrix in (
            ("return", fan.returns), ("price", fan.prices), ("sigma", fan.sigma),
        ):
            for step in range(fan.horizon):
                for qi, level in enumerate(fan.levels):
                    yield [step + 1, series_name, level, matrix[step, qi]]

    write_csv(fit_dir / "fan.csv", ["step", "series", "quantile", "value"], fan_rows())

    bands = smoothed_states(model, chains)
    dates = model.data.dates or default_dates(len(model.data))

    def band_rows():
        for state, b in bands.bands.items():
            for t in range(len(model.data)):
                yield [dates[t], state, b["mean"][t], b["lower"][t], b["upper"][t]]

    write_csv(fit_dir / "bands.csv", ["date", "state", "mean", "lower", "upper"], band_rows())
    print(f"forecast fan ({args.horizon} steps) -> {fit_dir / 'fan.csv'}")
    print(f"smoothed state bands -> {fit_dir / 'bands.csv'}")
    return 0


def cmd_prior_check(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(cfg)
    model, _ = _build_model_from_config(cfg)
    rng = np.random.default_rng(cfg.seed)
    sims = prior_predictive(model, args.n, args.T, rng)

    def series_rows():
        for s, sim in enumerate(sims):
            lp = sim.series.log_prices
            yield [s, 1, lp[0], 0.0]
            for t in range(1, args.T):
                yield [s, t + 1, lp[t], lp[t] - lp[t - 1]]

    write_csv(out / "prior_series.csv", ["series", "step", "log_price", "return"], series_rows())
    write_csv(
        out / "prior_params.csv",
        ["series", "parameter", "value"],
        ([s, name, sim.params[name]] for s, sim in enumerate(sims) for name in model.param_names),
    )
    print(f"{args.n} prior predictive series of length {args.T} -> {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="volbayes",
        description="Bayesian estimation of volatility models on price series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model to data")
    p_fit.add_argument("--config", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_sim = sub.add_parser("simulate", help="simulate a series at fixed parameters")
    p_sim.add_argument("--config", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_diag = sub.add_parser("diagnose", help="convergence report for a fit directory")
    p_diag.add_argument("fit_dir")
    p_diag.set_defaults(func=cmd_diagnose)

    p_cmp = sub.add_parser("compare", help="LOO comparison of two or more fits")
    p_cmp.add_argument("fit_dirs", nargs="+")
    p_cmp.add_argument("--out", default=None, help="optional CSV output path")
    p_cmp.set_defaults(func=cmd_compare)

    p_fc = sub.add_parser("forecast", help="posterior predictive fan from a fit")
    p_fc.add_argument("fit_dir")
    p_fc.add_argument("--horizon", type=int, required=True)
    p_fc.add_argument("--seed", type=int, default=None)
    p_fc.set_defaults(func=cmd_forecast)

    p_pc = sub.add_parser("prior-check", help="series simulated at prior draws")
    p_pc.add_argument("--config", required=True)
    p_pc.add_argument("--n", type=int, default=12)
    p_pc.add_argument("--T", type=int, default=1500)
    p_pc.set_defaults(func=cmd_prior_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IngestError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
