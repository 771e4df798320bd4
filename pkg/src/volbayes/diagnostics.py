"""Convergence diagnostics: split R-hat, autocorrelation-based effective
sample size, and run-level summaries including a multimodality signature
(chains individually stationary yet mutually inconsistent).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: ESS is capped at this multiple of the total draw count in summaries.
ESS_CAP_FACTOR = 1.5

RHAT_WARN = 1.05
MULTIMODAL_CROSS_RHAT = 1.1
MULTIMODAL_SELF_RHAT = 1.05


@dataclass
class SummaryRow:
    name: str
    mean: float
    sd: float
    q2_5: float
    q50: float
    q97_5: float
    rhat: float
    ess: float


@dataclass
class RunReport:
    n_chains: int
    chains_failed: int
    divergences: int
    treedepth_saturations: int
    multimodal: bool
    multimodal_params: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _as_chain_list(chains) -> list[np.ndarray]:
    if isinstance(chains, np.ndarray) and chains.ndim == 2:
        return [chains[i] for i in range(chains.shape[0])]
    return [np.asarray(c, dtype=float) for c in chains]


def _split_halves(chains: list[np.ndarray]) -> list[np.ndarray]:
    halves = []
    for c in chains:
        n = c.size
        half = n // 2
        halves.append(c[:half])
        halves.append(c[n - half :])
    return halves


def split_rhat(chains) -> float:
    """Potential scale reduction on half-chains.

    Accepts one or more chains; a single chain is split in half. Returns
    NaN when the within-chain variance vanishes (undefined, not 1.0).
    """
    halves = _split_halves(_as_chain_list(chains))
    n = min(h.size for h in halves)
    if n < 4:
        raise ValueError("need at least 4 draws per half-chain")
    arr = np.stack([h[:n] for h in halves])
    within = float(np.mean(np.var(arr, axis=1, ddof=1)))
    between = n * float(np.var(np.mean(arr, axis=1), ddof=1))
    if not np.isfinite(within) or within <= 0.0:
        return np.nan
    var_plus = within * (n - 1) / n + between / n
    return float(np.sqrt(var_plus / within))


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance (normalized by n) via FFT."""
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n].real / n
    return acov


def ess(chains) -> float:
    """Effective sample size from combined autocorrelations, truncated by
    the initial-monotone-positive-pair rule. May exceed the number of
    draws for antithetic chains; NaN when the variance degenerates."""
    chain_list = _as_chain_list(chains)
    n = min(c.size for c in chain_list)
    if n < 8:
        raise ValueError("need at least 8 draws per chain")
    arr = np.stack([c[:n] for c in chain_list])
    m = arr.shape[0]

    acov = np.stack([_autocovariance(arr[i]) for i in range(m)])
    chain_var = acov[:, 0] * n / (n - 1.0)
    within = float(np.mean(chain_var))
    if not np.isfinite(within) or within <= 0.0:
        return np.nan
    if m > 1:
        between = n * float(np.var(np.mean(arr, axis=1), ddof=1))
        var_plus = within * (n - 1) / n + between / n
    else:
        var_plus = within * (n - 1) / n
    mean_acov = np.mean(acov, axis=0)
    rho = 1.0 - (within - mean_acov) / var_plus
    rho[0] = 1.0

    # Geyer: sum consecutive pairs, stop at the first negative pair, then
    # enforce monotone decrease.
    max_pairs = n // 2
    pair_sums = []
    for k in range(max_pairs):
        p = rho[2 * k] + (rho[2 * k + 1] if 2 * k + 1 < n else 0.0)
        if k > 0 and p < 0.0:
            break
        pair_sums.append(p)
    ps = np.minimum.accumulate(np.maximum(pair_sums, 0.0))
    tau = float(-rho[0] + 2.0 * np.sum(ps))
    # antithetic chains can drive tau to ~0 or below; ESS is then allowed
    # to exceed the draw count (summaries cap it)
    tau = max(tau, 1e-6)
    return float(m * n / tau)


def _multimodal_signature(per_chain: list[np.ndarray]) -> bool:
    """Cross-chain disagreement while each chain alone looks stationary."""
    if len(per_chain) < 2:
        return False
    try:
        cross = split_rhat(per_chain)
        selfs = [split_rhat([c]) for c in per_chain]
    except ValueError:
        return False
    if not np.isfinite(cross):
        return False
    return cross > MULTIMODAL_CROSS_RHAT and all(
        np.isfinite(s) and s < MULTIMODAL_SELF_RHAT for s in selfs
    )


def summarize(chain_outputs) -> tuple[list[SummaryRow], RunReport]:
    """Per-parameter summary rows plus a run-level report.

    Failed chains are excluded from statistics but counted in the report.
    """
    ok = [c for c in chain_outputs if not c.failed]
    if not ok:
        raise ValueError("no successful chains to summarize")
    names = ok[0].param_names
    total_draws = sum(c.draws.shape[0] for c in ok)

    rows = []
    multimodal_params = []
    for j, name in enumerate(names):
        per_chain = [c.draws[:, j] for c in ok]
        pooled = np.concatenate(per_chain)
        try:
            rhat = split_rhat(per_chain)
        except ValueError:
            rhat = np.nan
        try:
            e = ess(per_chain)
        except ValueError:
            e = np.nan
        if np.isfinite(e):
            e = min(e, ESS_CAP_FACTOR * total_draws)
        if _multimodal_signature(per_chain):
            multimodal_params.append(name)
        q2, q50, q97 = np.percentile(pooled, [2.5, 50.0, 97.5])
        rows.append(
            SummaryRow(
                name=name,
                mean=float(np.mean(pooled)),
                sd=float(np.std(pooled, ddof=1)),
                q2_5=float(q2),
                q50=float(q50),
                q97_5=float(q97),
                rhat=rhat,
                ess=e,
            )
        )

    notes = []
    if len(ok) < 2:
        notes.append("single chain: multimodality flag cannot be assessed")
    for c in chain_outputs:
        if c.failed:
            notes.append(f"chain {c.chain_id} failed: {c.error}")
    report = RunReport(
        n_chains=len(chain_outputs),
        chains_failed=sum(c.failed for c in chain_outputs),
        divergences=sum(c.n_divergent for c in ok),
        treedepth_saturations=sum(c.n_depth_saturated for c in ok),
        multimodal=bool(multimodal_params) and len(ok) >= 2,
        multimodal_params=multimodal_params,
        notes=notes,
    )
    return rows, report


def summary_text(rows: list[SummaryRow], report: RunReport | None = None) -> str:
    """Aligned plain-text rendering of summary rows."""
    header = f"{'parameter':<16}{'mean':>12}{'sd':>12}{'2.5%':>12}{'50%':>12}{'97.5%':>12}{'rhat':>8}{'ess':>9}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.name:<16}{r.mean:>12.5g}{r.sd:>12.5g}{r.q2_5:>12.5g}"
            f"{r.q50:>12.5g}{r.q97_5:>12.5g}{r.rhat:>8.3f}{r.ess:>9.0f}"
        )
    if report is not None:
        lines.append("")
        lines.append(
            f"chains: {report.n_chains} ({report.chains_failed} failed)  "
            f"divergences: {report.divergences}  "
            f"treedepth saturations: {report.treedepth_saturations}  "
            f"multimodal: {'YES (' + ', '.join(report.multimodal_params) + ')' if report.multimodal else 'no'}"
        )
        for note in report.notes:
            lines.append(f"note: {note}")
    return "\n".join(lines)
