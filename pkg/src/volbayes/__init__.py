"""Bayesian estimation of agent-based and econometric volatility models.

Fits GARCH(1,1) and two agent-based volatility families to log price
series with a gradient-based no-U-turn sampler, and provides convergence
diagnostics, importance-sampled leave-one-out model comparison, and
prior/posterior predictive simulation.
"""

__version__ = "0.1.0"
