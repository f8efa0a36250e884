"""Risk measures: loss distributions, VaR bisection and classical oracles.

The quantum pipeline estimates cumulative probabilities P[L <= x]; the
functions here wrap it with a discrete bisection over the loss support and
pair it with two classical references, an exact enumeration of the
discretized model and a seeded Monte Carlo simulation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .estimation import IqaeConfig, exact_amplitude, iqae
from .gaussian import conditional_pd
from .objective import build_a_circuit
from .uncertainty import Portfolio


@dataclass(eq=False)
class LossDistribution:
    """Distribution of total loss over a finite, sorted, unique support."""

    losses: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        self.losses = np.asarray(self.losses, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.losses.ndim != 1 or self.losses.shape != self.probs.shape or self.losses.size == 0:
            raise ValueError("losses and probs must be matching nonempty vectors")
        if np.any(np.diff(self.losses) <= 0):
            raise ValueError("loss support must be strictly increasing")
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be nonnegative and sum to 1")

    @classmethod
    def from_pairs(cls, losses, probs) -> "LossDistribution":
        """Aggregate duplicate losses and sort the support."""
        losses = np.asarray(losses, dtype=float)
        probs = np.asarray(probs, dtype=float)
        support, inverse_idx = np.unique(losses, return_inverse=True)
        agg = np.zeros(support.size)
        np.add.at(agg, inverse_idx, probs)
        return cls(support, agg)

    def cdf(self, x: float) -> float:
        return float(self.probs[self.losses <= x].sum())

    def quantile(self, alpha: float) -> float:
        """Smallest support value whose cdf reaches alpha."""
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        cum = np.cumsum(self.probs)
        idx = int(np.searchsorted(cum, alpha - 1e-12))
        return float(self.losses[min(idx, self.losses.size - 1)])


@dataclass
class BisectionProbe:
    """One cdf evaluation inside the bisection; CI fields are iqae-only."""

    threshold: float
    estimate: float
    ci_low: float | None = None
    ci_high: float | None = None
    rounds: int | None = None
    quantum_samples: int | None = None
    converged: bool | None = None


@dataclass
class VarResult:
    """Value at risk with its audit trail."""

    var: float
    alpha: float
    cdf_at_var: float
    expected_loss: float
    economic_capital: float
    bisection_trace: list[BisectionProbe] = field(default_factory=list)


class EstimationFailure(RuntimeError):
    """Bisection could not locate the quantile; carries the partial trace."""

    def __init__(self, message: str, trace: list[BisectionProbe]):
        super().__init__(message)
        self.trace = trace


def exact_loss_distribution(portfolio: Portfolio, grids,
                            max_enumeration: int = 10_000_000) -> LossDistribution:
    """Exact loss distribution of the discretized model by full enumeration.

    Every joint factor realization is weighted by its grid probability and
    every default pattern by the product of conditional (non)default
    probabilities.  This is the verification oracle for the exact encoding.
    """
    grids = list(grids)
    if len(grids) != portfolio.r:
        raise ValueError(f"expected {portfolio.r} grids, got {len(grids)}")
    k = portfolio.k
    m = int(np.prod([g.size for g in grids]))
    if m * 2 ** k > max_enumeration:
        raise ValueError(
            f"enumeration would visit {m * 2 ** k} states, over the budget of {max_enumeration}")

    idx = np.array(list(itertools.product(*(range(g.size) for g in grids))))
    z_joint = np.column_stack([g.values[idx[:, c]] for c, g in enumerate(grids)])
    pz = np.prod([g.probs[idx[:, c]] for c, g in enumerate(grids)], axis=0)

    pd = np.column_stack([
        conditional_pd(a.p0, a.rho, a.alphas, z_joint) for a in portfolio.assets])

    lgds = np.asarray(portfolio.lgds)
    losses = []
    probs = []
    for pattern in itertools.product((0, 1), repeat=k):
        bits = np.asarray(pattern)
        weight = np.prod(np.where(bits, pd, 1.0 - pd), axis=1)
        losses.append(float(lgds @ bits))
        probs.append(float(pz @ weight))
    return LossDistribution.from_pairs(losses, probs)


def monte_carlo_distribution(portfolio: Portfolio, grids, n_paths: int,
                             seed: int) -> LossDistribution:
    """Empirical loss distribution from seeded simulation of the same model.

    Draw order is fixed (factor indices first, factor by factor, then default
    uniforms), so results are reproducible for a given seed.
    """
    grids = list(grids)
    if len(grids) != portfolio.r:
        raise ValueError(f"expected {portfolio.r} grids, got {len(grids)}")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    rng = np.random.default_rng(seed)
    z = np.empty((n_paths, len(grids)))
    for col, grid in enumerate(grids):
        idx = rng.choice(grid.size, size=n_paths, p=grid.probs / grid.probs.sum())
        z[:, col] = grid.values[idx]
    pd = np.column_stack([
        conditional_pd(a.p0, a.rho, a.alphas, z) for a in portfolio.assets])
    defaults = rng.random((n_paths, portfolio.k)) < pd
    losses = defaults @ np.asarray(portfolio.lgds)
    support, counts = np.unique(losses, return_counts=True)
    return LossDistribution(support, counts / n_paths)


def expected_loss(dist: LossDistribution) -> float:
    """Mean of the loss distribution."""
    return float(dist.losses @ dist.probs)


def economic_capital(var: float, el: float) -> float:
    """Capital held against unexpected loss: VaR minus expected loss."""
    return var - el


def total_variation_distance(a: LossDistribution, b: LossDistribution) -> float:
    """TV distance between two loss distributions on the union support."""
    support = np.union1d(a.losses, b.losses)
    pa = np.zeros(support.size)
    pb = np.zeros(support.size)
    pa[np.searchsorted(support, a.losses)] = a.probs
    pb[np.searchsorted(support, b.losses)] = b.probs
    return 0.5 * float(np.abs(pa - pb).sum())


def _probe_cdf(portfolio, grids, x, estimator, *, variant, encoding, mode) -> BisectionProbe:
    if isinstance(estimator, LossDistribution):
        return BisectionProbe(threshold=x, estimate=estimator.cdf(x))
    if isinstance(estimator, IqaeConfig):
        a_circ = build_a_circuit(portfolio, grids, x, variant=variant,
                                 encoding=encoding, mode=mode)
        res = iqae(a_circ, estimator)
        return BisectionProbe(threshold=x, estimate=res.estimate,
                              ci_low=res.ci_low, ci_high=res.ci_high,
                              rounds=res.rounds, quantum_samples=res.quantum_samples,
                              converged=res.converged)
    if estimator == "exact":
        a_circ = build_a_circuit(portfolio, grids, x, variant=variant,
                                 encoding=encoding, mode=mode)
        return BisectionProbe(threshold=x, estimate=exact_amplitude(a_circ))
    raise ValueError(f"unknown estimator {estimator!r}")


def cdf_point(portfolio: Portfolio, grids, x: float, estimator="exact", *,
              variant: str = "multi_rotation", encoding: str = "exact",
              mode: str = "s_free") -> float:
    """P[L <= x] through the chosen path.

    estimator is "exact" (statevector readout of the quantum pipeline),
    "classical" (exact enumeration), a LossDistribution (lookup), or an
    IqaeConfig (quantum pipeline sampled through iterative QAE).
    """
    if estimator == "classical":
        estimator = exact_loss_distribution(portfolio, grids)
    return _probe_cdf(portfolio, grids, x, estimator,
                      variant=variant, encoding=encoding, mode=mode).estimate


def var_bisection(portfolio: Portfolio, grids, alpha: float, estimator="exact", *,
                  variant: str = "multi_rotation", encoding: str = "exact",
                  mode: str = "s_free") -> VarResult:
    """Smallest loss-support value whose estimated cdf reaches alpha.

    The search runs over the discrete loss support (the cdf is a step
    function with at most 2**K jumps), probing thresholds by bisection.  For
    the iqae estimator each probe gets its own derived seed so repeated
    probes are independent but the whole search stays deterministic.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    dist = exact_loss_distribution(portfolio, grids)
    el = expected_loss(dist)
    if estimator == "classical":
        estimator = dist

    trace: list[BisectionProbe] = []

    def probe(x):
        est = estimator
        if isinstance(est, IqaeConfig):
            est = replace(est, seed=est.seed + len(trace))
        record = _probe_cdf(portfolio, grids, x, est,
                            variant=variant, encoding=encoding, mode=mode)
        trace.append(record)
        return record

    support = dist.losses
    lo, hi = 0, support.size - 1
    best: BisectionProbe | None = None
    while lo <= hi:
        mid = (lo + hi) // 2
        record = probe(float(support[mid]))
        if record.estimate >= alpha:
            best = record
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        raise EstimationFailure(
            f"no support point reached the target level {alpha}; "
            f"largest estimate {max(p.estimate for p in trace)}", trace)
    return VarResult(
        var=best.threshold,
        alpha=alpha,
        cdf_at_var=best.estimate,
        expected_loss=el,
        economic_capital=economic_capital(best.threshold, el),
        bisection_trace=trace,
    )
