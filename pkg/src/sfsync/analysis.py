"""Per-phase statistics: degree-distribution fits, centrality correlations and
the scale-free fluctuation verdict.

A phase is *fluctuated* when the degree/betweenness correlation drops below
0.80 (in scale-free networks the two are highly correlated), or when a normal
distribution describes the degree sample better than a power law does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from sfsync.centrality import MEASURES, CentralityTable, centrality_table
from sfsync.errors import (DegenerateTail, InsufficientData, LengthMismatch, MissingInputs,
                           ZeroVariance)
from sfsync.graph import Graph, isolated_nodes

DEG_BET_THRESHOLD = 0.80
MIN_FIT_SAMPLES = 10

# short keys used in JSON reports: d=degree, p=pagerank, b=betweenness, c=closeness
PAIR_KEYS = {"db": (0, 2), "dp": (0, 1), "dc": (0, 3), "pb": (1, 2), "pc": (1, 3), "bc": (2, 3)}

SUSTAINED = "scale_free_sustained"
FLUCTUATED = "fluctuated"
REASON_DEG_BET = "deg_bet_below_threshold"
REASON_DEG_BET_UNDEFINED = "deg_bet_undefined"
REASON_NORMAL = "normal_fits_better"
REASON_NO_POWER_LAW = "power_law_unavailable"


def degree_histogram(g: Graph) -> dict[int, int]:
    """``{degree: count}`` over the undirected projection, ascending by degree."""
    vals, counts = np.unique(g.projected_degrees(), return_counts=True)
    return {int(k): int(c) for k, c in zip(vals, counts)}


# -- power law -------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawFit:
    alpha_hat: float
    k_min: int
    ks_stat: float
    n_tail: int
    shift: float = 0.0

    def ccdf(self, k) -> np.ndarray:
        """Fitted ``P(K >= k)`` for ``k >= k_min``."""
        k = np.asarray(k, dtype=float)
        return ((k - self.shift) / (self.k_min - self.shift)) ** (1.0 - self.alpha_hat)


def _power_law_at(sorted_tail: np.ndarray, k_min: int, shift: float = 0.0):
    n = len(sorted_tail)
    x_min = k_min - shift
    log_sum = float(np.log(sorted_tail / x_min).sum())
    alpha = 1.0 + n / log_sum
    vals, first = np.unique(sorted_tail, return_index=True)
    emp = 1.0 - first / n
    model = ((vals - shift) / x_min) ** (1.0 - alpha)
    return alpha, float(np.abs(emp - model).max())


def fit_power_law(degrees, k_min: int | None = None,
                  min_tail: int = MIN_FIT_SAMPLES, shift: float = 0.0) -> PowerLawFit:
    """Continuous-approximation MLE ``alpha = 1 + n / sum ln(k_i / (k_min - shift))``.

    ``shift = 0.5`` is the usual discreteness correction; the default of 0
    is the plain continuous estimator, which reproduces hand-evaluated values
    such as ``1 + 6 / (6 ln 2)`` for ``{1, 1, 1, 2, 4, 8}`` at ``k_min = 1``.

    Without ``k_min`` every observed value leaving at least ``min_tail``
    samples is tried and the one with the smallest KS distance between the
    empirical and fitted tail CCDF wins (ties go to the smaller cutoff).
    Zero degrees are ignored.
    """
    if not (0.0 <= shift < 1.0):
        raise ValueError(f"shift must lie in [0, 1), got {shift}")
    d = np.sort(np.asarray(degrees, dtype=float))
    d = d[d >= 1]
    if k_min is not None:
        tail = d[d >= k_min]
        if len(tail) < 2:
            raise InsufficientData(f"need at least 2 values >= k_min={k_min}, got {len(tail)}")
        if tail[0] == tail[-1] and tail[0] == k_min:
            raise DegenerateTail("all tail values equal k_min")
        alpha, ks = _power_law_at(tail, k_min, shift)
        return PowerLawFit(alpha, int(k_min), ks, len(tail), shift)
    if len(d) < min_tail:
        raise InsufficientData(f"need at least {min_tail} positive values, got {len(d)}")
    if d[0] == d[-1]:
        raise DegenerateTail("all values are equal")
    best = None
    for km in np.unique(d):
        tail = d[np.searchsorted(d, km):]
        if len(tail) < min_tail:
            break
        if tail[-1] == km:
            continue
        alpha, ks = _power_law_at(tail, km, shift)
        if best is None or ks < best.ks_stat:
            best = PowerLawFit(alpha, int(km), ks, len(tail), shift)
    if best is None:
        raise DegenerateTail("no cutoff leaves a non-degenerate tail")
    return best


# -- normal ----------------------------------------------------------------

@dataclass(frozen=True)
class NormalFit:
    mu: float
    sigma: float
    ks_stat: float
    degenerate: bool = False

    def cdf(self, k) -> np.ndarray:
        """Continuity-corrected ``P(K <= k)`` for integer ``k``."""
        k = np.asarray(k, dtype=float)
        if self.degenerate:
            return (k >= self.mu).astype(float)
        return stats.norm.cdf(k + 0.5, self.mu, self.sigma)


def fit_normal(degrees) -> NormalFit:
    """Moment fit; KS is evaluated at the observed integer values against the
    continuity-corrected normal CDF, the same footing as the power-law KS."""
    d = np.sort(np.asarray(degrees, dtype=float))
    if len(d) < MIN_FIT_SAMPLES:
        raise InsufficientData(f"need at least {MIN_FIT_SAMPLES} values, got {len(d)}")
    mu = float(d.mean())
    sigma = float(d.std(ddof=1))
    if sigma == 0.0:
        return NormalFit(mu, 0.0, 0.0, degenerate=True)
    vals, last = np.unique(d[::-1], return_index=True)
    emp = (len(d) - last) / len(d)  # P(K <= k) at each distinct value
    ks = float(np.abs(emp - stats.norm.cdf(vals + 0.5, mu, sigma)).max())
    return NormalFit(mu, sigma, ks)


# -- correlation -----------------------------------------------------------

def pearson_correlation(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    if len(x) < 3:
        raise LengthMismatch("need at least 3 paired values")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman_correlation(x, y) -> float:
    return pearson_correlation(stats.rankdata(x), stats.rankdata(y))


_METHODS = {"pearson": pearson_correlation, "spearman": spearman_correlation}


@dataclass
class CorrelationMatrix:
    values: np.ndarray
    labels: tuple = MEASURES
    ci_low: np.ndarray | None = None
    ci_high: np.ndarray | None = None
    method: str = "pearson"

    def get(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])

    def pairs(self) -> dict[str, float]:
        return {k: float(self.values[i, j]) for k, (i, j) in PAIR_KEYS.items()}

    def max_pair(self):
        """``(label_a, label_b, value)`` of the largest off-diagonal entry."""
        best = None
        n = len(self.labels)
        for i in range(n):
            for j in range(i + 1, n):
                v = self.values[i, j]
                if np.isfinite(v) and (best is None or v > best[2]):
                    best = (self.labels[i], self.labels[j], float(v))
        return best


def _corr_block(columns, fn, on_zero_variance):
    k = columns.shape[1]
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            try:
                r = fn(columns[:, i], columns[:, j])
            except ZeroVariance:
                if on_zero_variance == "raise":
                    raise
                r = float("nan")
            out[i, j] = out[j, i] = r
    return out


def _batched_corr(samples, method):
    """Correlation matrices of a ``(B, n, k)`` stack; NaN where a column is constant."""
    if method == "spearman":
        samples = stats.rankdata(samples, axis=1)
    dev = samples - samples.mean(axis=1, keepdims=True)
    cov = np.einsum("bni,bnj->bij", dev, dev)
    var = np.einsum("bii->bi", cov).copy()
    var[var == 0.0] = np.nan
    scale = np.sqrt(var)
    out = np.clip(cov / scale[:, :, None] / scale[:, None, :], -1.0, 1.0)
    out[:, np.arange(out.shape[1]), np.arange(out.shape[1])] = 1.0
    return out


def correlation_matrix(table, bootstrap_samples: int = 0, rng=None, method: str = "pearson",
                       ci_level: float = 0.95, on_zero_variance: str = "raise") -> CorrelationMatrix:
    """4x4 correlation matrix of the centrality columns.

    With ``bootstrap_samples > 0`` nodes are resampled with replacement and a
    percentile confidence interval is attached to every entry.
    """
    if isinstance(table, CentralityTable):
        cols = table.as_matrix()
    else:
        cols = np.asarray(table, dtype=float)
    if cols.shape[0] < 3:
        raise InsufficientData("need at least 3 nodes")
    fn = _METHODS[method]
    values = _corr_block(cols, fn, on_zero_variance)
    cm = CorrelationMatrix(values, method=method)
    if bootstrap_samples > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        n = cols.shape[0]
        samples = cols[rng.integers(0, n, size=(bootstrap_samples, n))]
        boot = _batched_corr(samples, method)
        tail = (1.0 - ci_level) / 2.0 * 100.0
        with np.errstate(all="ignore"):
            cm.ci_low = np.nanpercentile(boot, tail, axis=0)
            cm.ci_high = np.nanpercentile(boot, 100.0 - tail, axis=0)
    return cm


# -- classification --------------------------------------------------------

@dataclass
class Verdict:
    verdict: str
    reasons: list[str]
    max_pair: tuple | None


def classify_phase(corr, power_fit: PowerLawFit | None = None,
                   normal_fit: NormalFit | None = None,
                   threshold: float = DEG_BET_THRESHOLD,
                   power_law_error: str | None = None) -> Verdict:
    """Fluctuated iff deg-bet correlation < ``threshold`` or the normal fit's KS
    is strictly below the power-law KS.

    ``corr`` may be a :class:`CorrelationMatrix` or a plain 4x4 array in
    (degree, pagerank, betweenness, closeness) order.  The distribution test
    is skipped when fits are not supplied; ``power_law_error`` records that a
    power-law fit was attempted and failed, which also counts as fluctuation.
    """
    if corr is None:
        raise MissingInputs("a correlation matrix is required")
    if not isinstance(corr, CorrelationMatrix):
        arr = np.asarray(corr, dtype=float)
        if arr.shape != (4, 4):
            raise MissingInputs(f"expected a 4x4 matrix, got shape {arr.shape}")
        corr = CorrelationMatrix(arr)
    reasons = []
    db = corr.get("degree", "betweenness")
    if not np.isfinite(db):
        reasons.append(REASON_DEG_BET_UNDEFINED)
    elif db < threshold:
        reasons.append(REASON_DEG_BET)
    if power_law_error is not None and normal_fit is not None:
        reasons.append(REASON_NO_POWER_LAW)
    elif power_fit is not None and normal_fit is not None:
        if normal_fit.ks_stat < power_fit.ks_stat:
            reasons.append(REASON_NORMAL)
    return Verdict(FLUCTUATED if reasons else SUSTAINED, reasons, corr.max_pair())


# -- phase report ----------------------------------------------------------

@dataclass
class PhaseReport:
    phase: int
    n: int
    m: int
    isolated_before_repair: int
    power_fit: PowerLawFit | None
    normal_fit: NormalFit | None
    corr: CorrelationMatrix
    verdict: str
    reasons: list[str]
    max_pair: tuple | None
    table: CentralityTable | None = field(default=None, repr=False)
    histogram: dict | None = field(default=None, repr=False)

    @property
    def deg_bet(self) -> float:
        return self.corr.get("degree", "betweenness")

    def to_json(self) -> dict:
        pf, nf = self.power_fit, self.normal_fit
        out = {
            "phase": self.phase,
            "n": self.n,
            "m": self.m,
            "isolated_before_repair": self.isolated_before_repair,
            "alpha_hat": _num(pf.alpha_hat) if pf else None,
            "kmin": pf.k_min if pf else None,
            "ks_pl": _num(pf.ks_stat) if pf else None,
            "mu": _num(nf.mu) if nf else None,
            "sigma": _num(nf.sigma) if nf else None,
            "ks_norm": _num(nf.ks_stat) if nf else None,
            "corr": {k: _num(v) for k, v in self.corr.pairs().items()},
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "max_pair": list(self.max_pair) if self.max_pair else None,
        }
        if self.corr.ci_low is not None:
            out["ci"] = {k: [_num(self.corr.ci_low[i, j]), _num(self.corr.ci_high[i, j])]
                         for k, (i, j) in PAIR_KEYS.items()}
        return out


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def analyze_graph(g: Graph, phase: int = 0, isolated_before_repair: int | None = None,
                  damping: float = 0.85, bootstrap_samples: int = 0, rng=None,
                  method: str = "pearson", threshold: float = DEG_BET_THRESHOLD) -> PhaseReport:
    """Full per-phase analysis of one (already repaired, if applicable) graph."""
    table = centrality_table(g, damping=damping)
    degrees = g.projected_degrees()
    pl_error = None
    try:
        pf = fit_power_law(degrees)
    except (InsufficientData, DegenerateTail) as exc:
        pf, pl_error = None, type(exc).__name__
    try:
        nf = fit_normal(degrees)
    except InsufficientData:
        nf = None
    corr = correlation_matrix(table, bootstrap_samples, rng=rng, method=method,
                              on_zero_variance="nan")
    v = classify_phase(corr, pf, nf, threshold, power_law_error=pl_error)
    if isolated_before_repair is None:
        isolated_before_repair = len(isolated_nodes(g))
    return PhaseReport(phase, g.n_nodes, g.n_edges, isolated_before_repair, pf, nf, corr,
                       v.verdict, v.reasons, v.max_pair, table, degree_histogram(g))
