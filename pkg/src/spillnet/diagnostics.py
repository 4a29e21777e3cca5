"""Per-series descriptive statistics and hypothesis tests.

Covers the usual pre-estimation battery for each node series: moments,
Jarque-Bera normality, Ljung-Box serial correlation (20 lags), Engle's
ARCH LM heteroskedasticity test (20 lags), augmented Dickey-Fuller unit
root (intercept only, AIC lag selection up to 10), plus a Welch two-sample
t convenience for comparing sub-periods.

Kurtosis is reported non-excess (normal = 3). All tests are pure functions
of their input vector and are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import SeriesTooShort, SingularRegression
from .panel import SeriesPanel

DEFAULT_LAGS = 20
ADF_MAX_LAG = 10


@dataclass(frozen=True)
class SeriesDiagnostics:
    """One node's row of the descriptive-statistics table."""

    mean: float
    std_dev: float
    skewness: float
    kurtosis: float  # non-excess: normal = 3
    jb_stat: float
    jb_p: float
    lb_stat: float
    lb_p: float
    arch_lm_stat: float
    arch_lm_p: float
    adf_stat: float
    adf_p: float
    adf_lag: int


def _moments(x: np.ndarray):
    x = np.asarray(x, dtype=float)
    m = x.mean()
    d = x - m
    m2 = np.mean(d**2)
    if m2 <= 0:
        raise SingularRegression("constant series has no moments to test")
    skew = np.mean(d**3) / m2**1.5
    kurt = np.mean(d**4) / m2**2
    return m, m2, skew, kurt


def jarque_bera(series: np.ndarray) -> tuple[float, float]:
    """JB statistic n/6 * (S^2 + (K-3)^2/4) and its chi-square(2) p-value."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 8:
        raise SeriesTooShort(f"Jarque-Bera needs n >= 8, got {n}")
    _, _, skew, kurt = _moments(x)
    stat = n / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return float(stat), float(stats.chi2.sf(stat, 2))


def _autocorrelations(x: np.ndarray, lags: int) -> np.ndarray:
    d = x - x.mean()
    denom = np.dot(d, d)
    if denom <= 0:
        raise SingularRegression("constant series has no autocorrelation")
    return np.array([np.dot(d[k:], d[:-k]) / denom for k in range(1, lags + 1)])


def ljung_box(series: np.ndarray, lags: int = DEFAULT_LAGS) -> tuple[float, float]:
    """Q = n(n+2) * sum_k rho_k^2/(n-k); p-value from chi-square(lags)."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n <= lags:
        raise SeriesTooShort(f"Ljung-Box with {lags} lags needs n > {lags}, got {n}")
    rho = _autocorrelations(x, lags)
    k = np.arange(1, lags + 1)
    stat = n * (n + 2.0) * np.sum(rho**2 / (n - k))
    return float(stat), float(stats.chi2.sf(stat, lags))


def arch_lm(series: np.ndarray, lags: int = DEFAULT_LAGS) -> tuple[float, float]:
    """Engle's LM test: nobs * R^2 from regressing squared demeaned values
    on their own ``lags`` lags; p-value from chi-square(lags)."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n <= 2 * lags:
        raise SeriesTooShort(f"ARCH LM with {lags} lags needs n > {2 * lags}, got {n}")
    u = (x - x.mean()) ** 2
    y = u[lags:]
    design = np.column_stack(
        [np.ones(n - lags)] + [u[lags - k : n - k] for k in range(1, lags + 1)]
    )
    gram = design.T @ design
    if np.linalg.matrix_rank(gram) < design.shape[1]:
        raise SingularRegression("ARCH LM auxiliary regression is rank deficient")
    beta = np.linalg.solve(gram, design.T @ y)
    resid = y - design @ beta
    tss = np.sum((y - y.mean()) ** 2)
    if tss <= 0:
        raise SingularRegression("squared series is constant")
    r2 = 1.0 - np.sum(resid**2) / tss
    stat = y.size * r2
    return float(stat), float(stats.chi2.sf(stat, lags))


def _adf(series: np.ndarray) -> tuple[float, float, int]:
    from statsmodels.tsa.stattools import adfuller

    x = np.asarray(series, dtype=float)
    if x.size < 50:
        raise SeriesTooShort(f"ADF needs n >= 50, got {x.size}")
    stat, p, used_lag, *_ = adfuller(x, maxlag=ADF_MAX_LAG, regression="c", autolag="AIC")
    return float(stat), float(p), int(used_lag)


def adf_test(series: np.ndarray) -> tuple[float, float]:
    """ADF unit-root test, intercept only, AIC lag selection over 0..10.

    p-values come from the MacKinnon response-surface approximation.
    """
    stat, p, _ = _adf(series)
    return stat, p


def two_sample_t(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Welch's unequal-variance t-test with Welch-Satterthwaite df."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 3 or b.size < 3:
        raise SeriesTooShort("Welch t-test needs at least 3 observations per sample")
    res = stats.ttest_ind(a, b, equal_var=False)
    return float(res.statistic), float(res.pvalue)


def describe_series(series: np.ndarray, lags: int = DEFAULT_LAGS) -> SeriesDiagnostics:
    x = np.asarray(series, dtype=float)
    mean, m2, skew, kurt = _moments(x)
    std = float(np.std(x, ddof=1))
    jb_stat, jb_p = jarque_bera(x)
    lb_stat, lb_p = ljung_box(x, lags)
    arch_stat, arch_p = arch_lm(x, lags)
    adf_stat, adf_p, adf_lag = _adf(x)
    return SeriesDiagnostics(
        mean=float(mean),
        std_dev=std,
        skewness=float(skew),
        kurtosis=float(kurt),
        jb_stat=jb_stat,
        jb_p=jb_p,
        lb_stat=lb_stat,
        lb_p=lb_p,
        arch_lm_stat=arch_stat,
        arch_lm_p=arch_p,
        adf_stat=adf_stat,
        adf_p=adf_p,
        adf_lag=adf_lag,
    )


def describe_panel(panel: SeriesPanel, lags: int = DEFAULT_LAGS):
    """Diagnostics for every node column, in panel node order."""
    return {
        node: describe_series(panel.values[:, j], lags)
        for j, node in enumerate(panel.node_ids)
    }
