"""Bivariate GARCH-BEKK(1,1) estimation and the directional Wald test.

Model, for a T x 2 series matrix x with columns (series 1, series 2):

    mean:      x_t = mu + Phi x_{t-1} + eps_t
    variance:  H_t = C'C + A' eps_{t-1} eps_{t-1}' A + B' H_{t-1} B

with C lower triangular. The Gaussian log-likelihood over the n = T-1
usable residuals is

    L = -n ln(2 pi) - 1/2 * sum_t [ ln|H_t| + eps_t' H_t^{-1} eps_t ]

H_1 is the sample covariance of the mean-equation residuals. In this
orientation the (1,2) entries a12 and b12 carry shock and volatility
transmission from series 1 to series 2 (the (2,2) element of A'ee'A
contains a12^2 e1^2), and |a12| + |b12| is the directional spillover
weight; a21/b21 carry the reverse direction.

Estimation is joint maximum likelihood over all 17 parameters with a BFGS
search on the per-observation (mean) negative log-likelihood, central
finite-difference gradients, and one perturbed restart on failure. The
likelihood is invariant under a global sign flip of A, a global sign flip
of B, and sign flips of individual rows of C; reported fits are
canonicalized to c11, c22 > 0 and a11, b11 >= 0 so results are
reproducible. Standard errors come from the inverse of the numerically
differentiated observed information of the unscaled likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numba
import numpy as np
from scipy import stats
from scipy.optimize import minimize

from .errors import DegenerateSeries, SeriesTooShort, Untestable

PARAM_NAMES = (
    "mu1", "mu2",
    "phi11", "phi12", "phi21", "phi22",
    "c11", "c21", "c22",
    "a11", "a12", "a21", "a22",
    "b11", "b12", "b21", "b22",
)
N_PARAMS = len(PARAM_NAMES)
# theta indices of the off-diagonal pair transmitting column f -> column t
_SPILL_IDX = {(0, 1): (10, 14), (1, 0): (11, 15)}

_LOG_2PI = math.log(2.0 * math.pi)
_BIG = 1e10  # optimizer-side stand-in for the +inf infeasibility sentinel
MIN_OBS = 30


@dataclass(frozen=True)
class BekkParams:
    """Parameter set: mean drift/VAR plus the C, A, B variance matrices."""

    mu: np.ndarray   # (2,)
    phi: np.ndarray  # (2,2)
    c: np.ndarray    # (2,2) lower triangular
    a: np.ndarray    # (2,2)
    b: np.ndarray    # (2,2)

    def __post_init__(self):
        for name in ("mu", "phi", "c", "a", "b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if self.mu.shape != (2,):
            raise ValueError(f"mu must have shape (2,), got {self.mu.shape}")
        for name in ("phi", "c", "a", "b"):
            if getattr(self, name).shape != (2, 2):
                raise ValueError(f"{name} must be 2x2")
        if self.c[0, 1] != 0.0:
            raise ValueError("c must be lower triangular (c[0,1] == 0)")

    def to_theta(self) -> np.ndarray:
        return np.concatenate(
            [
                self.mu,
                self.phi.ravel(),
                [self.c[0, 0], self.c[1, 0], self.c[1, 1]],
                self.a.ravel(),
                self.b.ravel(),
            ]
        )

    @classmethod
    def from_theta(cls, theta: np.ndarray) -> "BekkParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (N_PARAMS,):
            raise ValueError(f"theta must have length {N_PARAMS}")
        c = np.array([[theta[6], 0.0], [theta[7], theta[8]]])
        return cls(
            mu=theta[0:2].copy(),
            phi=theta[2:6].reshape(2, 2).copy(),
            c=c,
            a=theta[9:13].reshape(2, 2).copy(),
            b=theta[13:17].reshape(2, 2).copy(),
        )

    @property
    def spectral_radius(self) -> float:
        m = np.kron(self.a, self.a) + np.kron(self.b, self.b)
        return float(np.abs(np.linalg.eigvals(m)).max())

    @property
    def stationary(self) -> bool:
        return self.spectral_radius < 1.0

    def canonicalized(self) -> "BekkParams":
        """Fix the sign conventions: c11, c22 > 0 and a11, b11 >= 0.

        Uses only likelihood-preserving transforms (row flips of C, global
        flips of A and of B).
        """
        c = self.c.copy()
        if c[0, 0] < 0:
            c[0, :] = -c[0, :]
        if c[1, 1] < 0:
            c[1, :] = -c[1, :]
        a = -self.a if self.a[0, 0] < 0 else self.a.copy()
        b = -self.b if self.b[0, 0] < 0 else self.b.copy()
        return BekkParams(self.mu.copy(), self.phi.copy(), c, a, b)


def unconditional_covariance(params: BekkParams) -> np.ndarray:
    """Stationary covariance solving H = C'C + A'HA + B'HB (column-major vec)."""
    a, b, c = params.a, params.b, params.c
    m = np.kron(a.T, a.T) + np.kron(b.T, b.T)
    cc = c.T @ c
    vec = np.linalg.solve(np.eye(4) - m, cc.flatten(order="F"))
    h = vec.reshape(2, 2, order="F")
    return (h + h.T) / 2.0


@numba.njit(cache=True, nogil=True)
def _neg_loglik_kernel(theta, x):  # pragma: no cover - exercised via wrappers
    T = x.shape[0]
    n = T - 1
    mu1, mu2 = theta[0], theta[1]
    p11, p12, p21, p22 = theta[2], theta[3], theta[4], theta[5]
    c11, c21, c22 = theta[6], theta[7], theta[8]
    a11, a12, a21, a22 = theta[9], theta[10], theta[11], theta[12]
    b11, b12, b21, b22 = theta[13], theta[14], theta[15], theta[16]

    e1 = np.empty(n)
    e2 = np.empty(n)
    s11 = 0.0
    s12 = 0.0
    s22 = 0.0
    for s in range(n):
        r1 = x[s + 1, 0] - mu1 - p11 * x[s, 0] - p12 * x[s, 1]
        r2 = x[s + 1, 1] - mu2 - p21 * x[s, 0] - p22 * x[s, 1]
        e1[s] = r1
        e2[s] = r2
        s11 += r1 * r1
        s12 += r1 * r2
        s22 += r2 * r2
    h11 = s11 / n
    h12 = s12 / n
    h22 = s22 / n

    # C'C for lower-triangular C
    cc11 = c11 * c11 + c21 * c21
    cc12 = c21 * c22
    cc22 = c22 * c22

    ll = 0.0
    for s in range(n):
        if s > 0:
            u1 = e1[s - 1]
            u2 = e2[s - 1]
            v1 = a11 * u1 + a21 * u2
            v2 = a12 * u1 + a22 * u2
            m11 = h11 * b11 + h12 * b21
            m12 = h11 * b12 + h12 * b22
            m21 = h12 * b11 + h22 * b21
            m22 = h12 * b12 + h22 * b22
            nh11 = cc11 + v1 * v1 + b11 * m11 + b21 * m21
            nh12 = cc12 + v1 * v2 + b11 * m12 + b21 * m22
            nh22 = cc22 + v2 * v2 + b12 * m12 + b22 * m22
            h11, h12, h22 = nh11, nh12, nh22
        det = h11 * h22 - h12 * h12
        if not (det > 0.0 and h11 > 0.0) or not np.isfinite(det):
            return np.inf
        q = (h22 * e1[s] * e1[s] - 2.0 * h12 * e1[s] * e2[s] + h11 * e2[s] * e2[s]) / det
        ll += -_LOG_2PI - 0.5 * (np.log(det) + q)
    return -ll


@numba.njit(cache=True, nogil=True)
def _path_kernel(theta, x):  # pragma: no cover - exercised via wrappers
    """Residuals and the H_t path (h11, h12, h22 per step), no PD check."""
    T = x.shape[0]
    n = T - 1
    mu1, mu2 = theta[0], theta[1]
    p11, p12, p21, p22 = theta[2], theta[3], theta[4], theta[5]
    c11, c21, c22 = theta[6], theta[7], theta[8]
    a11, a12, a21, a22 = theta[9], theta[10], theta[11], theta[12]
    b11, b12, b21, b22 = theta[13], theta[14], theta[15], theta[16]

    e = np.empty((n, 2))
    h = np.empty((n, 3))
    for s in range(n):
        e[s, 0] = x[s + 1, 0] - mu1 - p11 * x[s, 0] - p12 * x[s, 1]
        e[s, 1] = x[s + 1, 1] - mu2 - p21 * x[s, 0] - p22 * x[s, 1]
    h[0, 0] = np.sum(e[:, 0] * e[:, 0]) / n
    h[0, 1] = np.sum(e[:, 0] * e[:, 1]) / n
    h[0, 2] = np.sum(e[:, 1] * e[:, 1]) / n

    cc11 = c11 * c11 + c21 * c21
    cc12 = c21 * c22
    cc22 = c22 * c22
    for s in range(1, n):
        u1 = e[s - 1, 0]
        u2 = e[s - 1, 1]
        v1 = a11 * u1 + a21 * u2
        v2 = a12 * u1 + a22 * u2
        h11 = h[s - 1, 0]
        h12 = h[s - 1, 1]
        h22 = h[s - 1, 2]
        m11 = h11 * b11 + h12 * b21
        m12 = h11 * b12 + h12 * b22
        m21 = h12 * b11 + h22 * b21
        m22 = h12 * b12 + h22 * b22
        h[s, 0] = cc11 + v1 * v1 + b11 * m11 + b21 * m21
        h[s, 1] = cc12 + v1 * v2 + b11 * m12 + b21 * m22
        h[s, 2] = cc22 + v2 * v2 + b12 * m12 + b22 * m22
    return e, h


def _check_input(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError(f"expected a T x 2 matrix, got shape {x.shape}")
    return x


def neg_loglik(params: BekkParams, x: np.ndarray) -> float:
    """Negative Gaussian log-likelihood; +inf when some H_t is not SPD."""
    x = _check_input(x)
    if x.shape[0] < 3:
        raise SeriesTooShort("need at least 3 rows for two usable residuals")
    return float(_neg_loglik_kernel(params.to_theta(), x))


def conditional_covariances(params: BekkParams, x: np.ndarray):
    """Mean-equation residuals (n x 2) and conditional covariances (n x 2 x 2)."""
    x = _check_input(x)
    e, hflat = _path_kernel(params.to_theta(), x)
    n = e.shape[0]
    h = np.empty((n, 2, 2))
    h[:, 0, 0] = hflat[:, 0]
    h[:, 0, 1] = hflat[:, 1]
    h[:, 1, 0] = hflat[:, 1]
    h[:, 1, 1] = hflat[:, 2]
    return e, h


# --- numerical differentiation --------------------------------------------

def _grad_fd(f, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient, falling back to one-sided at cliffs."""
    g = np.empty_like(x)
    f0 = None
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        xm = x.copy()
        xm[i] -= h
        fp = f(xp)
        fm = f(xm)
        if np.isfinite(fp) and fp < _BIG and np.isfinite(fm) and fm < _BIG:
            g[i] = (fp - fm) / (2.0 * h)
        else:
            if f0 is None:
                f0 = f(x)
            if np.isfinite(fp) and fp < _BIG:
                g[i] = (fp - f0) / h
            elif np.isfinite(fm) and fm < _BIG:
                g[i] = (f0 - fm) / h
            else:
                g[i] = 0.0
    return g


def _hessian_fd(f, x: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
    """Central-difference Hessian with per-coordinate steps."""
    k = x.size
    steps = rel_step * np.maximum(1.0, np.abs(x))
    hess = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        fpp = f(x + ei)
        fmm = f(x - ei)
        hess[i, i] = (fpp - 2.0 * f0 + fmm) / steps[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = steps[j]
            fa = f(x + ei + ej)
            fb = f(x + ei - ej)
            fc = f(x - ei + ej)
            fd = f(x - ei - ej)
            hess[i, j] = hess[j, i] = (fa - fb - fc + fd) / (4.0 * steps[i] * steps[j])
    return hess


# --- fitting ---------------------------------------------------------------

@dataclass(frozen=True)
class FitOptions:
    """Optimizer settings for fit_bekk; defaults match the documented contract."""

    max_iter: int = 500
    grad_tol: float = 1e-6       # on the max-norm gradient of the mean likelihood
    grad_step: float = 1e-6      # relative central-difference step for the search
    se_step: float = 1e-5        # relative step for the observed information
    restart_seed: int = 0
    compute_cov: bool = True
    robust_se: bool = False      # sandwich covariance instead of inverse information


@dataclass(frozen=True)
class BekkFit:
    params: BekkParams
    loglik: float
    param_cov: np.ndarray | None  # 17 x 17, None when the information is singular
    converged: bool
    iterations: int
    gradient_norm: float
    stationary: bool
    spectral_radius: float

    def std_errors(self) -> np.ndarray | None:
        if self.param_cov is None:
            return None
        return np.sqrt(np.diag(self.param_cov))


@dataclass(frozen=True)
class SpilloverTest:
    """Directional spillover test result; weight = |a_off| + |b_off|.

    status is "ok" for a completed test, "untestable" when the coefficient
    covariance was unavailable or singular, "nonconverged" when the
    underlying fit did not converge. Only "ok" rows carry a usable p-value.
    """

    from_node: str
    to_node: str
    wald_stat: float
    p_value: float
    weight: float
    status: str = "ok"


def lower_c_factor(target: np.ndarray) -> tuple[float, float, float]:
    """(c11, c21, c22) of the lower-triangular C with C'C = target (2x2 SPD).

    Closed form: c22 = sqrt(t22), c21 = t12 / c22, c11 = sqrt(t11 - c21^2).
    Falls back to a diagonal factor when the target is not positive definite.
    """
    t11, t12, t22 = target[0, 0], target[0, 1], target[1, 1]
    if t22 > 0:
        c22 = math.sqrt(t22)
        c21 = t12 / c22
        rem = t11 - c21 * c21
        if rem > 0:
            return math.sqrt(rem), c21, c22
    return (
        math.sqrt(max(t11, 1e-12)),
        0.0,
        math.sqrt(max(t22, 1e-12)),
    )


def initial_theta(x: np.ndarray) -> np.ndarray:
    """Equation-by-equation OLS for the mean, variance targeting for C,
    A = 0.15 I and B = 0.8 I."""
    x = _check_input(x)
    design = np.column_stack([np.ones(x.shape[0] - 1), x[:-1, 0], x[:-1, 1]])
    resid = np.empty((x.shape[0] - 1, 2))
    mean_coef = np.empty((2, 3))
    for k in range(2):
        coef, *_ = np.linalg.lstsq(design, x[1:, k], rcond=None)
        mean_coef[k] = coef
        resid[:, k] = x[1:, k] - design @ coef
    sigma = resid.T @ resid / resid.shape[0]
    a0, b0 = 0.15, 0.8
    c11, c21, c22 = lower_c_factor((1.0 - a0**2 - b0**2) * sigma)
    theta = np.zeros(N_PARAMS)
    theta[0:2] = mean_coef[:, 0]
    theta[2:6] = mean_coef[:, 1:].ravel()
    theta[6] = c11
    theta[7] = c21
    theta[8] = c22
    theta[9] = theta[12] = a0
    theta[13] = theta[16] = b0
    return theta


def _search(x, theta0, opts):
    n = x.shape[0] - 1

    def objective(theta):
        val = _neg_loglik_kernel(theta, x) / n
        return val if np.isfinite(val) else _BIG

    def gradient(theta):
        return _grad_fd(objective, theta, opts.grad_step)

    res = minimize(
        objective,
        theta0,
        method="BFGS",
        jac=gradient,
        options={"gtol": opts.grad_tol, "maxiter": opts.max_iter},
    )
    gnorm = float(np.max(np.abs(res.jac)))
    return res.x, float(res.fun), gnorm, int(res.nit)


def _scores_fd(x, theta, rel_step):
    """Per-observation score matrix (n x 17) by central differences."""
    n = x.shape[0] - 1

    def contributions(th):
        e, hflat = _path_kernel(th, x)
        det = hflat[:, 0] * hflat[:, 2] - hflat[:, 1] ** 2
        q = (
            hflat[:, 2] * e[:, 0] ** 2
            - 2.0 * hflat[:, 1] * e[:, 0] * e[:, 1]
            + hflat[:, 0] * e[:, 1] ** 2
        ) / det
        return _LOG_2PI + 0.5 * (np.log(det) + q)

    scores = np.empty((n, theta.size))
    for i in range(theta.size):
        h = rel_step * max(1.0, abs(theta[i]))
        tp = theta.copy()
        tp[i] += h
        tm = theta.copy()
        tm[i] -= h
        scores[:, i] = (contributions(tp) - contributions(tm)) / (2.0 * h)
    return scores


def _covariance(x, theta, opts):
    def unscaled(th):
        return _neg_loglik_kernel(th, x)

    hess = _hessian_fd(unscaled, theta, opts.se_step)
    if not np.all(np.isfinite(hess)):
        return None
    hess = (hess + hess.T) / 2.0
    try:
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        return None
    if opts.robust_se:
        scores = _scores_fd(x, theta, opts.se_step)
        opg = scores.T @ scores
        cov = cov @ opg @ cov
    cov = (cov + cov.T) / 2.0
    if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) <= 0):
        return None
    return cov


def fit_bekk(x: np.ndarray, opts: FitOptions = FitOptions()) -> BekkFit:
    """Joint MLE of the 17 BEKK parameters.

    Deterministic for fixed inputs and options (the restart perturbation is
    seeded), so concurrent fits are reproducible regardless of scheduling.
    Non-convergence is reported through ``converged``, not raised.
    """
    x = _check_input(x)
    if x.shape[0] < MIN_OBS:
        raise SeriesTooShort(f"BEKK estimation needs T >= {MIN_OBS}, got {x.shape[0]}")
    for k in range(2):
        if np.ptp(x[:, k]) == 0.0:
            raise DegenerateSeries(f"column {k} is constant")

    theta0 = initial_theta(x)
    n = x.shape[0] - 1
    if not np.isfinite(_neg_loglik_kernel(theta0, x)):
        theta0[9] = theta0[12] = 0.05
        theta0[13] = theta0[16] = 0.5

    theta, fun, gnorm, nit = _search(x, theta0, opts)
    converged = gnorm < opts.grad_tol and fun < _BIG
    if not converged:
        rng = np.random.default_rng(opts.restart_seed)
        jitter = theta0 * (0.1 * rng.standard_normal(N_PARAMS)) + 0.01 * rng.standard_normal(N_PARAMS)
        theta2, fun2, gnorm2, nit2 = _search(x, theta0 + jitter, opts)
        if (gnorm2 < opts.grad_tol and fun2 <= fun + 1e-8) or fun2 < fun:
            theta, fun, gnorm, nit = theta2, fun2, gnorm2, nit + nit2
            converged = gnorm < opts.grad_tol and fun < _BIG
        else:
            nit += nit2

    params = BekkParams.from_theta(theta).canonicalized()
    theta = params.to_theta()
    loglik = -float(_neg_loglik_kernel(theta, x))
    cov = _covariance(x, theta, opts) if opts.compute_cov else None
    radius = params.spectral_radius
    return BekkFit(
        params=params,
        loglik=loglik,
        param_cov=cov,
        converged=bool(converged),
        iterations=nit,
        gradient_norm=gnorm,
        stationary=radius < 1.0,
        spectral_radius=radius,
    )


def wald_spillover(
    fit: BekkFit,
    direction: tuple[int, int] = (0, 1),
    labels: tuple[str, str] = ("0", "1"),
) -> SpilloverTest:
    """Joint Wald test of H0: a_off = 0 and b_off = 0 for one direction.

    ``direction`` is (from_column, to_column); (0, 1) tests a12/b12 and
    (1, 0) tests a21/b21. Raises Untestable when the coefficient covariance
    is missing or the 2x2 sub-block is singular.
    """
    if direction not in _SPILL_IDX:
        raise ValueError("direction must be (0, 1) or (1, 0)")
    ia, ib = _SPILL_IDX[direction]
    theta = fit.params.to_theta()
    r = theta[[ia, ib]]
    weight = float(np.abs(r).sum())
    from_node, to_node = labels[direction[0]], labels[direction[1]]
    if r[0] == 0.0 and r[1] == 0.0:
        return SpilloverTest(from_node, to_node, 0.0, 1.0, 0.0)
    if fit.param_cov is None:
        raise Untestable("coefficient covariance unavailable (singular information)")
    sub = fit.param_cov[np.ix_([ia, ib], [ia, ib])]
    det = sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]
    if not np.all(np.isfinite(sub)) or det <= 0.0:
        raise Untestable("singular covariance sub-block for the tested pair")
    stat = float(r @ np.linalg.solve(sub, r))
    if not np.isfinite(stat) or stat < 0.0:
        raise Untestable(f"Wald statistic ill-defined (got {stat})")
    p = float(stats.chi2.sf(stat, 2))
    return SpilloverTest(from_node, to_node, stat, p, weight)


def directional_tests(
    fit: BekkFit,
    labels: tuple[str, str],
    require_convergence: bool = True,
) -> list[SpilloverTest]:
    """Both directional tests for one fitted pair.

    Non-converged fits (when ``require_convergence``) and Untestable
    directions are returned as flagged rows rather than raised, so callers
    can keep going and treat them as no-edge with a warning.
    """
    out = []
    for direction in ((0, 1), (1, 0)):
        ia, ib = _SPILL_IDX[direction]
        theta = fit.params.to_theta()
        weight = float(abs(theta[ia]) + abs(theta[ib]))
        frm, to = labels[direction[0]], labels[direction[1]]
        if require_convergence and not fit.converged:
            out.append(SpilloverTest(frm, to, math.nan, math.nan, weight, "nonconverged"))
            continue
        try:
            out.append(wald_spillover(fit, direction, labels))
        except Untestable:
            out.append(SpilloverTest(frm, to, math.nan, math.nan, weight, "untestable"))
    return out
