"""Sparse Bayesian learning for the jump vector.

Hierarchical model  y = Theta g + n,  n ~ N(0, I/beta),  g_i ~ N(0, 1/a_i),
with flat hyper-priors.  Hyper-parameters are learned by the fixed-point
evidence updates a_i <- gamma_i / m_i^2 and
beta <- (count - sum gamma) / ||y - Theta m||^2, pruning components whose
precision diverges.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular

from .forward_model import ForwardModel

__version__ = "1.0"

log = logging.getLogger(__name__)

LOG2PI = math.log(2 * math.pi)


class IllConditionedPosterior(LinAlgError):
    def __init__(self, message, cond=math.inf):
        super().__init__(message)
        self.cond = cond


@dataclass
class SblConfig:
    """Settings for the evidence iterations.

    ``beta_init`` is a number, ``"fixed:<value>"`` (no beta updates), or
    ``None`` for 1/var(y).  ``count_scale`` multiplies len(y) in the beta update;
    0.5 counts complex observations of a realified model.
    """

    a_init: float | str = 1.0
    beta_init: float | str | None = None
    a_max: float = 1e12
    a_floor: float = 1e-12
    beta_cap: float = 1e12
    tol: float = 1e-6
    max_iter: int = 2000
    estimate_beta: bool = True
    count_scale: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (self.a_max > 0 and self.tol > 0):
            raise ValueError("a_max and tol must be positive")
        if isinstance(self.beta_init, str):
            if not self.beta_init.startswith("fixed:"):
                raise ValueError("beta_init string must look like 'fixed:<value>'")
            self.beta_init = float(self.beta_init.split(":", 1)[1])
            self.estimate_beta = False

    def initial_a(self, n: int) -> np.ndarray:
        if self.a_init == "random":
            return np.random.default_rng(self.seed).uniform(0.5, 2.0, n)
        a0 = float(self.a_init)
        if a0 <= 0:
            raise ValueError("a_init must be positive")
        return np.full(n, a0)

    def initial_beta(self, y: np.ndarray) -> float:
        if self.beta_init is not None:
            return float(self.beta_init)
        v = float(np.var(y))
        return min(1.0 / v, self.beta_cap) if v > 0 else self.beta_cap


def posterior(A, y, a, beta, method: str = "auto"):
    """Posterior mean and covariance of g.

    Sigma = (beta A^T A + diag(a))^{-1}, m = beta Sigma A^T y.  ``method`` is
    ``cholesky``, ``woodbury`` or ``auto`` (Woodbury when columns exceed rows).
    """
    A = np.asarray(A, float)
    a = np.asarray(a, float)
    if np.any(a <= 0) or beta <= 0:
        raise ValueError("a and beta must be positive")
    rows, n = A.shape
    if method == "auto":
        method = "woodbury" if n > rows else "cholesky"
    if method == "cholesky":
        H = beta * (A.T @ A)
        H[np.diag_indices(n)] += a
        try:
            c = cho_factor(H, lower=True)
        except LinAlgError as e:
            raise IllConditionedPosterior("posterior precision is not positive definite",
                                          float(np.linalg.cond(H))) from e
        Sigma = cho_solve(c, np.eye(n))
        m = cho_solve(c, beta * (A.T @ y))
    elif method == "woodbury":
        ainv = 1.0 / a
        AAi = A * ainv
        C = AAi @ A.T
        C[np.diag_indices(rows)] += 1.0 / beta
        try:
            c = cho_factor(C, lower=True)
        except LinAlgError as e:
            raise IllConditionedPosterior("C is not positive definite", float(np.linalg.cond(C))) from e
        Sigma = np.diag(ainv) - AAi.T @ cho_solve(c, AAi)
        # m = A^-1 Theta^T C^-1 y
        m = AAi.T @ cho_solve(c, y)
    else:
        raise ValueError(f"unknown method {method!r}")
    Sigma = (Sigma + Sigma.T) / 2
    return m, Sigma


def posterior_noiseless(A, y, a):
    """Limit of the posterior as the noise variance goes to zero."""
    A = np.asarray(A, float)
    a = np.asarray(a, float)
    if np.any(a <= 0):
        raise ValueError("a must be positive")
    s = 1.0 / np.sqrt(a)
    P = A * s
    Pp = np.linalg.pinv(P)
    m = s * (Pp @ y)
    n = A.shape[1]
    Sigma = s[:, None] * (np.eye(n) - Pp @ P) * s[None, :]
    return m, (Sigma + Sigma.T) / 2


def marginal_loglik(A, y, a, beta, count: int | None = None) -> float:
    """log N(y | 0, C) with C = I/beta + A diag(1/a) A^T.

    Evaluated through the Cholesky factor of C when it is the smaller matrix,
    otherwise through the equivalent (columns x columns) determinant lemma.
    """
    A = np.asarray(A, float)
    y = np.asarray(y, float)
    a = np.asarray(a, float)
    rows, n = A.shape
    count = rows if count is None else count
    if rows <= n:
        C = (A / a) @ A.T
        C[np.diag_indices(rows)] += 1.0 / beta
        try:
            Lc = np.linalg.cholesky(C)
        except LinAlgError as e:
            raise IllConditionedPosterior("C is not positive definite") from e
        z = solve_triangular(Lc, y, lower=True)
        logdet = 2 * np.log(np.diag(Lc)).sum()
        quad = float(z @ z)
    else:
        H = beta * (A.T @ A)
        H[np.diag_indices(n)] += a
        try:
            Lh = np.linalg.cholesky(H)
        except LinAlgError as e:
            raise IllConditionedPosterior("posterior precision is not positive definite") from e
        logdet = 2 * np.log(np.diag(Lh)).sum() - np.log(a).sum() - rows * math.log(beta)
        w = solve_triangular(Lh, A.T @ y, lower=True)
        quad = beta * float(y @ y) - beta**2 * float(w @ w)
    return -0.5 * (count * LOG2PI + logdet + quad)


@dataclass
class SblState:
    a: np.ndarray
    beta: float
    m: np.ndarray
    Sigma: np.ndarray
    gamma_vec: np.ndarray
    loglik: float
    active: np.ndarray

    def full_mean(self) -> np.ndarray:
        out = np.zeros(len(self.a))
        out[self.active] = self.m
        return out

    def full_std(self) -> np.ndarray:
        out = np.zeros(len(self.a))
        out[self.active] = np.sqrt(np.maximum(np.diag(self.Sigma), 0.0))
        return out


def init_state(A, y, cfg: SblConfig) -> SblState:
    n = A.shape[1]
    a = cfg.initial_a(n)
    beta = cfg.initial_beta(y)
    active = np.arange(n)
    m, Sigma = posterior(A, y, a, beta)
    return SblState(a, beta, m, Sigma, 1 - a * np.diag(Sigma), marginal_loglik(A, y, a, beta), active)


def em_update(state: SblState, A, y, cfg: SblConfig) -> tuple[SblState, float]:
    """One round of hyper-parameter updates followed by a fresh posterior.

    Returns the new state and max |delta log a| over the indices that were active.
    """
    act = state.active
    Aa = A[:, act]
    a_act = state.a[act]
    m, Sigma = state.m, state.Sigma
    gam = 1.0 - a_act * np.diag(Sigma)
    with np.errstate(divide="ignore"):
        a_new = np.where(m != 0, gam / np.where(m != 0, m * m, 1.0), np.inf)
    a_new = np.where(np.isfinite(a_new), np.maximum(a_new, cfg.a_floor), np.inf)
    beta = state.beta
    if cfg.estimate_beta:
        res = y - Aa @ m
        rr = float(res @ res)
        count = cfg.count_scale * len(y)
        beta = cfg.beta_cap if rr == 0 else min((count - gam.sum()) / rr, cfg.beta_cap)
        if beta <= 0:
            beta = state.beta
    finite = np.isfinite(a_new)
    dloga = np.where(finite, np.abs(np.log(np.where(finite, a_new, 1.0)) - np.log(a_act)), np.inf)
    max_d = float(dloga.max(initial=0.0))
    keep = finite & (a_new <= cfg.a_max)
    a_full = state.a.copy()
    a_full[act] = np.where(finite, a_new, np.inf)
    new_act = act[keep]
    if len(new_act):
        m2, S2 = posterior(A[:, new_act], y, a_full[new_act], beta)
        ll = marginal_loglik(A[:, new_act], y, a_full[new_act], beta)
    else:
        m2, S2 = np.zeros(0), np.zeros((0, 0))
        ll = -0.5 * (len(y) * LOG2PI - len(y) * math.log(beta) + beta * float(y @ y))
    gam2 = 1.0 - a_full[new_act] * np.diag(S2)
    return SblState(a_full, beta, m2, S2, gam2, ll, new_act), max_d


@dataclass
class SblResult:
    m: np.ndarray
    std: np.ndarray
    trace: list
    converged: bool
    state: SblState

    def write_trace(self, path, header_lines=()):
        write_trace_csv(self.trace, path, header_lines)


def write_trace_csv(trace, path, header_lines=()):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["iter", "loglik", "active_count", "max_dloga"])
        for row in trace:
            w.writerow([int(row[0]), repr(float(row[1])), int(row[2]), repr(float(row[3]))])


def sbl_run(A, y, cfg: SblConfig | None = None) -> SblResult:
    cfg = cfg or SblConfig()
    A = np.asarray(A, float)
    y = np.asarray(y, float)
    n = A.shape[1]
    if not np.any(y):
        a = np.full(n, np.inf)
        st = SblState(a, cfg.beta_cap, np.zeros(0), np.zeros((0, 0)), np.zeros(0), math.nan, np.arange(0))
        return SblResult(np.zeros(n), np.zeros(n), [], True, st)
    state = init_state(A, y, cfg)
    trace = [(0, state.loglik, len(state.active), math.nan)]
    converged = False
    for it in range(1, cfg.max_iter + 1):
        state, max_d = em_update(state, A, y, cfg)
        trace.append((it, state.loglik, len(state.active), max_d))
        if max_d < cfg.tol or len(state.active) == 0:
            converged = True
            break
    if not converged:
        log.info("SBL hit max_iter=%d", cfg.max_iter)
    return SblResult(state.full_mean(), state.full_std(), trace, converged, state)


def sbl_detect(model: ForwardModel, cfg: SblConfig | None = None) -> SblResult:
    return sbl_run(model.Theta_r, model.y_r, cfg)


def sign_consistency_filter(e1, e2) -> np.ndarray:
    """Keep entries of e1 where e1 and e2 share a nonzero sign."""
    e1 = np.asarray(e1, float)
    e2 = np.asarray(e2, float)
    if e1.shape != e2.shape:
        raise ValueError("edge vectors differ in length")
    s1, s2 = np.sign(e1), np.sign(e2)
    return np.where((s1 == s2) & (s1 != 0), e1, 0.0)
