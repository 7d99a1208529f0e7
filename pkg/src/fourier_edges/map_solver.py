"""l1-regularized (MAP with a Laplace prior) edge estimation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .forward_model import ForwardModel

__version__ = "1.0"

log = logging.getLogger(__name__)


def soft_threshold(v, t):
    """Proximal map of t*|.|: sign(v) max(|v| - t, 0)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v, float)
    out = np.sign(v) * np.maximum(np.abs(v) - t, 0.0)
    return out if out.ndim else float(out)


def map_lambda(noise_var: float, laplace_rate: float) -> float:
    """Regularization weight equivalent to MAP with Gaussian noise and a Laplace prior."""
    return 2.0 * noise_var * laplace_rate


@dataclass
class LassoProblem:
    A: np.ndarray
    b: np.ndarray
    lam: float
    tol: float = 1e-12
    max_iter: int = 20000
    kkt_tol: float = 1e-9

    def __post_init__(self):
        self.A = np.asarray(self.A, float)
        self.b = np.asarray(self.b, float)
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not np.all(np.isfinite(self.A)):
            raise ValueError("A has non-finite entries")

    def objective(self, g) -> float:
        r = self.A @ g - self.b
        return 0.5 * float(r @ r) + self.lam * float(np.abs(g).sum())


@dataclass
class LassoResult:
    g: np.ndarray
    objective: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def kkt_violation(A, b, g, lam) -> float:
    """Largest violation of the lasso optimality conditions at g."""
    grad = A.T @ (A @ g - b)
    nz = g != 0
    v = np.empty_like(grad)
    v[nz] = np.abs(grad[nz] + lam * np.sign(g[nz]))
    v[~nz] = np.maximum(np.abs(grad[~nz]) - lam, 0.0)
    return float(v.max(initial=0.0))


def power_norm2(A, iters: int = 30, seed: int = 0) -> float:
    """Largest eigenvalue of A^T A by power iteration (slightly inflated for safety)."""
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    ev = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        ev = float(v @ w / (v @ v))
        v = w / nw
    return ev * 1.01


def lasso_solve(p: LassoProblem, g0=None) -> LassoResult:
    """min 0.5||Ag - b||^2 + lam ||g||_1 by monotone FISTA with step 1/L.

    Stops when an accepted step decreases the objective by less than ``tol``
    (relative) and the KKT violation is below ``kkt_tol`` times max(1, |A^T b|).
    """
    A, b, lam = p.A, p.b, p.lam
    n = A.shape[1]
    L = power_norm2(A)
    g = np.zeros(n) if g0 is None else np.asarray(g0, float).copy()
    if L == 0:
        return LassoResult(np.zeros(n), p.objective(np.zeros(n)), 0, True)
    Atb = A.T @ b
    AtA = A.T @ A if A.shape[0] > n else None

    def grad(z):
        return AtA @ z - Atb if AtA is not None else A.T @ (A @ z - b)

    kkt_scale = p.kkt_tol * max(1.0, float(np.abs(Atb).max(initial=0.0)))
    y, t = g.copy(), 1.0
    obj = p.objective(g)
    trace = [obj]
    converged = False
    for it in range(1, p.max_iter + 1):
        z = soft_threshold(y - grad(y) / L, lam / L)
        oz = p.objective(z)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        g_old = g
        if oz <= obj:
            g, new = z, oz
        else:
            new = obj
        y = g + (t / t_new) * (z - g) + ((t - 1) / t_new) * (g - g_old)
        t = t_new
        trace.append(new)
        accepted = oz <= obj
        small = accepted and obj - new <= p.tol * max(abs(obj), 1e-300)
        obj = new
        # a stalled step only counts once the optimality conditions hold as well
        if (small or it % 25 == 0) and kkt_violation(A, b, g, lam) <= kkt_scale:
            converged = True
            break
    if not converged:
        log.info("lasso stopped at max_iter=%d", p.max_iter)
    return LassoResult(g, obj, it, converged, trace)


def sqrt_lasso_solve(A, b, lam, tol: float = 1e-8, outer: int = 100, **kw) -> LassoResult:
    """min ||Ag - b||_2 + lam ||g||_1.

    Uses that a minimizer solves the squared problem with weight lam * ||Ag - b||,
    iterating on that residual norm with warm starts.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    s = float(np.linalg.norm(b))
    g = np.zeros(A.shape[1])
    if s == 0:
        return LassoResult(g, 0.0, 0, True)
    res = None
    for k in range(outer):
        res = lasso_solve(LassoProblem(A, b, lam * s, **kw), g0=g)
        g = res.g
        s_new = float(np.linalg.norm(A @ g - b))
        if abs(s_new - s) <= tol * max(s, 1e-300) or s_new == 0:
            s = s_new
            break
        s = max(s_new, 1e-300)
    obj = float(np.linalg.norm(A @ g - b) + lam * np.abs(g).sum())
    return LassoResult(g, obj, k + 1, res.converged and k + 1 < outer, res.trace)


def detect_edges_l1(model: ForwardModel, lam: float = 0.01, fidelity: str = "unsquared", **kw) -> LassoResult:
    """Jump vector on the grid from the realified model.

    ``fidelity='unsquared'`` uses ||Theta g - y||_2 + lam ||g||_1;
    ``'squared'`` uses 0.5||Theta g - y||^2 + lam ||g||_1.
    """
    A, b = model.Theta_r, model.y_r
    if fidelity == "squared":
        return lasso_solve(LassoProblem(A, b, lam, **kw))
    if fidelity == "unsquared":
        return sqrt_lasso_solve(A, b, lam, **kw)
    raise ValueError(f"unknown fidelity {fidelity!r}")
