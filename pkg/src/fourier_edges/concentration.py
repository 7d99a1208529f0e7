"""Concentration-factor design.

A concentration factor sigma turns the frame partial sum of the data into an
approximation of the jump function.  It is obtained from a spectral profile
hhat via sigma_k = hhat_k / rhat(lam_k), where hhat is chosen by an l1 fit:
the frame expansion of hhat should look like a unit spike at the origin,
while the same expansion weighted by shat/rhat (the response to a smooth
template s) should vanish.

Conventions: ``ramp_coeff`` is the full integral int_{-1}^{1} r(x) e^{-i pi lam x} dx
of the unit ramp, so it equals twice the package's Fourier samples of the ramp.
``template_coeffs`` use the same full-integral normalization so that the ratio
shat/rhat compares like with like.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .frames import FrameSystem, Grid, dual_eval_matrix
from .sampling import ModeSet, PiecewiseFunction, fourier_coefficients

__version__ = "1.0"

log = logging.getLogger(__name__)


class DesignError(RuntimeError):
    """The design optimization did not converge.  Carries the best iterate."""

    def __init__(self, message, h_hat=None, residuals=None):
        super().__init__(message)
        self.h_hat = h_hat
        self.residuals = residuals


def ramp_coeff(lam) -> np.ndarray | complex:
    """i (sin(pi lam) - pi lam) / (pi lam)^2, and 0 at lam = 0."""
    lam_arr = np.asarray(lam, dtype=float)
    a = np.pi * np.atleast_1d(lam_arr)
    out = np.zeros(a.shape, dtype=complex)
    nz = a != 0
    an = a[nz]
    out[nz] = 1j * (np.sin(an) - an) / an**2
    return out[0] if lam_arr.ndim == 0 else out


def _hat(x):
    return (np.abs(x) - 1) / 2


def _cubic(x):
    return np.where(x <= 0, -((x + 1) ** 3) / 12, (x - 1) ** 3 / 12 - 1 / 6)


@dataclass(frozen=True)
class SmoothTemplate:
    """Model of the smooth part of f used to suppress non-jump responses."""

    kind: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    breaks: tuple[float, ...] = (-1.0, 0.0, 1.0)

    def as_function(self) -> PiecewiseFunction:
        pieces = tuple((a, b, self.evaluator) for a, b in zip(self.breaks[:-1], self.breaks[1:]))
        return PiecewiseFunction(self.kind, pieces)

    def fourier(self, lam, tol: float = 1e-12) -> np.ndarray:
        """Full-integral transform int s(x) e^{-i pi lam x} dx."""
        lam = np.atleast_1d(np.asarray(lam, float))
        if self.kind == "hat":
            a = np.pi * lam
            out = np.full(lam.shape, -0.5, dtype=complex)
            nz = a != 0
            out[nz] = (np.cos(a[nz]) - 1) / a[nz] ** 2
            return out
        return 2.0 * fourier_coefficients(self.as_function(), lam, tol)


def make_template(kind: str = "s1", evaluator=None, breaks=None) -> SmoothTemplate:
    """``s1`` is the hat (|x| - 1)/2, ``s2`` the piecewise cubic; ``custom`` takes an evaluator."""
    if kind in ("s1", "hat"):
        return SmoothTemplate("hat", _hat)
    if kind in ("s2", "cubic"):
        return SmoothTemplate("cubic", _cubic)
    if kind == "custom":
        if evaluator is None:
            raise ValueError("custom template needs an evaluator")
        return SmoothTemplate("custom", evaluator, tuple(breaks) if breaks else (-1.0, 1.0))
    raise ValueError(f"unknown template {kind!r}")


def template_coeffs(template: SmoothTemplate, modes: ModeSet | np.ndarray, tol: float = 1e-12) -> np.ndarray:
    lam = modes.modes if isinstance(modes, ModeSet) else modes
    return template.fourier(lam, tol)


def build_design_matrices(system: FrameSystem, template: SmoothTemplate, grid: Grid | None = None, B=None):
    """Return (F, S, d) on ``grid`` (the system grid by default).

    F is the dual-frame evaluation matrix, S weights its columns by
    shat/rhat (zero where rhat vanishes) and d is the unit spike at x = 0.
    ``B`` overrides the system's dual coefficients (e.g. a more heavily
    truncated pseudoinverse used only for the design).
    """
    grid = system.grid if grid is None else grid
    B = system.B if B is None else B
    F = system.DualEval if (grid is system.grid and B is system.B) else dual_eval_matrix(B, grid)
    lam = system.mode_set.modes
    r = ramp_coeff(lam)
    s = template_coeffs(template, lam)
    ratio = np.zeros(lam.shape, dtype=complex)
    nz = np.abs(r) > 0
    ratio[nz] = s[nz] / r[nz]
    S = F * ratio[None, :]
    d = (np.abs(grid.points) < 1e-12).astype(float)
    return F, S, d


def _stack(Z):
    return np.vstack([Z.real, Z.imag])


@dataclass
class ConcentrationFactor:
    sigma: np.ndarray
    h_hat: np.ndarray
    mu: float
    residual_delta: float
    residual_smooth: float
    objective: float = math.nan
    method: str = "lp"
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "sigma_re": self.sigma.real.tolist(),
            "sigma_im": self.sigma.imag.tolist(),
            "h_hat": self.h_hat.tolist(),
            "mu": self.mu,
            "residual_delta": self.residual_delta,
            "residual_smooth": self.residual_smooth,
            "objective": self.objective,
            "method": self.method,
            "meta": self.meta,
        }

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def from_json(cls, d: dict) -> "ConcentrationFactor":
        sigma = np.asarray(d["sigma_re"]) + 1j * np.asarray(d["sigma_im"])
        return cls(sigma, np.asarray(d["h_hat"], float), d["mu"], d["residual_delta"],
                   d["residual_smooth"], d.get("objective", math.nan), d.get("method", "lp"), d.get("meta", {}))

    @classmethod
    def load_json(cls, path) -> "ConcentrationFactor":
        return cls.from_json(json.loads(Path(path).read_text()))


def sigma_from_h(h_hat: np.ndarray, lam: np.ndarray) -> np.ndarray:
    r = ramp_coeff(lam)
    sigma = np.zeros(len(lam), dtype=complex)
    nz = np.abs(r) > 0
    sigma[nz] = h_hat[nz] / r[nz]
    return sigma


def _objective_parts(F, S, d, h):
    rd = np.abs(_stack((F @ h - d)[:, None])).sum()
    rs = np.abs(_stack((S @ h)[:, None])).sum()
    return float(rd), float(rs)


def _solve_lp(Fr, Sr, dr, mu, reg, eq_rows, eq_vals):
    n = Fr.shape[1]
    p, q = Fr.shape[0], Sr.shape[0]
    # h = hp - hm, |F h - d| <= t, |S h| <= u
    c = np.concatenate([np.full(2 * n, reg), np.ones(p), np.full(q, mu)])
    A = sp.bmat(
        [
            [Fr, -Fr, -sp.eye(p), None],
            [-Fr, Fr, -sp.eye(p), None],
            [Sr, -Sr, None, -sp.eye(q)],
            [-Sr, Sr, None, -sp.eye(q)],
        ],
        format="csr",
    )
    b = np.concatenate([dr, -dr, np.zeros(2 * q)])
    kw = {}
    if len(eq_rows):
        E = np.atleast_2d(eq_rows)
        Aeq = np.zeros((len(E), 2 * n + p + q))
        Aeq[:, :n], Aeq[:, n : 2 * n] = E, -E
        kw = dict(A_eq=Aeq, b_eq=eq_vals)
    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs", **kw)
    if res.status != 0 or res.x is None:
        return None, res.message
    return res.x[:n] - res.x[n : 2 * n], res.message


def _solve_irls(Fr, Sr, dr, mu, reg, eq_rows, eq_vals, eps=1e-8, max_iter=500, tol=1e-6):
    """Iteratively reweighted least squares for the same objective (fallback)."""
    n = Fr.shape[1]
    A = np.vstack([Fr, Sr, np.eye(n)])
    b = np.concatenate([dr, np.zeros(Sr.shape[0] + n)])
    c = np.concatenate([np.ones(Fr.shape[0]), np.full(Sr.shape[0], mu), np.full(n, reg)])
    h = np.zeros(n)
    prev = np.inf
    for it in range(max_iter):
        r = A @ h - b
        w = c / np.sqrt(r**2 + eps**2)
        H = A.T @ (w[:, None] * A) + 1e-14 * np.eye(n)
        g = A.T @ (w * b)
        if len(eq_rows):
            E = np.atleast_2d(eq_rows)
            K = np.block([[H, E.T], [E, np.zeros((len(E), len(E)))]])
            h = np.linalg.lstsq(K, np.concatenate([g, eq_vals]), rcond=None)[0][:n]
        else:
            h = np.linalg.lstsq(H, g, rcond=None)[0]
        obj = float(c @ np.abs(A @ h - b))
        if abs(prev - obj) <= tol * max(obj, 1e-30):
            return h, True
        prev = obj
    return h, False


def design_sigma(
    F: np.ndarray,
    S: np.ndarray,
    d: np.ndarray,
    mu: float,
    lam: np.ndarray,
    reg: float = 0.0,
    pin_center: bool = False,
    solver: str = "lp",
    basis: np.ndarray | None = None,
    zero_mean: np.ndarray | None = None,
) -> ConcentrationFactor:
    """Minimize ||F h - d||_1 + mu ||S h||_1 + reg ||w||_1 over real h = basis @ w.

    Complex residuals are split into real and imaginary parts.  With
    ``pin_center`` the real part of (F h) at the spike location is forced to
    equal d there, which fixes the gain of the resulting kernel.
    ``zero_mean`` is the row mapping w to hhat(0); if given, hhat(0) = 0 is
    imposed.  Without ``basis``, w = h.  ``solver`` is ``lp`` (HiGHS, falling
    back to IRLS on failure) or ``irls``.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    d = np.asarray(d, float)
    Fb, Sb = (F, S) if basis is None else (F @ basis, S @ basis)
    Fr, Sr = _stack(Fb), _stack(Sb)
    dr = np.concatenate([d, np.zeros_like(d)])
    eq_rows, eq_vals = [], []
    if pin_center:
        j0 = int(np.argmax(np.abs(d))) if np.any(d) else F.shape[0] // 2
        eq_rows.append(Fb[j0].real.copy())
        eq_vals.append(float(d[j0]))
    if zero_mean is not None:
        eq_rows.append(np.asarray(zero_mean, float))
        eq_vals.append(0.0)
    w, method = None, solver
    if solver == "lp":
        w, msg = _solve_lp(Fr, Sr, dr, mu, reg, eq_rows, eq_vals)
        if w is None:
            log.warning("LP design failed (%s); falling back to IRLS", msg)
            method = "irls"
    if w is None:
        w, ok = _solve_irls(Fr, Sr, dr, mu, reg, eq_rows, eq_vals)
        if not ok:
            h = w if basis is None else basis @ w
            rd, rs = _objective_parts(F, S, d, h)
            raise DesignError("IRLS design did not converge", h, (rd, rs))
    h = w if basis is None else basis @ w
    rd, rs = _objective_parts(F, S, d, h)
    obj = rd + mu * rs + reg * float(np.abs(w).sum())
    cf = ConcentrationFactor(sigma_from_h(h, lam), h, mu, rd, rs, obj, method)
    if basis is not None:
        cf.meta["weights"] = w.tolist()
    return cf


def bump_basis_hat(lam, eps: float = 0.07, P: int = 4, panels: int = 64, nodes: int = 16) -> np.ndarray:
    """Columns int b(x/eps) (x/eps)^(2p) cos(pi lam x) dx, p = 0..P, with b(t) = exp(1 - 1/(1 - t^2)).

    Even bumps of half-width eps; combinations of them are smooth spikes
    whose transforms decay once |lam| exceeds about 1/eps.
    """
    lam = np.atleast_1d(np.asarray(lam, float))
    t, wt = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(-eps, eps, panels + 1)
    half = np.diff(edges)[:, None] / 2
    x = ((edges[:-1] + edges[1:])[:, None] / 2 + half * t).ravel()
    w = (half * wt).ravel()
    u = x / eps
    b = np.where(np.abs(u) < 1, np.exp(1 - 1 / np.maximum(1 - u**2, 1e-300)), 0.0)
    C = np.cos(np.pi * np.outer(lam, x))
    return np.stack([C @ (w * b * u ** (2 * p)) for p in range(P + 1)], axis=1)


def concentration_factor(
    system: FrameSystem,
    template: SmoothTemplate | str = "s1",
    mu: float = 1.0,
    reg: float = 0.1,
    pin_center: bool = True,
    design_J: int | None = None,
    design_B: np.ndarray | None = None,
    design: str = "free",
    eps: float = 0.07,
    P: int = 4,
) -> ConcentrationFactor:
    """Design sigma for a frame system.

    ``design='free'`` optimizes every hhat_k; ``'bump'`` restricts hhat to the
    transforms of zero-mean combinations of smooth bumps of half-width ``eps``
    (see ``bump_basis_hat``).  The design grid has ``max(J, N)`` cells per unit
    by default so the spike target is resolved at the frame's own bandwidth.
    """
    if isinstance(template, str):
        template = make_template(template)
    Jd = design_J or max(system.grid.J, system.N)
    F, S, d = build_design_matrices(system, template, Grid(Jd), design_B)
    lam = system.mode_set.modes
    if design == "free":
        cf = design_sigma(F, S, d, mu, lam, reg=reg, pin_center=pin_center)
    elif design == "bump":
        Hb = bump_basis_hat(lam, eps, P)
        H0 = bump_basis_hat(np.zeros(1), eps, P)[0]
        cf = design_sigma(F, S, d, mu, lam, reg=reg, pin_center=pin_center, basis=Hb, zero_mean=H0)
    else:
        raise ValueError(f"unknown design {design!r}")
    cf.meta.update(template=template.kind, design=design, design_J=Jd, pattern=system.mode_set.pattern,
                   M=system.mode_set.M, N=system.N, version=__version__)
    return cf
