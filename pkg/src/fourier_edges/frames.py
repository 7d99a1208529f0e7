"""Finite Fourier frame: Gram matrix against integer exponentials, its
pseudoinverse and the dual-frame evaluation matrix on a uniform grid.

Integer exponentials psi_l(x) = exp(i pi l x), l = -N..N, serve as the
admissible frame.  With inner products taken as <f, g> = int_{-1}^{1} f conj(g),
the sample fhat(lam) used throughout the package is half of <f, phi_lam>, which
is why reconstructions multiply the data by 2.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .sampling import FourierData, ModeSet

__version__ = "1.0"

log = logging.getLogger(__name__)

DEFAULT_RCOND = 1e-12


class RankDeficiencyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_j = j/J, j = -J..J."""

    J: int

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("J must be >= 1")

    @property
    def points(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1) / self.J

    @property
    def size(self) -> int:
        return 2 * self.J + 1

    def __len__(self):
        return self.size


def gram_matrix(modes: ModeSet | np.ndarray, N: int) -> np.ndarray:
    """Psi[k, l] = 2 sin(pi(lam_k - l)) / (pi(lam_k - l)), shape (2M+1, 2N+1)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    lam = modes.modes if isinstance(modes, ModeSet) else np.asarray(modes, float)
    l = np.arange(-N, N + 1)
    # np.sinc is sin(pi t)/(pi t) with the removable singularity filled in
    return 2.0 * np.sinc(lam[:, None] - l[None, :])


@dataclass(frozen=True)
class DualCoefficients:
    B: np.ndarray
    cond: float
    rank: int
    singular_values: np.ndarray


def dual_coefficients(Psi: np.ndarray, rcond: float = DEFAULT_RCOND) -> DualCoefficients:
    """Moore-Penrose pseudoinverse of Psi by SVD.

    Singular values below rcond * s_max are dropped.  A warning is issued if
    fewer than ``Psi.shape[1]`` survive.
    """
    Psi = np.asarray(Psi, float)
    n = Psi.shape[1]
    U, s, Vt = np.linalg.svd(Psi, full_matrices=False)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return DualCoefficients(np.zeros(Psi.T.shape), np.inf, 0, s)
    keep = s > rcond * smax
    rank = int(keep.sum())
    B = (Vt[keep].T / s[keep]) @ U[:, keep].T
    cond = float(smax / s[-1]) if s[-1] > 0 else np.inf
    if rank < n:
        warnings.warn(
            f"Gram matrix has numerical rank {rank} < {n} (cond {cond:.3g}); truncating",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    return DualCoefficients(B, cond, rank, s)


def dual_eval_matrix(B: np.ndarray, grid: Grid | np.ndarray) -> np.ndarray:
    """DualEval[j, k] = sum_l B[l, k] exp(i pi l x_j), shape (2J+1, 2M+1)."""
    x = grid.points if isinstance(grid, Grid) else np.asarray(grid, float)
    N = (B.shape[0] - 1) // 2
    l = np.arange(-N, N + 1)
    return np.exp(1j * np.pi * np.outer(x, l)) @ B


@dataclass(frozen=True)
class FrameSystem:
    mode_set: ModeSet
    N: int
    Psi: np.ndarray
    B: np.ndarray
    grid: Grid
    DualEval: np.ndarray
    cond: float
    rank: int
    rcond: float = DEFAULT_RCOND
    meta: dict = field(default_factory=dict)

    @property
    def l(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points


def _cache_file(cache_dir, mode_set: ModeSet, N: int, rcond: float) -> Path:
    return Path(cache_dir) / f"frame_{mode_set.key()}_N{N}_r{rcond:.0e}.npz"


def build_frame_system(
    mode_set: ModeSet,
    N: int | None = None,
    J: int = 64,
    rcond: float = DEFAULT_RCOND,
    cache_dir=None,
) -> FrameSystem:
    """Assemble Psi, B and the dual evaluation matrix.

    With ``cache_dir`` set, (Psi, B) are stored in and reloaded from an
    ``.npz`` file keyed by the mode-set hash.
    """
    N = mode_set.M if N is None else int(N)
    grid = Grid(J)
    Psi = B = None
    if cache_dir is not None:
        path = _cache_file(cache_dir, mode_set, N, rcond)
        if path.exists():
            with np.load(path) as z:
                Psi, B = z["Psi"], z["B"]
                cond, rank = float(z["cond"]), int(z["rank"])
    if Psi is None:
        Psi = gram_matrix(mode_set, N)
        dc = dual_coefficients(Psi, rcond)
        B, cond, rank = dc.B, dc.cond, dc.rank
        if cache_dir is not None:
            Path(cache_dir).mkdir(parents=True, exist_ok=True)
            np.savez(path, Psi=Psi, B=B, cond=cond, rank=rank)
    log.debug("frame %s M=%d N=%d cond=%.3g rank=%d", mode_set.pattern, mode_set.M, N, cond, rank)
    return FrameSystem(mode_set, N, Psi, B, grid, dual_eval_matrix(B, grid), cond, rank, rcond)


def frame_reconstruct(data: FourierData, system: FrameSystem) -> np.ndarray:
    """Frame approximation of f on the grid from its Fourier samples."""
    if data.mode_set is not system.mode_set and not np.array_equal(
        data.mode_set.modes, system.mode_set.modes
    ):
        raise ValueError("data and frame system use different modes")
    # samples are half the frame inner products
    return system.DualEval @ (2.0 * data.values)
