"""Non-uniform Fourier modes, test functions and their continuous Fourier samples.

Samples follow the convention

    fhat(lam) = 1/2 * int_{-1}^{1} f(x) exp(-i pi lam x) dx

and are computed by piecewise Gauss-Legendre quadrature, so the data are never
generated with the discrete model used for inversion.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

__version__ = "1.0"

PATTERNS = ("jittered", "quadratic", "logarithmic")

# Gauss-Legendre order of one panel.
PANEL_NODES = 32
MAX_PANELS = 1 << 14


class QuadratureError(RuntimeError):
    """Raised when the requested accuracy is not reached within the node budget."""

    def __init__(self, message: str, mode: float):
        super().__init__(message)
        self.mode = mode


@dataclass(frozen=True)
class ModeSet:
    """Frequencies lam_k, k = -M..M, and how they were generated."""

    modes: np.ndarray
    pattern: str
    M: int
    seed: int | None = None
    v: float | None = None

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=float)
        if modes.shape != (2 * self.M + 1,):
            raise ValueError(f"expected {2 * self.M + 1} modes, got shape {modes.shape}")
        object.__setattr__(self, "modes", modes)

    def __len__(self):
        return len(self.modes)

    @property
    def index(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def to_dict(self) -> dict:
        return {
            "pattern": self.pattern,
            "M": self.M,
            "seed": self.seed,
            "v": self.v,
            "modes": self.modes.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModeSet":
        return cls(np.asarray(d["modes"], float), d["pattern"], int(d["M"]), d.get("seed"), d.get("v"))

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load_json(cls, path) -> "ModeSet":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def key(self) -> str:
        """Stable hash of the frequencies, used for on-disk caches."""
        import hashlib

        return hashlib.sha256(np.ascontiguousarray(self.modes).tobytes()).hexdigest()[:16]


def jittered_modes(M: int, seed: int = 0, xi: np.ndarray | None = None) -> ModeSet:
    """Integer modes -M..M perturbed by (1 - 2 xi)/4 with xi ~ U[0, 1].

    ``xi`` overrides the random draw (used to pin the jitter in tests).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if xi is None:
        xi = np.random.default_rng(seed).random(2 * M + 1)
    xi = np.broadcast_to(np.asarray(xi, float), (2 * M + 1,))
    i = np.arange(1, 2 * M + 2)
    return ModeSet(i - M - 1 + (1 - 2 * xi) / 4, "jittered", M, seed=seed)


def quadratic_modes(M: int) -> ModeSet:
    if M < 1:
        raise ValueError("M must be >= 1")
    k = np.arange(-M, M + 1)
    return ModeSet(np.sign(k) * k.astype(float) ** 2 / M, "quadratic", M)


def logarithmic_modes(M: int, v: float | None = None) -> ModeSet:
    """Zero plus +-exp(t) for M values t evenly spaced on [-v, log M].

    The default ``v = log M`` puts the smallest positive mode at 1/M.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if v is None:
        v = math.log(M) if M > 1 else 1.0
    if v <= 0:
        raise ValueError("v must be positive")
    pos = np.exp(np.linspace(-v, math.log(M), M))
    pos[-1] = float(M)
    return ModeSet(np.concatenate([-pos[::-1], [0.0], pos]), "logarithmic", M, v=v)


def make_modes(pattern: str, M: int, seed: int = 0, v: float | None = None) -> ModeSet:
    if pattern == "jittered":
        return jittered_modes(M, seed)
    if pattern == "quadratic":
        return quadratic_modes(M)
    if pattern == "logarithmic":
        return logarithmic_modes(M, v)
    raise ValueError(f"unknown sampling pattern {pattern!r}; expected one of {PATTERNS}")


@dataclass(frozen=True)
class PiecewiseFunction:
    """A function on [-1, 1] that is smooth on each of its closed pieces.

    ``pieces`` holds ``(a, b, fn)`` with consecutive intervals covering [-1, 1];
    ``jumps`` holds ``(xi, f(xi+) - f(xi-))`` at interior breakpoints.
    """

    name: str
    pieces: tuple[tuple[float, float, Callable[[np.ndarray], np.ndarray]], ...]
    jumps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("need at least one piece")
        if self.pieces[0][0] != -1.0 or self.pieces[-1][1] != 1.0:
            raise ValueError("pieces must cover [-1, 1]")
        for (_, b, _), (a, _, _) in zip(self.pieces[:-1], self.pieces[1:]):
            if a != b:
                raise ValueError("pieces must be contiguous")
        inner = {b for _, b, _ in self.pieces[:-1]}
        for xi, _ in self.jumps:
            if xi not in inner:
                raise ValueError(f"jump at {xi} is not a breakpoint")

    @property
    def breakpoints(self) -> list[float]:
        return [self.pieces[0][0]] + [b for _, b, _ in self.pieces]

    def __call__(self, x) -> np.ndarray:
        """Evaluate with right-continuity at interior breakpoints."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        last = len(self.pieces) - 1
        for i, (a, b, fn) in enumerate(self.pieces):
            sel = (x >= a) & ((x < b) if i < last else (x <= b))
            if sel.any():
                out[sel] = fn(x[sel])
        return out

    def jump_vector(self, J: int) -> np.ndarray:
        """Jump heights sampled on the grid x_j = j/J (height stored in the cell containing xi)."""
        g = np.zeros(2 * J + 1)
        for xi, height in self.jumps:
            j = int(math.floor(xi * J + 1e-9))
            g[j + J] += height
        return g


def _gl_panels(a: float, b: float, panels: int, n: int = PANEL_NODES):
    t, w = leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges)[:, None] / 2
    mid = (edges[:-1] + edges[1:])[:, None] / 2
    return (mid + half * t).ravel(), (half * w).ravel()


def fourier_integral(fn: Callable, a: float, b: float, lam: np.ndarray, panels: int) -> np.ndarray:
    """1/2 * int_a^b fn(x) exp(-i pi lam x) dx with ``panels`` Gauss-Legendre panels."""
    x, w = _gl_panels(a, b, panels)
    vals = fn(x) * w
    return np.exp(-1j * np.pi * np.outer(lam, x)) @ vals / 2


def fourier_coefficients(
    f: PiecewiseFunction, lam, tol: float = 1e-12, max_panels: int = MAX_PANELS
) -> np.ndarray:
    """Continuous Fourier samples of ``f`` at ``lam`` by adaptive composite quadrature.

    Each piece starts with roughly one 32-node panel per unit of |lam| and the
    panel count doubles until two successive estimates agree to ``tol``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    total = np.zeros(lam.shape, dtype=complex)
    lam_max = float(np.max(np.abs(lam))) if lam.size else 0.0
    for a, b, fn in f.pieces:
        panels = max(1, int(math.ceil(lam_max * (b - a) / 2)))
        prev = fourier_integral(fn, a, b, lam, panels)
        diff = np.full(lam.shape, np.inf)
        while diff.max(initial=0.0) >= tol:
            panels *= 2
            if panels > max_panels:
                worst = float(lam[int(np.argmax(diff))])
                raise QuadratureError(
                    f"quadrature on [{a}, {b}] did not reach tol={tol:g} (worst mode {worst:g})", worst
                )
            cur = fourier_integral(fn, a, b, lam, panels)
            diff = np.abs(cur - prev)
            prev = cur
        total += prev
    return total


@dataclass(frozen=True)
class FourierData:
    values: np.ndarray
    mode_set: ModeSet
    noise_std: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.mode_set.modes.shape:
            raise ValueError("data length does not match the mode set")
        object.__setattr__(self, "values", values)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "lambda", "re", "im"])
            for k, lam, v in zip(self.mode_set.index, self.mode_set.modes, self.values):
                w.writerow([int(k), repr(float(lam)), repr(float(v.real)), repr(float(v.imag))])


def fourier_samples(f: PiecewiseFunction, modes: ModeSet, tol: float = 1e-12) -> FourierData:
    return FourierData(fourier_coefficients(f, modes.modes, tol), modes)


def add_noise(data: FourierData, sigma: float, seed: int = 0) -> FourierData:
    """Add circular complex Gaussian noise with E|eta|^2 = sigma^2."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return FourierData(data.values.copy(), data.mode_set, 0.0, seed)
    rng = np.random.default_rng(seed)
    n = len(data.values)
    eta = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (sigma / math.sqrt(2))
    return FourierData(data.values + eta, data.mode_set, sigma, seed)


# -- test functions ---------------------------------------------------------


def _f1_pieces():
    pi = np.pi
    return (
        (-1.0, -0.5, lambda x: np.cos(pi * x / 2)),
        (-0.5, 0.0, lambda x: np.cos(3 * pi * x / 2)),
        (0.0, 0.5, lambda x: np.cos(3 * pi * x / 2)),
        (0.5, 1.0, lambda x: np.cos(7 * pi * x / 2)),
    )


def _f2_pieces():
    return (
        (-1.0, -0.5, lambda x: -0.5 * (1 - x**2) ** 2),
        (-0.5, 0.5, lambda x: np.cos(4 * np.pi * x)),
        (0.5, 1.0, lambda x: (1 - x**2) ** 4),
    )


def _f3_pieces():
    outer = lambda x: np.pi * (1 - x**2) ** 2
    return (
        (-1.0, -0.5, outer),
        (-0.5, 0.5, lambda x: -np.sin(6 * np.pi * x) / 6),
        (0.5, 1.0, outer),
    )


def ramp() -> PiecewiseFunction:
    """Sawtooth with a unit jump at the origin, continuous across x = +-1."""
    return PiecewiseFunction(
        "ramp",
        ((-1.0, 0.0, lambda x: -(x + 1) / 2), (0.0, 1.0, lambda x: -(x - 1) / 2)),
        ((0.0, 1.0),),
    )


def constant(c: float = 1.0) -> PiecewiseFunction:
    return PiecewiseFunction("constant", ((-1.0, 1.0, lambda x: np.full_like(x, c)),))


def catalog(name: str) -> PiecewiseFunction:
    """The three benchmark signals f1, f2, f3 with their exact jumps."""
    if name == "f1":
        return PiecewiseFunction("f1", _f1_pieces(), ((-0.5, -math.sqrt(2)), (0.5, math.sqrt(2))))
    if name == "f2":
        # 41/32 = cos(-2 pi) + 9/32; the commonly quoted 42/31 does not match the pieces.
        return PiecewiseFunction("f2", _f2_pieces(), ((-0.5, 41 / 32), (0.5, -175 / 256)))
    if name == "f3":
        return PiecewiseFunction("f3", _f3_pieces(), ((-0.5, -9 * math.pi / 16), (0.5, 9 * math.pi / 16)))
    raise ValueError(f"unknown test function {name!r}")


FUNCTIONS = ("f1", "f2", "f3")


def one_sided_jumps(f: PiecewiseFunction, eps: float = 0.0) -> list[tuple[float, float]]:
    """Jumps recomputed from the piece formulas (right piece at xi minus left piece at xi)."""
    out = []
    for (_, b, left), (_, _, right) in zip(f.pieces[:-1], f.pieces[1:]):
        x = np.array([b])
        d = float(right(x + eps)[0] - left(x - eps)[0])
        if abs(d) > 1e-12:
            out.append((b, d))
    return out


def sample_grid(J: int) -> np.ndarray:
    return np.arange(-J, J + 1) / J
