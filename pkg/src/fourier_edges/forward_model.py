"""Linear model Theta g ~ y linking the jump vector g on the grid to the
concentration-filtered data.

A unit jump at x_j produces, through the frame projection, the filtered
coefficients c_l exp(-i pi l x_j) with c = B (sigma * rhat).  Stacking these
columns gives Theta; the data side is y = B (sigma * 2 fhat), the factor 2
bringing the samples to the full-integral scale of rhat.

The shift relation rhat_xi(lam) ~ rhat(lam) e^{-i pi lam xi} only holds
after projection onto integer modes when the lam_k are close to integers.
``model="exact"`` instead uses the transforms of the shifted ramps themselves
(see ``ramp_matrix``) and works mode by mode: Theta = diag(sigma) R,
y = sigma * 2 fhat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .concentration import ramp_coeff
from .frames import FrameSystem
from .sampling import FourierData

__version__ = "1.0"


class DegenerateDesignError(ValueError):
    pass


class ContractError(ValueError):
    pass


def _filtered_ramp(system: FrameSystem, sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, complex)
    if sigma.shape != system.mode_set.modes.shape:
        raise ContractError("sigma length does not match the mode set")
    return system.B @ (sigma * ramp_coeff(system.mode_set.modes))


def waveform_kernel(system: FrameSystem, sigma):
    """Return (gamma, W) with W(x) = sum_l c_l e^{i pi l x} / gamma and W(0) = 1."""
    c = _filtered_ramp(system, sigma)
    gamma = complex(c.sum())
    if abs(gamma) < 1e-12:
        raise DegenerateDesignError("concentration factor gives a null waveform kernel")
    l = system.l

    def W(x):
        x = np.asarray(x, float)
        return np.exp(1j * np.pi * np.multiply.outer(x, l)) @ c / gamma

    return gamma, W


@dataclass(frozen=True)
class ForwardModel:
    Theta: np.ndarray
    y: np.ndarray
    gamma: complex
    x: np.ndarray

    @property
    def Theta_r(self) -> np.ndarray:
        return np.vstack([self.Theta.real, self.Theta.imag])

    @property
    def y_r(self) -> np.ndarray:
        return np.concatenate([self.y.real, self.y.imag])

    @property
    def shape(self):
        return self.Theta.shape


def ramp_matrix(lam, xi) -> np.ndarray:
    """R[k, j] = int (r(x - xi_j) - xi_j/2) e^{-i pi lam_k x} dx.

    r(x - xi) is the unit ramp moved to xi, continued periodically; the
    constant xi/2 makes it vanish at x = +-1.  Closed form in a = pi lam.
    """
    lam = np.asarray(lam, float)
    xi = np.asarray(xi, float)[None, :]
    a = np.pi * lam[:, None]
    out = np.zeros((len(lam), xi.shape[1]), dtype=complex)
    nz = lam != 0
    an = a[nz]
    E0 = 2 * np.sin(an) / an
    E1 = -2j * (np.sin(an) - an * np.cos(an)) / an**2
    tail = (np.exp(-1j * an * xi) - np.exp(-1j * an)) / (1j * an)
    out[nz] = (xi - 1) / 2 * E0 - E1 / 2 + tail
    return out - xi * np.sinc(lam)[:, None]


def build_model(system: FrameSystem, sigma, data: FourierData | np.ndarray, model: str = "shift") -> ForwardModel:
    """Assemble (Theta, y).  ``model`` is ``shift`` (frame projection) or ``exact``."""
    values = data.values if isinstance(data, FourierData) else np.asarray(data, complex)
    if values.shape != system.mode_set.modes.shape:
        raise ContractError("data length does not match the mode set")
    if isinstance(data, FourierData) and not np.array_equal(data.mode_set.modes, system.mode_set.modes):
        raise ContractError("data and frame system use different modes")
    sigma = np.asarray(sigma, complex)
    c = _filtered_ramp(system, sigma)
    x = system.x
    if model == "shift":
        Theta = c[:, None] * np.exp(-1j * np.pi * np.outer(system.l, x))
        y = system.B @ (sigma * 2.0 * values)
    elif model == "exact":
        Theta = sigma[:, None] * ramp_matrix(system.mode_set.modes, x)
        y = sigma * 2.0 * values
    else:
        raise ContractError(f"unknown model {model!r}")
    return ForwardModel(Theta, y, complex(c.sum()), x)
