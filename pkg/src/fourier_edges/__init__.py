"""Jump detection from non-uniform Fourier samples with l1 and sparse Bayesian learning."""

from .concentration import ConcentrationFactor, concentration_factor, make_template, ramp_coeff
from .forward_model import ForwardModel, build_model, waveform_kernel
from .frames import FrameSystem, Grid, build_frame_system, frame_reconstruct, gram_matrix
from .harness import ExperimentConfig, relative_error, run_detection
from .map_solver import LassoProblem, detect_edges_l1, lasso_solve, soft_threshold
from .reconstruct import build_mask, edge_adaptive_l2, pa_operator
from .sampling import FourierData, ModeSet, add_noise, catalog, fourier_samples, make_modes
from .sbl import SblConfig, posterior, sbl_detect, sign_consistency_filter

__version__ = "0.1.0"

__all__ = [
    "ConcentrationFactor",
    "concentration_factor",
    "make_template",
    "ramp_coeff",
    "ForwardModel",
    "build_model",
    "waveform_kernel",
    "FrameSystem",
    "Grid",
    "build_frame_system",
    "frame_reconstruct",
    "gram_matrix",
    "ExperimentConfig",
    "relative_error",
    "run_detection",
    "LassoProblem",
    "detect_edges_l1",
    "lasso_solve",
    "soft_threshold",
    "build_mask",
    "edge_adaptive_l2",
    "pa_operator",
    "FourierData",
    "ModeSet",
    "add_noise",
    "catalog",
    "fourier_samples",
    "make_modes",
    "SblConfig",
    "posterior",
    "sbl_detect",
    "sign_consistency_filter",
]
