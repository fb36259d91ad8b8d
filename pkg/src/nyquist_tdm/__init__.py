"""Nyquist sinc sequences, orthogonal TDM link simulation and fractional-order tools."""

from . import kernels
from .fdonss import (
    GramMode,
    SolverDiverged,
    Target,
    fdonss_eval,
    fdonss_gram,
    knot_trajectory,
    trajectory_solve,
)
from .frac_calc import (
    Tone,
    Trajectory,
    dimensional_transform,
    reconstruct_from_trajectory,
    rl_derivative,
    sine_to_sinc_trajectory,
    sinc_orthogonality_residual,
    weyl_sinusoid_derivative,
)
from .phase_delay import NotAPureDelay, apply_delay_as_phase, phase_slope, synthesize
from .signal_core import (
    Branch,
    FrequencyComb,
    Kind,
    SequenceSpec,
    TimeGrid,
    Waveform,
    cnss,
    gram_matrix,
    inner_product,
    nss_closed_form,
    nss_fourier,
    raised_cosine,
    sample,
)
from .tdm_link import BerPoint, LinkConfig, Receiver, ber_sweep, ook_matched_ber

__version__ = "0.1.0"

__all__ = [
    "BerPoint", "Branch", "FrequencyComb", "GramMode", "Kind", "LinkConfig",
    "NotAPureDelay", "Receiver", "SequenceSpec", "SolverDiverged", "Target",
    "TimeGrid", "Tone", "Trajectory", "Waveform", "apply_delay_as_phase",
    "ber_sweep", "cnss", "dimensional_transform", "fdonss_eval", "fdonss_gram",
    "gram_matrix", "inner_product", "kernels", "knot_trajectory", "nss_closed_form",
    "nss_fourier", "ook_matched_ber", "phase_slope", "raised_cosine",
    "reconstruct_from_trajectory", "rl_derivative", "sample", "sine_to_sinc_trajectory",
    "sinc_orthogonality_residual", "synthesize", "trajectory_solve",
    "weyl_sinusoid_derivative",
]
