"""Differential invariants under gamma correction and similarity transformations."""

import warnings

# numba probes an optional TBB runtime and warns when it is too old; the
# default workqueue/OpenMP layers are used instead, so the notice is noise
warnings.filterwarnings("ignore", message="The TBB threading layer", module="numba")

from gaminv.analytic import (
    AnalyticSignal, Constant, GammaSignal, PoleError, ScaledSignal, SineRamp,
    theta_12g, theta_123g, theta_m12g, theta_m123g,
)
from gaminv.error_metrics import (
    ErrorReport, absolute_error, error_report, relative_error, reliable_points,
)
from gaminv.image_ops import (
    Jet, ScalarField, convolve, cubic_variation, gradient_magnitude, laplacian,
    quadratic_variation,
)
from gaminv.invariants import (
    InvariantMap, gamma_correct, invariant_m12g, invariant_m123g, invariant_map, prefilter,
)
from gaminv.kernels import Kernel, derivative_bank, gaussian_kernel
from gaminv.matching import (
    MatchReport, correlation_accuracy, correlation_score, correlation_surface, locate_template,
)
from gaminv.synth import synth_corpus, synth_image

__version__ = "0.1.0"
