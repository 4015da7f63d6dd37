"""Gaussian-channel analysis of doubly-parametric optical-microwave transducers."""

__version__ = "0.1.0"

from .analysis import (
    Direction,
    Region,
    beamsplitter_choi,
    choi_classification,
    choi_cm,
    classify,
    converter_is_eb,
    converter_params,
    eb_threshold,
    squeezer_log_negativity,
    squeezer_output,
    thresholds,
    tmsls_cm,
    tmsls_params,
    verify_threshold_numerically,
)
from .gaussian import (
    CovarianceMatrix,
    GaussianChannel,
    Partition,
    apply_channel,
    channel_is_cp,
    is_physical_cm,
    is_ppt,
    log_negativity,
    symplectic_eigenvalues,
    symplectic_form,
    williamson,
)
from .model import (
    BEAMSPLITTER,
    SQUEEZER_MICROWAVE_BLUE,
    SQUEEZER_OPTICAL_BLUE,
    DptParams,
    PhysicalParams,
    PumpConfig,
    closed_form_channel,
    embedded_numeric_channel,
    numeric_channel,
)
from .separability import Separability, classify_separability, is_separable, is_separable_gklc
