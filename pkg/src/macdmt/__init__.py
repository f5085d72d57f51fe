"""Diversity-multiplexing analysis toolkit for selective-fading MIMO multiple-access channels."""

__version__ = "0.1.0"

from .dmt import (  # noqa: F401
    ChannelSpec,
    DmtCurve,
    DominantReport,
    classify_region_grid,
    dmt_curve,
    dominant_set,
    eval_dmt,
    feasible,
    inverse_dmt,
    optimal_dmt,
    rate_region_constraints,
    rate_region_vertices_2user,
)
from .errors import (  # noqa: F401
    CapExceededError,
    ContractViolationError,
    DomainError,
    InfeasibleRateError,
    InsufficientTrialsError,
    MacDmtError,
    NotPsdError,
)
from .criteria import (  # noqa: F401
    CodebookSet,
    LambdaResult,
    criterion_check,
    difference_gram,
    lambda_min,
    ml_error_event_sim,
)
from .golden import (  # noqa: F401
    GaussianRational,
    QuadExt,
    RealQuad,
    abs2_exact,
    delta_det,
    golden_encode,
    make_constellation,
    omega,
    omega_decay_study,
    verify_nonzero_dets,
)
from .numerics import RngStream, sample_complex_gaussian  # noqa: F401
from .simulate import (  # noqa: F401
    ChannelRealization,
    McEstimate,
    SlopeFit,
    avg_mutual_info,
    correlation_preset,
    estimate_jensen_outage,
    estimate_outage,
    estimate_total_outage,
    fit_snr_exponent,
    jensen_info,
    sample_channel,
)
