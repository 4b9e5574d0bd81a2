"""Click-detector homodyne simulator: click statistics, moments and nonclassicality witnesses."""

__version__ = "0.1.0"

from .states import (  # noqa: E402
    CoherentSuperposition,
    DegenerateStateError,
    EvaluationError,
    FockVector,
    Mixture,
    TruncationWarning,
    coherent,
    make_cat,
    make_two_mode_cat,
    to_fock,
    vacuum,
)
from .clicks import (  # noqa: E402
    ArmDescriptor,
    ClickDistribution,
    DetectorConfig,
    EmpiricalMoments,
    ExactMoments,
    click_statistics,
    joint_click_statistics,
    moments_from_statistics,
    photoelectric_statistics,
    pi_moment,
)
from .homodyne import (  # noqa: E402
    BeamSplitter,
    LocalOscillator,
    SchemeArms,
    balanced_arms,
    eight_port_arms,
    four_port_arms,
    two_mode_arms,
    unbalanced_arm,
    unbalanced_scheme,
)
from .witnesses import (  # noqa: E402
    CriterionResult,
    fourth_order_criterion,
    moment_matrix,
    nonlinear_squeezing,
    sum_variance,
    two_mode_criteria,
    variance_criterion,
    xp_covariance_criterion,
)
from .sampler import ClickHistogram, estimate_criterion, estimate_moments, sample  # noqa: E402
