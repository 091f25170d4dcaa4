"""Learning a population's preference over group-fairness notions from Likert feedback."""

from .fairness import (
    NOTIONS,
    DataTuple,
    DonorRecord,
    FairnessProfile,
    GroupSpec,
    MatchRecord,
    ValidationError,
    discretize_prediction,
    fairness_profile,
    groupwise_rate,
    pooled_profile,
    profile_matrix,
)
from .feedback import (
    FeedbackParams,
    aggregate_evaluation,
    build_partition,
    feedback_distribution,
    interval_mass,
    sample_score,
    utility_vector,
)
from .learner import (
    LearnerConfig,
    LearnRun,
    ResponseSet,
    feedback_regret,
    one_hot,
    project_simplex,
    saff_learn,
    softmax_jacobian,
    srg,
    utility_gradient,
)

__version__ = "0.1.0"
