"""Causal structure recovery for linear SEMs with latent confounders and measurement error."""

from .assumptions import (
    FaithfulnessReport,
    FaithfulnessViolation,
    check_conventional_faithfulness,
    check_lvsemme_faithfulness,
    minimal_bottleneck_size,
    numerical_rank,
    submatrix_rank,
)
from .equivalence import (
    SwitchError,
    enumerate_equivalents,
    models_equal_mixing,
    reduce_latent,
    same_unlabeled_structure,
    switch_center,
)
from .grouping import Group, OrderedGrouping, compute_aog, compute_dog
from .mixing import (
    DEFAULT_TOL,
    MixingMatrix,
    StripError,
    SupportPattern,
    build_w,
    build_w_star,
    canonical_column_form,
    match_up_to_permutation_scaling,
    shuffle_and_scale,
    strip_measurement_columns,
    support,
)
from .model import (
    CanonicalModel,
    Edge,
    Kind,
    Variable,
    Violation,
    ancestors,
    descendants,
    edge_identifiable_lv,
    edge_identifiable_me,
    is_minimal,
    possible_parents,
    total_effects,
    validate_canonical,
)
from .recovery import (
    RecoveredModel,
    RecoveryError,
    dog_filter,
    edge_count,
    enumerate_class,
    parameters_match,
    recover_aog,
)
from .simgen import (
    GenerationError,
    GeneratorConfig,
    NoiseSpec,
    export_dot,
    generate_model,
    perturb_matrix,
    sample_data,
)

__version__ = "0.1.0"
