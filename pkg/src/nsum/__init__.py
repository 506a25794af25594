"""Network scale-up estimators, their error bounds and a simulation harness."""

from .bounds import (
    BoundResult,
    adversarial_lower_bound,
    chernoff_lower,
    chernoff_two_sided,
    er_ros_bound,
    f_bound,
    fullsampling_worstcase,
    mor_bound,
    ros_bound_pmf,
    ros_bound_simple,
    rs_pmf_convolution,
    sample_size,
    sf_ros_bound,
)
from .core import (
    ArdRecord,
    ArdSet,
    DegenerateSampleError,
    DegreeDistribution,
    DiscretePmf,
    ErrorReport,
    Instance,
    PrevalenceEstimate,
    ZeroDegreeError,
    compute_errors,
)
from .estimators import (
    Sample,
    draw_sample,
    empirical_rs_pmf,
    estimate_fs,
    estimate_mor,
    estimate_ros,
    extract_ard,
)
from .graphgen import (
    GeneratorConfig,
    build_adversarial_pair,
    build_clique_pendant,
    build_star_instance,
    degree_dist_er_truncated,
    degree_dist_explicit,
    degree_dist_scale_free,
    generate,
)

__version__ = "0.1.0"
