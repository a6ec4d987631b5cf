"""Newton maps of exp(int h) for lacunary products h, with log-space certificates.

h(z) = prod (1 + (z/r_k)**n_k).  The Newton maps z - 1/h and z (1 - 1/h) are
iterated, rendered and checked against growth, pole and hyperbolic-distance
estimates, even when n_k is far beyond double-precision range.
"""

from .construction import (
    ConditionReport,
    ParameterSequence,
    PoleRing,
    ProductValue,
    Verdict,
    continuation_bound,
    eval_h,
    generate_strict,
    growth_check,
    growth_rhs,
    h_complex,
    nearest_pole_pair,
    pole_point,
    pole_residual,
    pole_ring,
    truncation_index,
    validate,
)
from .errors import *  # noqa: F401,F403
from .harness import (
    PRESETS,
    BasinImage,
    CertificateReport,
    SuiteConfig,
    load_config,
    render,
    run_suite,
    write_ppm,
)
from .hyperbolic import (
    DensityConstants,
    c01_density_lower,
    disk_automorphism,
    disk_dist,
    dist_lower_to_disk,
    normalizer,
    obstruction_certificate,
    obstruction_bound,
)
from .newton import (
    Classification,
    NewtonMap,
    OrbitRecord,
    fixed_point_residual,
    log_f,
    log_g_over_z,
    orbit,
    real_descent_check,
    step,
)
from .numerics import Angle, ExtReal, LogComplex, Point, reduce_angle

__version__ = "0.1.0"
