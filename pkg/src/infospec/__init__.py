"""Exact information-spectrum computations for compound channels.

The package enumerates length-``n`` sequence spaces to obtain exact
distributions of normalized information densities per channel state, turns
them into finite-blocklength rate estimates, builds greedy compound codebooks
with exact error evaluation, and checks achievability and converse bounds.
"""

from .bounds import (
    BoundReport,
    best_gamma,
    feinstein_bound,
    geometric_weights,
    mixed_capacity_estimate,
    mixture_kernel,
    sandwich,
    strong_converse_diag,
    uniformity_diag,
    verdu_han_bound,
    worst_case_vs_compound,
)
from .channel import (
    ENUMERATION_CAP,
    Alphabet,
    ChannelFamily,
    ChannelState,
    InputDistribution,
    TruncationRule,
    ValidationReport,
    block_kernel,
    output_marginal,
    validate,
)
from .coding import Codebook, ErrorReport, build_feinstein, code_spectrum, decode, error_probabilities
from .errors import (
    ConfigError,
    DomainError,
    InfospecError,
    InvariantViolation,
    ResourceCapError,
    UnsupportedError,
    UsageError,
)
from .reports import DiagReport, Verdict
from .scenarios import avc_demo, example1, example2, example3_quantized, example4, noise_distribution
from .spectrum import (
    CompoundSequenceFamily,
    RateEstimate,
    Spectrum,
    SpectrumStats,
    check_tail,
    compound_cdf,
    compound_op,
    divergence_density,
    entropy_density,
    info_density,
    rate_estimate,
    spectrum_exact,
    spectrum_mc,
    spectrum_stats,
    stability_diag,
)

__all__ = [name for name in dir() if not name.startswith("_")]
