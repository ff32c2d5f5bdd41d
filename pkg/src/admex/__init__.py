"""Exact admissible exponents for biquadratic smooth Weyl sums."""

__version__ = "0.1.0"

from .exact import parse_decimal, render_ceiling, render_floor  # noqa: E402
from .exponents import (  # noqa: E402
    ExponentRecord,
    ExponentTable,
    HypothesisError,
    Lemma42Inputs,
    baseline_table,
    check_hypothesis_43,
    interpolate,
    kz_threshold,
    lemma42_star,
    phi0,
)
from .derivation import (  # noqa: E402
    DerivationConfig,
    compare_direct,
    curve_value,
    decay_constant,
    derive_at,
    dyadic_pass,
    fixed_point,
    optimize_kz,
)
