"""Exact inversion of formal power series maps ``F = X + H`` over Q and F_p."""
from .errors import (
    CompositionDomainError,
    FieldDivisionByZero,
    FieldMismatchError,
    FpsError,
    InternalVerificationError,
    InvalidParameterError,
    NonInvertibleDenominatorError,
    NotNormalFormError,
    NotOriginPreservingError,
    ParseError,
    PrecisionError,
    ShapeError,
    SingularLinearPartError,
    UnsupportedFieldError,
    ValidationError,
)
from .field import QQ, FieldElement, FieldKind, FieldSpec, fe_add, fe_from_ratio, fe_inv, fe_mul, is_prime
from .inverter import (
    InversionProblem,
    InversionResult,
    InversionTrace,
    VerificationResult,
    Witness,
    alternating_sum,
    delta_step,
    fixed_point_invert,
    invert_map,
    invert_series,
    iterates,
    normalize_linear,
    order_bound,
    order_violations,
    stabilization_violations,
    steps_needed,
    telescoping_residual,
    validate_problem,
    verify_inverse,
)
from .lang import (
    expand_elementary,
    format_map,
    format_series,
    map_from_json,
    map_to_json,
    map_to_text,
    parse_map,
    parse_sections,
    parse_source,
)
from .series import (
    INFINITY,
    PowerTable,
    SeriesMap,
    TruncatedSeries,
    identity_map,
    map_compose,
    ps_add,
    ps_compose,
    ps_distance,
    ps_homogeneous,
    ps_mul,
    ps_neg,
    ps_order,
    ps_pow,
    ps_scale,
    ps_sub,
    ps_truncate,
)
from .symmetry import (
    Check,
    SymmetryReport,
    extract_polynomial_inverse,
    map_power,
    mu_indices,
    q_decomposition_check,
    q_sequence,
    symmetry_residual,
)

__version__ = "0.1.0"
