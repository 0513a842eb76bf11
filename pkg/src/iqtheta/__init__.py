"""Theta constants over imaginary quadratic fields and Riemann-type relations."""

from .errors import (
    DomainError,
    FieldMismatchError,
    GroupCapError,
    SingularMatrixError,
    SublatticeError,
    TruncationError,
)
from .kfield import FieldId, KElement, KMatrix, Rational, hat, re_trace_of_product
from .lattices import (
    FiniteAbelianGroup,
    IntLattice,
    character_group,
    character_orthogonality_report,
    character_phase,
    shift_group,
)
from .presets import (
    DEFAULT_SUITE_PLAN,
    PRESET_NAMES,
    IdentityCheck,
    IdentityReport,
    Preset,
    SuiteResult,
    ThetaFactor,
    bracket_to_characteristic,
    default_omega_samples,
    default_W_samples,
    make_preset,
    run_paper_suite,
)
from .relations import (
    PDecomposition,
    RelationInstance,
    RelationSpec,
    RelationTerm,
    VerificationReport,
    build_relation,
    decompose_rational_P,
    evaluate_relation,
)
from .thetas import (
    ThetaCache,
    ThetaParams,
    ThetaValue,
    choose_radius,
    in_type1_domain,
    riemann_theta_z0,
    shell_tail_bound,
    theta_check_variant,
    theta_general,
)

__all__ = [
    "DomainError",
    "FieldMismatchError",
    "GroupCapError",
    "SingularMatrixError",
    "SublatticeError",
    "TruncationError",
    "FieldId",
    "KElement",
    "KMatrix",
    "Rational",
    "hat",
    "re_trace_of_product",
    "FiniteAbelianGroup",
    "IntLattice",
    "character_group",
    "character_orthogonality_report",
    "character_phase",
    "shift_group",
    "DEFAULT_SUITE_PLAN",
    "PRESET_NAMES",
    "IdentityCheck",
    "IdentityReport",
    "Preset",
    "SuiteResult",
    "ThetaFactor",
    "bracket_to_characteristic",
    "default_omega_samples",
    "default_W_samples",
    "make_preset",
    "run_paper_suite",
    "PDecomposition",
    "RelationInstance",
    "RelationSpec",
    "RelationTerm",
    "VerificationReport",
    "build_relation",
    "decompose_rational_P",
    "evaluate_relation",
    "ThetaCache",
    "ThetaParams",
    "ThetaValue",
    "choose_radius",
    "in_type1_domain",
    "riemann_theta_z0",
    "shell_tail_bound",
    "theta_check_variant",
    "theta_general",
]
