from .functions import (
    AtomTableRf,
    ClosedFormRf,
    DensityRatioRf,
    GridDensity,
    GridRatioRf,
    ReductionFunction,
    RfKind,
)
from .discrete import (
    DiscreteIdFamily,
    alpha_convolve,
    build_family,
    cumulant_coeffs,
    generator_series,
    lagrange_family,
    reduction_fn,
    rho_from_c,
    rho_via_generator,
)
from .continuous import FormulaReport, QvfSpec, ig_rf, pvf_rf, qvf_rf, ressel_rf, table_one
from .oracle import IdentityCheck, laplace_oracle, master_identity
from .validation import FamilyReport, build_reduction_function, validate_family

__all__ = [
    'AtomTableRf', 'ClosedFormRf', 'DensityRatioRf', 'GridDensity', 'GridRatioRf',
    'ReductionFunction', 'RfKind',
    'DiscreteIdFamily', 'alpha_convolve', 'build_family', 'cumulant_coeffs', 'generator_series',
    'lagrange_family', 'reduction_fn', 'rho_from_c', 'rho_via_generator',
    'FormulaReport', 'QvfSpec', 'ig_rf', 'pvf_rf', 'qvf_rf', 'ressel_rf', 'table_one',
    'IdentityCheck', 'laplace_oracle', 'master_identity',
    'FamilyReport', 'build_reduction_function', 'validate_family',
]
