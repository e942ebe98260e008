from .discrete import (
    AbelFamily,
    BinomialFamily,
    LargeArcsineFamily,
    NegativeBinomialFamily,
    PoissonFamily,
    StrictArcsineFamily,
    TakacsFamily,
    arcsine_polynomial,
)
from .continuous import (
    GammaFamily,
    GhsFamily,
    InverseGaussianFamily,
    NormalFamily,
    PvfFamily,
    PvfSpec,
    ResselFamily,
    ressel_convolution_power,
)
from .registry import default_families, family_names, get_family, is_discrete, parse_family_name

__all__ = [
    'AbelFamily', 'BinomialFamily', 'LargeArcsineFamily', 'NegativeBinomialFamily',
    'PoissonFamily', 'StrictArcsineFamily', 'TakacsFamily', 'arcsine_polynomial',
    'GammaFamily', 'GhsFamily', 'InverseGaussianFamily', 'NormalFamily', 'PvfFamily',
    'PvfSpec', 'ResselFamily', 'ressel_convolution_power',
    'default_families', 'family_names', 'get_family', 'is_discrete', 'parse_family_name'
]
