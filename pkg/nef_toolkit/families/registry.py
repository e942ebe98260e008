import re
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Tuple

from nef_toolkit.core.nef import Nef
from nef_toolkit.errors import UnknownFamily
from nef_toolkit.infrastructure.logging import get_logger

from .continuous import (
    GammaFamily,
    GhsFamily,
    InverseGaussianFamily,
    NormalFamily,
    PvfFamily,
    PvfSpec,
    ResselFamily,
)
from .discrete import (
    AbelFamily,
    BinomialFamily,
    LargeArcsineFamily,
    NegativeBinomialFamily,
    PoissonFamily,
    StrictArcsineFamily,
    TakacsFamily,
)


logger = get_logger(__name__)

_NAME = re.compile(r"^\s*([a-z][a-z\-]*)\s*(?:\(\s*([^)]*)\)\s*)?$")


def _integer(value: float) -> int:
    if not float(value).is_integer():
        raise ValueError(f"expected an integer parameter, got {value}")
    return int(value)


# name -> (factory, default parameters)
_FACTORIES: Dict[str, Tuple[Callable[..., Nef], Tuple[float, ...]]] = {
    "poisson": (lambda: PoissonFamily(), ()),
    "binomial": (lambda m: BinomialFamily(_integer(m)), (2,)),
    "negbin": (lambda m: NegativeBinomialFamily(m), (2,)),
    "gamma": (lambda m: GammaFamily(m), (2,)),
    "normal": (lambda: NormalFamily(), ()),
    "ghs": (lambda m: GhsFamily(m), (1,)),
    "abel": (lambda: AbelFamily(), ()),
    "takacs": (lambda: TakacsFamily(), ()),
    "strict-arcsine": (lambda: StrictArcsineFamily(), ()),
    "large-arcsine": (lambda: LargeArcsineFamily(), ()),
    "inverse-gaussian": (lambda: InverseGaussianFamily(), ()),
    "ressel": (lambda: ResselFamily(), ()),
    "pvf": (lambda r, a=1.0: PvfFamily(PvfSpec(r=r, a=a)), (1.5,)),
}

DISCRETE_FAMILIES = ("poisson", "binomial", "negbin", "abel", "takacs", "strict-arcsine", "large-arcsine")


def parse_family_name(name: str) -> Tuple[str, Tuple[float, ...]]:
    """Split ``"negbin(3)"`` into ``("negbin", (3.0,))``."""
    match = _NAME.match(name.lower()) if name else None
    if not match or match.group(1) not in _FACTORIES:
        raise UnknownFamily(f"unknown family {name!r}", {"family": name, "known": family_names()})
    base, raw = match.group(1), match.group(2)
    if raw is None or not raw.strip():
        return base, _FACTORIES[base][1]
    try:
        params = tuple(float(part) for part in raw.split(","))
    except ValueError:
        raise UnknownFamily(f"bad parameters in family name {name!r}", {"family": name})
    return base, params


@lru_cache(maxsize=64)
def _build(base: str, params: Tuple[float, ...]) -> Nef:
    factory, _ = _FACTORIES[base]
    logger.debug(f"Building family {base}{params}")
    return factory(*params)


def get_family(name: str) -> Nef:
    """Family addressed by its registry name, e.g. ``"poisson"`` or ``"pvf(2.5)"``."""
    base, params = parse_family_name(name)
    try:
        return _build(base, params)
    except TypeError:
        raise UnknownFamily(f"wrong number of parameters for {base!r}", {"family": name})
    except ValueError as e:
        raise UnknownFamily(str(e), {"family": name})


def family_names() -> List[str]:
    return list(_FACTORIES)


def default_families(include_pvf_case2: bool = True) -> List[Nef]:
    """One instance per registered family at its default parameters."""
    families = [get_family(name) for name in _FACTORIES]
    if include_pvf_case2:
        families.append(get_family("pvf(2.5)"))
    return families


def is_discrete(name_or_family) -> bool:
    label = name_or_family if isinstance(name_or_family, str) else name_or_family.label
    return parse_family_name(label)[0] in DISCRETE_FAMILIES
