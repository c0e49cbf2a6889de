"""Distribution families: the three null families and the power-study laws.

The null families (Weibull, Pareto type I, Frechet) share the scale-power
structure F(x) = F0((x/c)^phi), so each is described by its standard member
F0 plus the (c, phi) reparameterization. The module also provides the eight
alternative distributions used in power studies, parsed from a compact
string grammar such as ``W(1.5,1)+1`` or ``LN(2.5)``.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import ConfigError, DomainError
from .special import EULER_GAMMA, exp_integral_e1


class Family(enum.Enum):
    """Null family selector."""

    WEIBULL = "weibull"
    PARETO = "pareto"
    FRECHET = "frechet"

    @classmethod
    def parse(cls, text: str) -> "Family":
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ConfigError(f"unknown family {text!r} (expected one of {names})")


@dataclass(frozen=True)
class ParamPair:
    """Scale/shape pair (c, phi) of a scale-power family member."""

    c: float
    phi: float

    def __post_init__(self):
        if not (self.c > 0 and self.phi > 0):
            raise DomainError(f"parameters must be positive, got c={self.c}, phi={self.phi}")


STANDARD_PARAMS = ParamPair(1.0, 1.0)


# ---------------------------------------------------------------------------
# Null-family functions.
# ---------------------------------------------------------------------------

#: Below this t the Frechet minCF term t*E1(t) is replaced by its
#: small-argument form t*(-euler_gamma - log t); the neglected part is O(t^2).
_FRECHET_SMALL_T = 1e-10


def null_min_cf(family: Family, t):
    """Min-characteristic function psi0(t) = E min{1, tX} of the standard member.

    Weibull: t(1 - e^(-1/t)); Pareto: t(1 - log t) for t <= 1, else 1;
    Frechet: 1 - e^(-t) + t*E1(t). Accepts scalars or arrays; t must be > 0.
    """
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(arr > 0):
        raise DomainError("null_min_cf requires t > 0")

    if family is Family.WEIBULL:
        out = arr * (-np.expm1(-1.0 / arr))
    elif family is Family.PARETO:
        out = np.where(arr <= 1.0, arr * (1.0 - np.log(arr)), 1.0)
    elif family is Family.FRECHET:
        out = -np.expm1(-arr)
        tiny = arr < _FRECHET_SMALL_T
        big = arr >= _FRECHET_SMALL_T
        if np.any(big):
            out[big] += arr[big] * exp_integral_e1(arr[big])
        if np.any(tiny):
            out[tiny] += arr[tiny] * (-EULER_GAMMA - np.log(arr[tiny]))
    else:
        raise DomainError(f"unknown family {family!r}")
    return float(out[0]) if scalar else out.reshape(np.shape(t))


def null_density(family: Family, params: ParamPair, x):
    """Density (phi/c)(x/c)^(phi-1) f0((x/c)^phi); zero outside the support."""
    c, phi = params.c, params.phi
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)

    # Densities are assembled as exp(log density) so that extreme abscissae
    # underflow to zero instead of tripping inf*0.
    with np.errstate(over="ignore"):
        if family is Family.WEIBULL:
            m = arr > 0
            lr = np.log(arr[m] / c)
            out[m] = np.exp(np.log(phi / c) + (phi - 1.0) * lr - np.exp(phi * lr))
        elif family is Family.PARETO:
            m = arr > c
            out[m] = np.exp(np.log(phi / c) - (phi + 1.0) * np.log(arr[m] / c))
        elif family is Family.FRECHET:
            m = arr > 0
            lr = np.log(arr[m] / c)
            out[m] = np.exp(np.log(phi / c) - (1.0 + phi) * lr - np.exp(-phi * lr))
        else:
            raise DomainError(f"unknown family {family!r}")
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def null_cdf(family: Family, params: ParamPair, x):
    """Distribution function F0((x/c)^phi); zero at or below the support edge."""
    c, phi = params.c, params.phi
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)

    if family is Family.WEIBULL:
        m = arr > 0
        out[m] = -np.expm1(-((arr[m] / c) ** phi))
    elif family is Family.PARETO:
        m = arr > c
        out[m] = -np.expm1(phi * np.log(c / arr[m]))
    elif family is Family.FRECHET:
        m = arr > 0
        out[m] = np.exp(-((arr[m] / c) ** -phi))
    else:
        raise DomainError(f"unknown family {family!r}")
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def null_quantile(family: Family, params: ParamPair, u):
    """Inverse distribution function at u in (0, 1)."""
    c, phi = params.c, params.phi
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all((arr >= 0) & (arr < 1)):
        raise DomainError("quantile requires u in [0, 1)")

    if family is Family.WEIBULL:
        out = c * (-np.log1p(-arr)) ** (1.0 / phi)
    elif family is Family.PARETO:
        out = c * (1.0 - arr) ** (-1.0 / phi)
    elif family is Family.FRECHET:
        out = c * (-np.log(np.maximum(arr, 1e-300))) ** (-1.0 / phi)
    else:
        raise DomainError(f"unknown family {family!r}")
    return float(out[0]) if scalar else out.reshape(np.shape(u))


def sample_null(family: Family, params: ParamPair, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n variates from the family member by inverse transform."""
    if n < 1:
        raise DomainError("sample size must be at least 1")
    return null_quantile(family, params, rng.random(n))


# ---------------------------------------------------------------------------
# Alternative distributions for power studies.
# ---------------------------------------------------------------------------

_ALT_NAMES = {
    "W": "W", "P": "P", "G": "G", "GAMMA": "G", "LN": "LN",
    "HN": "HN", "LFR": "LFR", "CH": "CH", "F": "F",
}
_TWO_PARAM = {"W", "P", "G", "F"}
_ONE_PARAM = {"HN", "LFR", "CH"}

_SPEC_RE = re.compile(
    r"""^\s*([A-Za-z]+)\s*\(\s*([^()]*?)\s*\)\s*(?:\+\s*([0-9.eE+-]+)\s*)?$"""
)


@dataclass(frozen=True)
class AlternativeSpec:
    """A power-study sampling law: name, parameters, optional location shift."""

    name: str
    params: tuple[float, ...]
    shift: float = 0.0

    def __post_init__(self):
        if self.name not in _ALT_NAMES.values():
            raise ConfigError(f"unknown alternative name {self.name!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        k = len(self.params)
        if self.name in _TWO_PARAM and k != 2:
            raise ConfigError(f"{self.name} takes 2 parameters, got {k}")
        if self.name in _ONE_PARAM and k != 1:
            raise ConfigError(f"{self.name} takes 1 parameter, got {k}")
        if self.name == "LN" and k not in (1, 2):
            raise ConfigError(f"LN takes 1 or 2 parameters, got {k}")
        # Lognormal's first parameter of two is a log-scale location and may
        # be any real; every other parameter must be positive.
        positives = self.params[1:] if (self.name == "LN" and k == 2) else self.params
        if not all(p > 0 for p in positives):
            raise ConfigError(f"parameters of {self} must be positive")
        if self.shift < 0:
            raise ConfigError("shift must be nonnegative")

    def __str__(self):
        body = ",".join(f"{p:g}" for p in self.params)
        s = f"{self.name}({body})"
        if self.shift:
            s += f"+{self.shift:g}"
        return s

    @property
    def mu_sigma(self) -> tuple[float, float]:
        """Lognormal (mu, sigma); single-parameter form means mu = 0."""
        if self.name != "LN":
            raise ConfigError("mu_sigma is only defined for LN")
        return (0.0, self.params[0]) if len(self.params) == 1 else self.params


def parse_alternative(text: str) -> AlternativeSpec:
    """Parse a spec string like ``W(1.5,1)+1``, ``LN(2.5)`` or ``CH(0.8)+1``.

    Names are case-insensitive; ``G`` and ``Gamma`` both denote the gamma
    distribution.
    """
    m = _SPEC_RE.match(text)
    if m is None:
        raise ConfigError(f"cannot parse alternative spec {text!r}")
    raw_name, raw_params, raw_shift = m.groups()
    name = _ALT_NAMES.get(raw_name.upper())
    if name is None:
        raise ConfigError(f"unknown alternative name {raw_name!r} in {text!r}")
    try:
        params = tuple(float(p) for p in raw_params.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"bad parameter list in {text!r}")
    shift = float(raw_shift) if raw_shift is not None else 0.0
    return AlternativeSpec(name=name, params=params, shift=shift)


def alternative_support(spec: AlternativeSpec) -> float:
    """Infimum of the support (the essential minimum of the law)."""
    if spec.name == "P":
        return spec.shift + spec.params[1]
    return spec.shift


def sample_alternative(spec: AlternativeSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n variates from the alternative law, then apply the shift.

    Laws with a closed-form inverse use one uniform per variate; the gamma
    uses the generator's native routine and the halfnormal uses Box-Muller.
    """
    if n < 1:
        raise DomainError("sample size must be at least 1")
    name = spec.name

    if name == "G":
        shape, scale = spec.params
        x = rng.standard_gamma(shape, n) * scale
    elif name == "HN":
        theta = spec.params[0]
        u1, u2 = rng.random(n), rng.random(n)
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        x = theta * np.abs(z)
    else:
        u = rng.random(n)
        if name == "W":
            shape, scale = spec.params
            x = scale * (-np.log1p(-u)) ** (1.0 / shape)
        elif name == "P":
            shape, scale = spec.params
            x = scale * (1.0 - u) ** (-1.0 / shape)
        elif name == "F":
            shape, scale = spec.params
            x = scale * (-np.log(np.maximum(u, 1e-300))) ** (-1.0 / shape)
        elif name == "LN":
            mu, sigma = spec.mu_sigma
            x = np.exp(mu + sigma * _sp.ndtri(np.clip(u, 1e-300, 1.0 - 1e-16)))
        elif name == "LFR":
            theta = spec.params[0]
            e = -np.log1p(-u)
            x = 2.0 * e / (1.0 + np.sqrt(1.0 + 2.0 * theta * e))
        elif name == "CH":
            theta = spec.params[0]
            x = np.log1p(-np.log1p(-u) / 2.0) ** (1.0 / theta)
        else:  # pragma: no cover
            raise ConfigError(f"unknown alternative {name!r}")
    return x + spec.shift


def alternative_density(spec: AlternativeSpec, x):
    """Density of the (shifted) alternative law; zero outside the support."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr) - spec.shift
    out = np.zeros_like(arr)
    name = spec.name

    # exp(log density) form: extreme abscissae underflow to zero rather than
    # hitting inf*0.
    with np.errstate(over="ignore", invalid="ignore"):
        if name == "P":
            shape, scale = spec.params
            m = arr > scale
            out[m] = np.exp(np.log(shape / scale) - (shape + 1.0) * np.log(arr[m] / scale))
        else:
            m = arr > 0
            v = arr[m]
            if name == "W":
                shape, scale = spec.params
                lr = np.log(v / scale)
                out[m] = np.exp(np.log(shape / scale) + (shape - 1.0) * lr - np.exp(shape * lr))
            elif name == "G":
                shape, scale = spec.params
                out[m] = np.exp(
                    (shape - 1.0) * np.log(v) - v / scale
                    - shape * math.log(scale) - _sp.gammaln(shape)
                )
            elif name == "LN":
                mu, sigma = spec.mu_sigma
                out[m] = np.exp(
                    -((np.log(v) - mu) ** 2) / (2.0 * sigma ** 2) - np.log(v)
                    - math.log(sigma * math.sqrt(2.0 * math.pi))
                )
            elif name == "HN":
                theta = spec.params[0]
                out[m] = np.exp(
                    math.log(math.sqrt(2.0 / math.pi) / theta) - v * v / (2.0 * theta ** 2)
                )
            elif name == "LFR":
                theta = spec.params[0]
                out[m] = np.exp(np.log1p(theta * v) - v - 0.5 * theta * v * v)
            elif name == "CH":
                theta = spec.params[0]
                w = v ** theta
                expo = np.where(w < 700.0, w - 2.0 * np.expm1(np.minimum(w, 700.0)), -np.inf)
                out[m] = np.exp(np.log(2.0 * theta) + (theta - 1.0) * np.log(v) + expo)
            elif name == "F":
                shape, scale = spec.params
                lr = np.log(v / scale)
                out[m] = np.exp(
                    np.log(shape / scale) - (1.0 + shape) * lr - np.exp(-shape * lr)
                )
            else:  # pragma: no cover
                raise ConfigError(f"unknown alternative {name!r}")
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def alternative_cdf(spec: AlternativeSpec, x):
    """Distribution function of the (shifted) alternative law."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr) - spec.shift
    out = np.zeros_like(arr)
    name = spec.name

    if name == "P":
        shape, scale = spec.params
        m = arr > scale
        out[m] = -np.expm1(shape * np.log(scale / arr[m]))
    else:
        m = arr > 0
        v = arr[m]
        if name == "W":
            shape, scale = spec.params
            out[m] = -np.expm1(-((v / scale) ** shape))
        elif name == "G":
            shape, scale = spec.params
            out[m] = _sp.gammainc(shape, v / scale)
        elif name == "LN":
            mu, sigma = spec.mu_sigma
            out[m] = _sp.ndtr((np.log(v) - mu) / sigma)
        elif name == "HN":
            theta = spec.params[0]
            out[m] = _sp.erf(v / (theta * math.sqrt(2.0)))
        elif name == "LFR":
            theta = spec.params[0]
            out[m] = -np.expm1(-v - 0.5 * theta * v ** 2)
        elif name == "CH":
            theta = spec.params[0]
            out[m] = -np.expm1(-2.0 * np.expm1(v ** theta))
        elif name == "F":
            shape, scale = spec.params
            out[m] = np.exp(-((v / scale) ** -shape))
        else:  # pragma: no cover
            raise ConfigError(f"unknown alternative {name!r}")
    return float(out[0]) if scalar else out.reshape(np.shape(x))
