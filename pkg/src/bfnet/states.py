"""Single-mode input states as BF series, with their log-expansion coefficients.

Squeezing follows S(gamma) = exp(gamma (a^2 - a^dag^2) / 2) rotated by
``axis_phase``, so the squeezed vacuum has

    B(z) = (cosh gamma)^(-1/2) exp(-e^{2i axis_phase} tanh(gamma) z^2 / 2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np

from .bfseries import SingleModeSeries, series_exp, series_log


class ModeStateSpec:
    """Base for single-mode state descriptions."""

    kind = ""

    @property
    def gaussian(self) -> bool:
        return False

    def to_json(self) -> dict:
        out = {"type": self.kind}
        for k, v in asdict(self).items():
            out[k] = [v.real, v.imag] if isinstance(v, complex) else v
        return out


@dataclass(frozen=True)
class Coherent(ModeStateSpec):
    alpha: complex = 0j
    kind = "coherent"

    @property
    def gaussian(self) -> bool:
        return True


@dataclass(frozen=True)
class SqueezedVacuum(ModeStateSpec):
    gamma: float = 0.0
    axis_phase: float = 0.0
    kind = "squeezed"

    @property
    def gaussian(self) -> bool:
        return True


@dataclass(frozen=True)
class DisplacedSqueezed(ModeStateSpec):
    """D(y) S(gamma) |vac>."""

    y: complex = 0j
    gamma: float = 0.0
    axis_phase: float = 0.0
    kind = "displaced_squeezed"

    @property
    def gaussian(self) -> bool:
        return True


@dataclass(frozen=True)
class Fock(ModeStateSpec):
    n: int = 0
    kind = "fock"

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("photon number must be >= 0")


@dataclass(frozen=True)
class Cat(ModeStateSpec):
    """(|alpha> + parity |-alpha>), normalized."""

    alpha: complex = 1.0 + 0j
    parity: int = 1
    kind = "cat"

    def __post_init__(self):
        if self.parity not in (1, -1):
            raise ValueError("parity must be +1 or -1")
        if self.parity == -1 and self.alpha == 0:
            raise ValueError("odd cat state with alpha = 0 does not exist")


SPEC_TYPES = {cls.kind: cls for cls in (Coherent, SqueezedVacuum, DisplacedSqueezed, Fock, Cat)}


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float, complex)):
        raise ValueError(f"expected a number or [re, im], got {v!r}")
    return complex(v)


def spec_from_json(data: dict) -> ModeStateSpec:
    """Parse e.g. ``{"type": "squeezed", "gamma": 0.3, "axis_phase": 0.0}``."""
    if not isinstance(data, dict) or "type" not in data:
        raise ValueError("mode spec must be an object with a 'type' field")
    kind = data["type"]
    if kind not in SPEC_TYPES:
        raise ValueError(f"unknown mode type {kind!r}; expected one of {sorted(SPEC_TYPES)}")
    cls = SPEC_TYPES[kind]
    fields = set(cls.__dataclass_fields__)
    extra = set(data) - fields - {"type"}
    if extra:
        raise ValueError(f"unknown field(s) {sorted(extra)} for mode type {kind!r}")
    kwargs = {}
    for name, value in data.items():
        if name == "type":
            continue
        if name in ("alpha", "y"):
            kwargs[name] = _as_complex(value)
        elif name in ("n", "parity"):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"field {name!r} must be an integer")
            kwargs[name] = value
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"field {name!r} must be a real number")
            kwargs[name] = float(value)
    return cls(**kwargs)


def _inv_factorials(D: int) -> np.ndarray:
    return np.array([1.0 / math.factorial(k) for k in range(D + 1)])


def _gaussian_log_terms(spec) -> tuple[complex, complex, complex]:
    """Closed-form (constant, linear, quadratic) log coefficients."""
    if isinstance(spec, Coherent):
        a = complex(spec.alpha)
        return -0.5 * abs(a) ** 2 + 0j, a, 0j
    t = cmath.exp(2j * spec.axis_phase) * math.tanh(spec.gamma)
    const = -0.5 * math.log(math.cosh(spec.gamma))
    if isinstance(spec, SqueezedVacuum):
        return complex(const), 0j, -0.5 * t
    y = complex(spec.y)
    yc = y.conjugate()
    const = const - 0.5 * t * yc**2 - 0.5 * abs(y) ** 2
    # principal branch, to agree with a numerical log of the series
    const = complex(const.real, (const.imag + math.pi) % (2 * math.pi) - math.pi)
    return const, y + t * yc, -0.5 * t


def mode_series(spec: ModeStateSpec, max_degree: int) -> SingleModeSeries:
    """Normalized BF series of ``spec`` truncated at ``max_degree`` photons."""
    D = int(max_degree)
    if D < 1:
        raise ValueError("cutoff must be >= 1")
    c = np.zeros(D + 1, dtype=complex)
    if isinstance(spec, Coherent):
        a = complex(spec.alpha)
        c[:] = math.exp(-0.5 * abs(a) ** 2) * a ** np.arange(D + 1) * _inv_factorials(D)
    elif isinstance(spec, SqueezedVacuum):
        t = cmath.exp(2j * spec.axis_phase) * math.tanh(spec.gamma)
        c[0] = 1.0 / math.sqrt(math.cosh(spec.gamma))
        for m in range(1, D // 2 + 1):
            c[2 * m] = c[2 * m - 2] * (-0.5 * t) / m
    elif isinstance(spec, DisplacedSqueezed):
        g = np.zeros(D + 1, dtype=complex)
        k = min(3, D + 1)
        g[:k] = _gaussian_log_terms(spec)[:k]
        c[:] = series_exp(SingleModeSeries(D, g).as_multivariate()).coeffs
    elif isinstance(spec, Fock):
        if spec.n > D:
            raise ValueError(f"Fock state |{spec.n}> exceeds cutoff {D}")
        c[spec.n] = 1.0 / math.sqrt(math.factorial(spec.n))
    elif isinstance(spec, Cat):
        a = complex(spec.alpha)
        norm = 1.0 / math.sqrt(2.0 * (1.0 + spec.parity * math.exp(-2.0 * abs(a) ** 2)))
        n = np.arange(D + 1)
        c[:] = norm * math.exp(-0.5 * abs(a) ** 2) * (a**n + spec.parity * (-a) ** n) * _inv_factorials(D)
    else:
        raise TypeError(f"unsupported mode spec {spec!r}")
    return SingleModeSeries(D, c)


@dataclass(frozen=True)
class GCoefficients:
    """Coefficients lambda^(0..D) of G(z) = ln B(z) for one mode."""

    values: np.ndarray

    def __getitem__(self, d: int) -> complex:
        return complex(self.values[d]) if d < len(self.values) else 0j

    @property
    def max_degree(self) -> int:
        return len(self.values) - 1


def g_coefficients(spec: ModeStateSpec, max_degree: int) -> GCoefficients:
    """Log-expansion coefficients; closed form for Gaussian specs, numerical otherwise.

    Raises :class:`bfnet.bfseries.VacuumOverlapError` if the state has no
    vacuum component.
    """
    D = int(max_degree)
    if spec.gaussian:
        g = np.zeros(D + 1, dtype=complex)
        terms = _gaussian_log_terms(spec)
        g[: min(3, D + 1)] = terms[: min(3, D + 1)]
        return GCoefficients(g)
    return series_g_coefficients(mode_series(spec, D))


def series_g_coefficients(series: SingleModeSeries) -> GCoefficients:
    return GCoefficients(np.array(series_log(series.as_multivariate()).coeffs))


def rotate_spec(spec: ModeStateSpec, angle: float) -> ModeStateSpec:
    """Spec of exp(-i angle n)|psi>, i.e. the mode rephased by ``angle``.

    Its log coefficients pick up ``exp(-i d angle)`` at degree d.
    """
    rot = cmath.exp(-1j * angle)
    if isinstance(spec, Coherent):
        return Coherent(spec.alpha * rot)
    if isinstance(spec, SqueezedVacuum):
        return SqueezedVacuum(spec.gamma, spec.axis_phase - angle)
    if isinstance(spec, DisplacedSqueezed):
        return DisplacedSqueezed(spec.y * rot, spec.gamma, spec.axis_phase - angle)
    if isinstance(spec, Cat):
        return Cat(spec.alpha * rot, spec.parity)
    if isinstance(spec, Fock):
        return spec
    raise TypeError(f"unsupported mode spec {spec!r}")
