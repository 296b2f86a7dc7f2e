"""Closed-form center-manifold objects at L = 2 pi and the decay-law fit.

At the critical length 2 pi the null direction of the linear operator is
``phi(x) = (1 - cos x) / sqrt(3 pi)``.  Its quadratic companion ``a(x)``
solves ``a' + a''' + phi phi' = 0`` with ``a(0) = a(2pi) = a'(2pi) = 0``
and ``<a, phi> = 0``.  The amplitude ``p = <y, phi>`` then obeys
``dp/dt = <a phi, phi'> p^3 + O(p^4) = -p^3/18 + O(p^4)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, WrongLengthError
from .grid import Grid, GridFunction, inner_product, l2_norm, sample

TWO_PI = 2.0 * math.pi
DECAY_COEFFICIENT = -1.0 / 18.0
CUBIC_DEVIATION_THRESHOLD = 0.05
MIN_FIT_SAMPLES = 10

_PHI_SCALE = 1.0 / math.sqrt(3.0 * math.pi)
_C1 = 2.0 / (27.0 * math.pi)
_C2 = -11.0 / (108.0 * math.pi)
_S = 1.0 / (6.0 * math.pi)  # coefficient of x sin x
_Q = 1.0 / (36.0 * math.pi)  # coefficient of cos 2x


def is_two_pi(length: float) -> bool:
    return abs(length - TWO_PI) <= 1e-9


def _require_two_pi(grid: Grid):
    if not is_two_pi(grid.length):
        raise WrongLengthError(f"closed-form profiles exist only for L = 2 pi, got L = {grid.length}")


class ClosedFormProfile:
    """A closed-form field with hand-derived derivatives up to third order."""

    def __init__(self, name, f, d1, d2, d3):
        self.name = name
        self._derivs = (f, d1, d2, d3)

    def __call__(self, x, order: int = 0):
        return self._derivs[order](np.asarray(x, dtype=float))

    def sample(self, grid: Grid) -> GridFunction:
        _require_two_pi(grid)
        return sample(self._derivs[0], grid)


PHI = ClosedFormProfile(
    "phi",
    lambda x: _PHI_SCALE * (1.0 - np.cos(x)),
    lambda x: _PHI_SCALE * np.sin(x),
    lambda x: _PHI_SCALE * np.cos(x),
    lambda x: -_PHI_SCALE * np.sin(x),
)

# a = C1 + C2 cos x - sin x / 3 + S x sin x + Q cos 2x
A_PROFILE = ClosedFormProfile(
    "a",
    lambda x: _C1 + _C2 * np.cos(x) - np.sin(x) / 3 + _S * x * np.sin(x) + _Q * np.cos(2 * x),
    lambda x: -_C2 * np.sin(x) - np.cos(x) / 3 + _S * (np.sin(x) + x * np.cos(x)) - 2 * _Q * np.sin(2 * x),
    lambda x: -_C2 * np.cos(x) + np.sin(x) / 3 + _S * (2 * np.cos(x) - x * np.sin(x)) - 4 * _Q * np.cos(2 * x),
    lambda x: _C2 * np.sin(x) + np.cos(x) / 3 + _S * (-3 * np.sin(x) - x * np.cos(x)) + 8 * _Q * np.sin(2 * x),
)


def phi_profile(grid: Grid) -> GridFunction:
    return PHI.sample(grid)


def a_profile(grid: Grid) -> GridFunction:
    return A_PROFILE.sample(grid)


def a_pde_residual(samples: int = 1000) -> float:
    """Max of ``|a' + a''' + phi phi'|`` on ``samples`` points of [0, 2 pi]."""
    if samples < 100:
        raise ValueError("samples must be >= 100")
    x = np.linspace(0.0, TWO_PI, samples)
    return float(np.max(np.abs(A_PROFILE(x, 1) + A_PROFILE(x, 3) + PHI(x) * PHI(x, 1))))


def coefficient_quadrature(grid: Grid) -> float:
    """Trapezoid value of ``int a phi phi' dx``; the cubic decay coefficient."""
    _require_two_pi(grid)
    x = grid.nodes
    return float(grid.h * np.sum(A_PROFILE(x) * PHI(x) * PHI(x, 1)))


def companion_quadratures(grid: Grid) -> dict:
    """The integrals the reduction relies on, by the same trapezoid rule."""
    _require_two_pi(grid)
    x = grid.nodes
    phi, dphi, a = PHI(x), PHI(x, 1), A_PROFILE(x)
    h = grid.h
    return {
        "phi_sq": float(h * np.sum(phi * phi)),
        "a_phi": float(h * np.sum(a * phi)),
        "phi_sq_dphi": float(h * np.sum(phi * phi * dphi)),
        "a": float(h * np.sum(a)),
        "a_phi_dphi": float(h * np.sum(a * phi * dphi)),
    }


def project_p(y: GridFunction) -> float:
    _require_two_pi(y.grid)
    return float(inner_product(y, phi_profile(y.grid)))


def manifold_residual(y: GridFunction) -> tuple[float, float]:
    """``(p, |(y - p phi) - p^2 a|)``: distance from the quadratic manifold."""
    _require_two_pi(y.grid)
    phi = phi_profile(y.grid)
    a = a_profile(y.grid)
    p = float(inner_product(y, phi))
    rest = y.values - p * phi.values - p * p * a.values
    return p, float(math.sqrt(y.grid.h) * np.linalg.norm(rest))


def reduced_closed_form(p0, t):
    """Solution of ``dp/dt = -p^3/18`` with ``p(0) = p0``."""
    p0 = np.asarray(p0, dtype=float)
    arg = 1.0 + p0**2 * np.asarray(t, dtype=float) / 9.0
    if np.any(arg <= 0):
        raise ValueError("reduced law undefined: 1 + p0^2 t / 9 must be positive")
    out = p0 / np.sqrt(arg)
    return float(out) if out.ndim == 0 else out


@dataclass
class DecayFit:
    c_fit: float
    relative_error: float
    closed_form_deviation: float
    window: tuple
    samples: int
    delta: float = float("nan")
    residual_table: list = field(default_factory=list)

    @property
    def cubic(self) -> bool:
        """False when the trace does not follow the cubic law at all."""
        return self.closed_form_deviation <= CUBIC_DEVIATION_THRESHOLD

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "c_fit": self.c_fit,
            "target": DECAY_COEFFICIENT,
            "relative_error": self.relative_error,
            "closed_form_deviation": self.closed_form_deviation,
            "cubic": self.cubic,
            "window": list(self.window),
            "samples": self.samples,
            "residual_table": self.residual_table,
        }


def fit_decay(times, p, window=None) -> DecayFit:
    """Fit ``dp/dt = c p^3`` through the line ``p^-2 = p(t_a)^-2 - 2 c (t - t_a)``.

    Accepts raw arrays or a :class:`SimulationTrace` as ``times`` (with
    ``p`` omitted).  ``window`` defaults to the second half of the record.
    Also reports the largest relative gap between ``p`` and the reference
    law started from ``p(t_a)``.
    """
    if p is None:
        times, p = times.times, times.p
    times = np.asarray(times, dtype=float)
    p = np.asarray(p, dtype=float)
    if window is None:
        window = (0.5 * (times[0] + times[-1]), times[-1])
    t_a, t_b = window
    if t_a < times[0] - 1e-9 or t_b > times[-1] + 1e-9 or t_a >= t_b:
        raise ConfigurationError(f"window {window} is not inside the trace [{times[0]}, {times[-1]}]")
    sel = (times >= t_a - 1e-9) & (times <= t_b + 1e-9)
    if sel.sum() < MIN_FIT_SAMPLES:
        raise ConfigurationError(f"window {window} holds {sel.sum()} samples, need {MIN_FIT_SAMPLES}")
    tw, pw = times[sel], p[sel]
    if np.any(pw <= 0) or not np.all(np.isfinite(pw)):
        raise ConfigurationError("p must be positive and finite on the fit window")
    slope = np.polyfit(tw, pw**-2.0, 1)[0]
    c_fit = -0.5 * slope
    reference = reduced_closed_form(pw[0], tw - tw[0])
    deviation = float(np.max(np.abs(pw - reference) / pw))
    return DecayFit(
        c_fit=float(c_fit),
        relative_error=float(abs(c_fit - DECAY_COEFFICIENT) / abs(DECAY_COEFFICIENT)),
        closed_form_deviation=deviation,
        window=(float(t_a), float(t_b)),
        samples=int(sel.sum()),
    )


def residual_at(trace, p_value: float) -> float:
    """``|y* - p^2 a| / p^2`` where the trajectory first drops to ``p_value``.

    Linear interpolation in time between the two bracketing samples; the
    initial sample counts when it already equals ``p_value``.
    """
    p = trace.p
    ratio = trace.manifold_residual / p**2
    hits = np.nonzero(p <= p_value)[0]
    if hits.size == 0:
        raise ConfigurationError(f"trajectory never reaches p = {p_value}")
    k = int(hits[0])
    if k == 0 or p[k] == p_value:
        return float(ratio[k])
    w = (p[k - 1] - p_value) / (p[k - 1] - p[k])
    return float((1 - w) * ratio[k - 1] + w * ratio[k])


@dataclass
class ManifoldReport:
    quadrature: float
    fits: list
    companions: dict = field(default_factory=dict)
    a_residual: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "target": DECAY_COEFFICIENT,
            "quadrature": self.quadrature,
            "quadrature_error": abs(self.quadrature - DECAY_COEFFICIENT),
            "a_pde_residual": self.a_residual,
            "companions": self.companions,
            "fits": [f.to_dict() for f in self.fits],
        }


def build_report(fits, quadrature_n: int = 4096) -> ManifoldReport:
    from .grid import make_grid

    grid = make_grid(TWO_PI, quadrature_n)
    return ManifoldReport(
        quadrature=coefficient_quadrature(grid),
        fits=list(fits),
        companions=companion_quadratures(grid),
        a_residual=a_pde_residual(1000),
    )
