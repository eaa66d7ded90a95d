"""Resolvent evaluation, the winding curve, and the 2D potential picture.

The resolvent ``R(s) = sum_l p_l / (s + i E_l)`` maps the imaginary axis onto
itself once per level. Composing with ``C(z) = M(z) exp(M(z))``,
``M(z) = (z - 1)/(z + 1)`` turns that into a closed curve that circles the
origin ``-w`` times, so the level count can be read off as an integer
winding number. The same poles are the stationary points of a logarithmic
potential with point charges ``p_l`` at ``(0, -E_l)`` plus a constant force
``1/Gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ConvergenceError, SingularityError
from .spectral import SpectralModel

MAP_AT_RESOLVENT_POLE = np.e  # limit of C(z) as |z| -> inf
MAP_AT_INFINITE_OMEGA = -np.exp(-1.0)  # C(0), closes the curve at omega = +-inf

_POLE_GUARD = 1e-300
_POLE_SNAP = 1e-9  # omega within this of -E_l uses the limit value of the map
_MAX_CURVE_POINTS = 10**6

__all__ = [
    "WindingCurve",
    "PotentialField",
    "resolvent_at",
    "resolvent_derivative",
    "winding_map",
    "axis_zeros",
    "compute_winding",
    "potential_value",
    "potential_gradient",
]


def resolvent_at(model: SpectralModel, s: complex) -> complex:
    """Evaluate ``R(s) = sum_l p_l / (s + i E_l)`` by pairwise summation.

    Raises SingularityError when ``s`` sits on one of the poles ``-i E_l``.
    """
    terms = _resolvent_terms(model, s)
    return complex(np.sum(terms))


def resolvent_derivative(model: SpectralModel, s: complex) -> complex:
    """Analytic derivative ``R'(s) = -sum_l p_l / (s + i E_l)^2``."""
    denom = _denominators(model, s)
    return complex(-np.sum(model.overlaps / denom**2))


def _denominators(model: SpectralModel, s: complex) -> np.ndarray:
    denom = s + 1j * model.energies
    small = np.abs(denom) <= _POLE_GUARD
    if np.any(small):
        index = int(np.argmax(small))
        raise SingularityError(
            f"resolvent evaluated at its pole -i*E_{index} "
            f"(E = {model.energies[index]!r})",
            index=index,
        )
    return denom

def _resolvent_terms(model: SpectralModel, s: complex) -> np.ndarray:
    return model.overlaps / _denominators(model, s)


def winding_map(z: complex) -> complex:
    """The curve map ``C(z) = M(z) exp(M(z))`` with ``M(z) = (z-1)/(z+1)``."""
    if z == -1:
        raise SingularityError("winding map has a pole at z = -1")
    m = (z - 1.0) / (z + 1.0)
    return m * np.exp(m)


def _bracketed_root(func, lo: float, hi: float) -> float:
    """Root of an increasing function on the open interval (lo, hi) by bisection."""
    width = hi - lo
    inset = 1e-9 * width
    flo, fhi = func(lo + inset), func(hi - inset)
    shrink = 0
    while not (flo < 0.0 < fhi):
        inset *= 1e-2
        shrink += 1
        if shrink > 30:
            raise ConvergenceError(
                "no sign change between adjacent levels; the levels are "
                "numerically coincident",
                residual=width,
            )
        flo, fhi = func(lo + inset), func(hi - inset)
    a, b = lo + inset, hi - inset
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if func(mid) < 0.0:
            a = mid
        else:
            b = mid
        if b - a < 1e-15 * width:
            break
    return 0.5 * (a + b)


def axis_zeros(energies, overlaps) -> np.ndarray:
    """Zeros of ``sum_l p_l / (E_l - omega)``, one in each gap between levels.

    These are the frequencies where the resolvent vanishes on the imaginary
    axis; the summand is strictly increasing on every gap so plain bisection
    is reliable.
    """
    energies = np.asarray(energies, dtype=float)
    overlaps = np.asarray(overlaps, dtype=float)

    def g(omega):
        return float(np.sum(overlaps / (energies - omega)))

    return np.array(
        [_bracketed_root(g, energies[l], energies[l + 1]) for l in range(len(energies) - 1)]
    )


@dataclass(frozen=True)
class WindingCurve:
    """Sampled image of the imaginary axis under the winding map.

    ``omegas`` are the sampled frequencies (tan-compactified, so the first
    and last entries are -inf/+inf), ``curve_points`` the corresponding
    complex values, ``winding`` the integer turn count around the origin and
    ``arg_residual`` the leftover after rounding the accumulated argument to
    a whole number of turns.
    """

    omegas: np.ndarray
    curve_points: np.ndarray
    winding: int
    arg_residual: float

    def __post_init__(self):
        if self.winding < 1:
            raise AccuracyError(f"winding number {self.winding} below 1", value=self.winding)
        if not self.arg_residual < 1e-6:
            raise AccuracyError(
                f"accumulated argument misses -2*pi*winding by {self.arg_residual:.3e}",
                value=self.arg_residual,
            )
        omegas = np.array(self.omegas, dtype=float)
        points = np.array(self.curve_points, dtype=complex)
        omegas.setflags(write=False)
        points.setflags(write=False)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "curve_points", points)


def compute_winding(model: SpectralModel, gamma: float, init_points: int = 256) -> WindingCurve:
    """Trace ``C(Gamma R(i omega))`` along the full imaginary axis and count turns.

    The frequency axis is compactified by ``omega = tan(theta)``; the two
    endpoints ``theta = +-pi/2`` take the exact limit value ``C(0)`` so the
    curve closes. Samples landing within 1e-9 of a resolvent pole take the
    opposite limit ``e``. Segments are bisected until consecutive points
    advance the argument by less than pi/2, which rules out missed turns;
    the unwrapped total is then an exact multiple of 2*pi up to rounding.

    Raises ConvergenceError if the refinement needs more than 1e6 points.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if init_points < 64:
        raise ValueError(f"init_points must be at least 64, got {init_points}")

    energies = model.energies

    def value_at(theta: float) -> complex:
        if theta <= -np.pi / 2 or theta >= np.pi / 2:
            return complex(MAP_AT_INFINITE_OMEGA)
        omega = np.tan(theta)
        if np.min(np.abs(omega + energies)) < _POLE_SNAP:
            return complex(MAP_AT_RESOLVENT_POLE)
        return winding_map(gamma * resolvent_at(model, 1j * omega))

    thetas = list(np.linspace(-np.pi / 2, np.pi / 2, init_points + 1))
    # Anchor every resolvent pole (curve value e, argument 0) and every
    # resolvent zero (curve value -1/e, argument pi). Adjacent anchors then
    # always differ by half a turn, so refinement is forced along the whole
    # curve no matter how narrow the excursions are in omega.
    thetas.extend(np.arctan(np.sort(-energies)))
    if model.w > 1:
        thetas.extend(np.arctan(-axis_zeros(model.energies, model.overlaps)))
    thetas = sorted(set(float(t) for t in thetas))

    points = [(t, value_at(t)) for t in thetas]
    budget = _MAX_CURVE_POINTS - len(points)

    # Depth-first refinement, left to right, keeps the sample list ordered.
    out_t = [points[0][0]]
    out_v = [points[0][1]]
    half_pi = np.pi / 2
    for (ta, va), (tb, vb) in zip(points[:-1], points[1:]):
        stack = [(ta, va, tb, vb)]
        while stack:
            a, fa, b, fb = stack.pop()
            step = np.angle(fb / fa)
            mid = 0.5 * (a + b)
            if abs(step) < half_pi or mid == a or mid == b:
                out_t.append(b)
                out_v.append(fb)
                continue
            if budget <= 0:
                raise ConvergenceError(
                    "winding refinement exceeded the point budget "
                    f"({_MAX_CURVE_POINTS}); worst argument step {abs(step):.3f}",
                    residual=abs(step),
                )
            budget -= 1
            fm = value_at(mid)
            stack.append((mid, fm, b, fb))
            stack.append((a, fa, mid, fm))

    values = np.array(out_v)
    total = float(np.sum(np.angle(values[1:] / values[:-1])))
    winding = int(round(-total / (2.0 * np.pi)))
    residual = abs(total + 2.0 * np.pi * winding)
    omegas = np.tan(np.clip(out_t, -np.pi / 2, np.pi / 2))
    omegas[0] = -np.inf
    omegas[-1] = np.inf
    return WindingCurve(
        omegas=omegas, curve_points=values, winding=winding, arg_residual=residual
    )


@dataclass(frozen=True)
class PotentialField:
    """Charges ``p_l`` at ``(0, -E_l)`` plus the constant force ``1/gamma``."""

    model: SpectralModel
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


def _charge_distances(field: PotentialField, x: float, y: float) -> np.ndarray:
    dy = y + field.model.energies
    r2 = x * x + dy * dy
    tiny = r2 <= _POLE_GUARD
    if np.any(tiny):
        index = int(np.argmax(tiny))
        raise SingularityError(
            f"potential evaluated on charge {index} at (0, {-field.model.energies[index]!r})",
            index=index,
        )
    return r2


def potential_value(field: PotentialField, x: float, y: float) -> float:
    """``V(x, y) = x/Gamma + sum_l p_l ln( sqrt(x^2 + (y+E_l)^2) / Gamma )``."""
    r2 = _charge_distances(field, x, y)
    logs = 0.5 * np.log(r2) - np.log(field.gamma)
    return float(x / field.gamma + np.sum(field.model.overlaps * logs))


def potential_gradient(field: PotentialField, x: float, y: float):
    """Analytic gradient of the potential.

    Satisfies ``dV/dx + i dV/d(iy) = 1/Gamma + R(x + i y)``, so stationary
    points coincide with the poles of the dissipation amplitude.
    """
    r2 = _charge_distances(field, x, y)
    p = field.model.overlaps
    dy = y + field.model.energies
    gx = 1.0 / field.gamma + float(np.sum(p * x / r2))
    gy = float(np.sum(p * dy / r2))
    return gx, gy
