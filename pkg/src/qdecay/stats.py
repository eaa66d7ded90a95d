"""Decay-time statistics from a pole set.

With poles ``s_l`` and residuals ``r_l``, the overlap amplitude is
``Psi(t) = (1/Gamma) sum_l r_l exp(s_l t)`` and the decay-time density is
``F(t) = 2 Gamma |Psi(t)|^2``. All moments follow from the closed double sum

    <T^m> = (2/Gamma) sum_{l,l'} m! r_l conj(r_l') / (-s_l - conj(s_l'))^(m+1)

which is exact and O(w^2); quadrature against F(t) is kept around purely as
an independent oracle. Finite observation windows, their apparent level
count, and the crossover scaling function live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import AccuracyError
from .poles import PoleSet
from .quadrature import adaptive_simpson
from .spectral import SpectralModel

_EXP_FLOOR = -700.0  # exp underflows anyway; avoids warnings on huge Theta

__all__ = [
    "DecayTimeStats",
    "ConditionalMeanCurve",
    "wavefunction_at",
    "decay_density",
    "moment",
    "moment_by_quadrature",
    "quadrature_horizon",
    "detection_probability",
    "detection_probability_small_gamma",
    "predicted_mean",
    "variance",
    "decay_time_stats",
    "conditional_mean",
    "conditional_mean_curve",
    "extract_w_apparent",
    "scaling_function",
    "crossover_prediction",
    "two_level_crossover_asymptote",
]


def wavefunction_at(poles: PoleSet, t):
    """Overlap amplitude ``(1/Gamma) sum_l r_l exp(s_l t)`` for t >= 0.

    Accepts a scalar or an array of times.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    phases = np.exp(np.multiply.outer(t, poles.poles))
    out = phases @ poles.residuals / poles.gamma
    return complex(out) if out.ndim == 0 else out


def decay_density(poles: PoleSet, t):
    """Decay-time density ``F(t) = 2 Gamma |Psi(t)|^2``."""
    psi = wavefunction_at(poles, t)
    return 2.0 * poles.gamma * np.abs(psi) ** 2


def _pair_sums(poles: PoleSet):
    s = poles.poles
    r = poles.residuals
    return np.add.outer(s, np.conj(s)), np.outer(r, np.conj(r))


def moment(poles: PoleSet, m: int) -> float:
    """m-th decay-time moment from the residue double sum.

    The result is real up to rounding; an imaginary remainder above 1e-10
    relative is treated as a failure rather than dropped.
    """
    if m < 0:
        raise ValueError("moment order must be non-negative")
    pair, weight = _pair_sums(poles)
    value = (2.0 / poles.gamma) * factorial(m) * np.sum(weight / (-pair) ** (m + 1))
    if abs(value.imag) > 1e-10 * max(abs(value.real), 1e-300):
        raise AccuracyError(
            f"moment {m} has imaginary remainder {value.imag:.3e}", value=value
        )
    return float(value.real)


def detection_probability(poles: PoleSet) -> float:
    """Total detection probability, the zeroth moment of F."""
    return moment(poles, 0)


def detection_probability_small_gamma(model: SpectralModel, gamma: float) -> float:
    """Weak-dissipation expansion of the detection probability.

    Evaluates ``1 + sum_{l != l'} 2 Gamma p_l p_l' / ((p_l + p_l') Gamma
    + i (E_l - E_l'))``; the correction is what the first-order poles leave
    behind and vanishes as Gamma -> 0.
    """
    e, p = model.energies, model.overlaps
    denom = gamma * np.add.outer(p, p) + 1j * np.subtract.outer(e, e)
    num = 2.0 * gamma * np.outer(p, p)
    off = ~np.eye(model.w, dtype=bool)
    return 1.0 + float(np.sum((num / denom)[off]).real)


def predicted_mean(w: int, gamma: float) -> float:
    """The quantized mean ``w / (2 Gamma)``."""
    if w < 1:
        raise ValueError("w must be at least 1")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return w / (2.0 * gamma)


def variance(poles: PoleSet) -> float:
    """Decay-time variance ``<T^2> - <T>^2``."""
    return moment(poles, 2) - moment(poles, 1) ** 2


@dataclass(frozen=True)
class DecayTimeStats:
    """Detection probability, mean, variance and leading moments."""

    p_det: float
    mean: float
    variance: float
    moments: tuple

    def __post_init__(self):
        if not (0.0 < self.p_det <= 1.0 + 1e-8):
            raise AccuracyError(f"detection probability {self.p_det!r} outside (0, 1]")
        if not self.mean > 0:
            raise AccuracyError(f"mean decay time {self.mean!r} must be positive")
        if self.variance < -1e-10:
            raise AccuracyError(f"variance {self.variance!r} below the numerical floor")


def decay_time_stats(poles: PoleSet, max_moment: int = 2) -> DecayTimeStats:
    moments = tuple(moment(poles, m) for m in range(max_moment + 1))
    return DecayTimeStats(
        p_det=moments[0],
        mean=moments[1],
        variance=moments[2] - moments[1] ** 2,
        moments=moments,
    )


def quadrature_horizon(poles: PoleSet, tail: float = 1e-12) -> float:
    """Time beyond which the mode-expansion tail bound drops below ``tail``.

    The bound is ``sum_l |r_l / Gamma|^2 exp(2 Re(s_l) t)``, monotone in t,
    solved by doubling plus bisection and capped at ``1e12 / Gamma``.
    """
    weights = np.abs(poles.residuals / poles.gamma) ** 2
    rates = 2.0 * poles.poles.real

    def bound(t):
        return float(np.sum(weights * np.exp(np.maximum(rates * t, _EXP_FLOOR))))

    cap = 1e12 / poles.gamma
    lo, hi = 0.0, 1.0 / poles.gamma
    while bound(hi) > tail:
        hi *= 2.0
        if hi >= cap:
            return cap
        lo = hi / 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if bound(mid) > tail:
            lo = mid
        else:
            hi = mid
    return hi


def moment_by_quadrature(poles: PoleSet, m: int, tol: float = 1e-9) -> float:
    """Oracle for ``moment``: adaptive Simpson of ``t^m F(t)`` to the horizon."""
    horizon = quadrature_horizon(poles)

    def integrand(t):
        return t**m * decay_density(poles, t)

    return adaptive_simpson(integrand, 0.0, horizon, tol=tol)


def conditional_mean(poles: PoleSet, theta: float) -> float:
    """Mean over decay events recorded before the cutoff ``theta``.

    Both truncated sums are evaluated with their exact exponential bracket
    terms; as theta grows the value converges to the unconditional mean.
    """
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    pair, weight = _pair_sums(poles)
    damp = np.exp(np.maximum((pair * theta).real, _EXP_FLOOR) + 1j * (pair * theta).imag)
    numerator = np.sum(weight * (1.0 - (1.0 - theta * pair) * damp) / pair**2)
    denominator = np.sum(weight * (1.0 - damp) / (-pair))
    if abs(denominator) < 1e-300:
        raise AccuracyError(
            f"no decay weight below theta = {theta}; cutoff sits far before "
            "the first decay scale",
            value=abs(denominator),
        )
    return float((numerator / denominator).real)


def extract_w_apparent(thetas, values, gamma: float, tol: float = 0.05, min_decades: float = 1.0):
    """Apparent level count from the longest quantized plateau of a curve.

    A plateau is a run of consecutive samples whose ``2 Gamma <T_c>`` all sit
    within ``tol`` of the same integer and whose cutoff range spans at least
    ``min_decades`` decades. Returns that integer, or None when no run
    qualifies. Ties go to the longer (then earlier) run.
    """
    thetas = np.asarray(thetas, dtype=float)
    values = np.asarray(values, dtype=float)
    quantized = 2.0 * gamma * values
    nearest = np.round(quantized)
    on_plateau = (np.abs(quantized - nearest) < tol) & (nearest >= 1)

    best = None
    best_extent = min_decades
    start = 0
    while start < len(values):
        if not on_plateau[start]:
            start += 1
            continue
        stop = start
        while (
            stop + 1 < len(values)
            and on_plateau[stop + 1]
            and nearest[stop + 1] == nearest[start]
        ):
            stop += 1
        extent = np.log10(thetas[stop] / thetas[start]) if thetas[start] > 0 else 0.0
        if extent >= best_extent:
            best = int(nearest[start])
            best_extent = extent + 1e-12
        start = stop + 1
    return best


@dataclass(frozen=True)
class ConditionalMeanCurve:
    """Conditional mean versus observation cutoff plus its apparent level count."""

    thetas: np.ndarray
    values: np.ndarray
    w_apparent: int | None

    def __post_init__(self):
        thetas = np.array(self.thetas, dtype=float)
        values = np.array(self.values, dtype=float)
        if not (np.all(np.isfinite(values)) and np.all(values > 0)):
            raise AccuracyError("conditional mean curve must be finite and positive")
        thetas.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "values", values)


def conditional_mean_curve(poles: PoleSet, thetas) -> ConditionalMeanCurve:
    thetas = np.asarray(thetas, dtype=float)
    values = np.array([conditional_mean(poles, t) for t in thetas])
    w_app = extract_w_apparent(thetas, values, poles.gamma)
    return ConditionalMeanCurve(thetas=thetas, values=values, w_apparent=w_app)


def scaling_function(slow_scaled_pairs, x: float) -> float:
    """Crossover scaling function of the rescaled slow modes.

    ``slow_scaled_pairs`` holds (sbar_l, rbar_l) for the W modes pushed
    toward the imaginary axis, rescaled by the perturbation strength so that
    ``Re(s_l) = -eps * sbar_l`` and ``r_l = eps * rbar_l``. Only the decay
    rate scale enters:

        g(x) = (4/W) sum_l |rbar_l|^2 / (4 sbar_l^2)
               * (1 - (1 + 2 sbar_l x) exp(-2 sbar_l x))

    with g(0) = 0 and g(inf) = 1 thanks to |rbar_l| matching sbar_l in every
    perturbative regime.
    """
    if x < 0:
        raise ValueError("x must be non-negative")
    pairs = [(complex(s), complex(r)) for s, r in slow_scaled_pairs]
    if not pairs:
        raise ValueError("need at least one slow mode")
    total = 0.0
    for sbar, rbar in pairs:
        rate = sbar.real
        if not rate > 0:
            raise ValueError(f"slow-mode scale must have positive real part, got {sbar}")
        decay = np.exp(max(-2.0 * rate * x, _EXP_FLOOR))
        total += abs(rbar) ** 2 / (4.0 * rate**2) * (1.0 - (1.0 + 2.0 * rate * x) * decay)
    return 4.0 / len(pairs) * total


def crossover_prediction(w: int, w_app: int, gamma: float, g_of_x: float) -> float:
    """Conditional-mean crossover ``w_app/(2 Gamma) + (w - w_app)/(2 Gamma) g``."""
    if not 1 <= w_app <= w:
        raise ValueError(f"need 1 <= w_app <= w, got w_app={w_app}, w={w}")
    return w_app / (2.0 * gamma) + (w - w_app) / (2.0 * gamma) * g_of_x


def two_level_crossover_asymptote(delta: float, omega: float, gamma: float, theta: float) -> float:
    """Large-cutoff, small-drive approximation of the two-level conditional mean.

    ``<T_c> ~ (1/(2 Gamma)) [2 - (1 + a) exp(-a)]`` with
    ``a = 2 Gamma Omega^2 Theta / (Gamma^2 + delta^2)``.
    """
    a = 2.0 * gamma * omega**2 * theta / (gamma**2 + delta**2)
    return (2.0 - (1.0 + a) * np.exp(max(-a, _EXP_FLOOR))) / (2.0 * gamma)
