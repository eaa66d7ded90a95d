"""Locate the poles of the dissipation amplitude and their residuals.

The amplitude ``Psi(s) = R(s) / (1 + Gamma R(s))`` has exactly w simple poles
in the open left half plane, the solutions of ``1 + Gamma R(s) = 0``. They
are found as roots of an equivalent monic polynomial with an Aberth-Ehrlich
simultaneous iteration, then polished by Newton steps on the rational form
``f(s) = 1/Gamma + R(s)`` which stays well conditioned near clustered
levels. Each pole carries the residual coefficient ``r = R(s)/R'(s)``; the
residuals sum to Gamma.

The asymptotic predictors cover four limits: weak dissipation, strong
dissipation, a vanishing overlap, and an almost degenerate cluster of
levels. They are first-order predictions and are not required to satisfy
the exact-pole tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ConvergenceError
from .resolvent import axis_zeros, resolvent_at, resolvent_derivative
from .spectral import SpectralModel

_ABERTH_MAX_ITER = 500
_NEWTON_MAX_ITER = 100

__all__ = [
    "PoleSet",
    "characteristic_polynomial",
    "find_poles",
    "asymptotic_poles_small_gamma",
    "asymptotic_poles_large_gamma",
    "asymptotic_pole_small_charge",
    "asymptotic_poles_near_degenerate",
]


@dataclass(frozen=True)
class PoleSet:
    """Poles ``s_l`` and residual coefficients ``r_l`` of the amplitude.

    ``validate()`` enforces the exact-pole contract; sets produced by the
    asymptotic predictors are approximations and are left unvalidated.
    """

    poles: np.ndarray
    residuals: np.ndarray
    gamma: float
    model: SpectralModel

    def __post_init__(self):
        poles = np.atleast_1d(np.array(self.poles, dtype=complex))
        residuals = np.atleast_1d(np.array(self.residuals, dtype=complex))
        if poles.shape != residuals.shape:
            raise ValueError("poles and residuals must have matching shapes")
        poles.setflags(write=False)
        residuals.setflags(write=False)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residuals", residuals)

    @property
    def w(self) -> int:
        return len(self.poles)

    def validate(self) -> None:
        """Check the exact-pole invariants, raising AccuracyError on failure."""
        model, gamma = self.model, self.gamma
        if self.w != model.w:
            raise AccuracyError(
                f"{self.w} poles found but the model has {model.w} levels", value=self.w
            )
        if np.any(self.poles.real >= 0):
            raise AccuracyError("every pole must have negative real part")
        scale = model.span + gamma
        dist = np.abs(self.poles[:, None] - self.poles[None, :])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < 1e-12 * scale:
            raise AccuracyError(
                "two poles coincide within 1e-12 of scale; the input model "
                "very likely contains an exactly degenerate level that should "
                "have been merged",
                value=dist.min(),
            )
        base_tol = 1e-10 * gamma * max(1.0, model.overlaps.max() / model.min_gap)
        eps = np.finfo(float).eps
        for s in self.poles:
            # Evaluating 1 + Gamma R(s) at a pole hugging a level suffers the
            # cancellation in s + iE, so the tolerance cannot drop below the
            # first-order rounding floor of that evaluation.
            dist = np.abs(s + 1j * model.energies)
            cond = np.sum(
                model.overlaps * (abs(s) + np.abs(model.energies) + 1.0) / dist**2
            )
            tol = max(base_tol, 32.0 * eps * gamma * cond)
            residual = abs(1.0 + gamma * resolvent_at(model, s))
            if not residual < tol:
                raise AccuracyError(
                    f"pole residual |1 + Gamma R(s)| = {residual:.3e} above "
                    f"tolerance {tol:.3e}",
                    value=residual,
                )
        if abs(self.residuals.sum() - gamma) > 1e-8 * gamma:
            raise AccuracyError(
                f"residuals sum to {self.residuals.sum()!r}, expected Gamma = {gamma}",
                value=self.residuals.sum(),
            )
        for s, r in zip(self.poles, self.residuals):
            direct = resolvent_at(model, s) / resolvent_derivative(model, s)
            if abs(direct - r) > 1e-10 * abs(direct):
                raise AccuracyError("stored residual disagrees with R/R'", value=r)


def characteristic_polynomial(model: SpectralModel, gamma: float) -> np.ndarray:
    """Monic polynomial whose roots are the amplitude poles.

    Clearing denominators in ``1 + Gamma R(s) = 0`` gives
    ``P(s) = prod_l (s + i E_l) + Gamma sum_l p_l prod_{l' != l} (s + i E_l')``,
    built here by incremental convolution of the linear factors. Coefficients
    come back highest degree first.
    """
    roots = -1j * model.energies
    w = model.w
    # prefix[k] = product of the first k linear factors, suffix[k] of the last w-k.
    prefix = [np.array([1.0 + 0j])]
    for root in roots:
        prefix.append(np.convolve(prefix[-1], np.array([1.0, -root])))
    suffix = [np.array([1.0 + 0j])]
    for root in roots[::-1]:
        suffix.append(np.convolve(suffix[-1], np.array([1.0, -root])))
    suffix = suffix[::-1]

    coeffs = prefix[-1].copy()
    for l, p in enumerate(model.overlaps):
        partial = np.convolve(prefix[l], suffix[l + 1])
        coeffs[-len(partial):] += gamma * p * partial
    return coeffs


def _initial_guesses(model: SpectralModel, gamma: float) -> np.ndarray:
    e, p = model.energies, model.overlaps
    if gamma * p.max() < model.min_gap:
        return -1j * e - p * gamma
    w = model.w
    center = -(gamma + 1j * e.sum()) / w
    radius = 2.0 * (np.abs(e).max() + gamma)
    angles = 2.0 * np.pi * np.arange(w) / w + 0.4
    return center + radius * np.exp(1j * angles)


def _aberth(coeffs: np.ndarray, guesses: np.ndarray, scale: float) -> np.ndarray:
    deriv = np.polyder(coeffs)
    z = guesses.astype(complex).copy()
    for _ in range(_ABERTH_MAX_ITER):
        pv = np.polyval(coeffs, z)
        dv = np.polyval(deriv, z)
        newton = np.where(dv != 0, pv / np.where(dv != 0, dv, 1.0), 0.1 * scale)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        repulsion = np.sum(1.0 / diff, axis=1)
        step = newton / (1.0 - newton * repulsion)
        # a clamp keeps far-out starting points from catapulting past the roots
        limit = 0.2 * (np.abs(z) + scale)
        magnitude = np.abs(step)
        big = magnitude > limit
        step[big] *= limit[big] / magnitude[big]
        z -= step
        if np.all(np.abs(step) <= 1e-13 * (np.abs(z) + scale)):
            return z
    raise ConvergenceError(
        f"Aberth iteration did not settle in {_ABERTH_MAX_ITER} steps; "
        f"worst |P(z)| = {np.abs(np.polyval(coeffs, z)).max():.3e}",
        residual=float(np.abs(np.polyval(coeffs, z)).max()),
    )


def _newton_polish(model: SpectralModel, gamma: float, s: complex) -> complex:
    """Newton on ``f(s) = 1/Gamma + R(s)`` down to |f| < 1e-13/Gamma.

    Near a level with a tiny overlap the evaluation of f hits a rounding
    floor; the loop then stops on stagnation and the PoleSet validation
    decides whether the reached accuracy is acceptable.
    """
    target = 1e-13 / gamma
    best_s, best_f = s, abs(1.0 / gamma + resolvent_at(model, s))
    stagnant = 0
    for _ in range(_NEWTON_MAX_ITER):
        f = 1.0 / gamma + resolvent_at(model, s)
        if abs(f) < best_f:
            best_s, best_f = s, abs(f)
            stagnant = 0
        else:
            stagnant += 1
            if stagnant >= 3:
                break
        if abs(f) < target:
            return s
        s = s - f / resolvent_derivative(model, s)
    return best_s


def find_poles(model: SpectralModel, gamma: float) -> PoleSet:
    """All w poles of the amplitude with their residual coefficients.

    Aberth-Ehrlich on the characteristic polynomial provides simultaneous
    estimates (started from the weak-dissipation prediction when that regime
    applies, otherwise from a circle enclosing spectrum and Gamma), each then
    polished on the rational form. The returned set satisfies the machine
    checkable contract enforced by ``PoleSet.validate``.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    scale = model.span + gamma
    if model.w == 1:
        pole = complex(-gamma - 1j * model.energies[0])
        pole = _newton_polish(model, gamma, pole)
        residual = resolvent_at(model, pole) / resolvent_derivative(model, pole)
        out = PoleSet(np.array([pole]), np.array([residual]), gamma, model)
        out.validate()
        return out

    coeffs = characteristic_polynomial(model, gamma)
    raw = _aberth(coeffs, _initial_guesses(model, gamma), scale)
    polished = np.array([_newton_polish(model, gamma, s) for s in raw])
    order = np.argsort(polished.imag, kind="stable")
    polished = polished[order]
    residuals = np.array(
        [resolvent_at(model, s) / resolvent_derivative(model, s) for s in polished]
    )
    out = PoleSet(polished, residuals, gamma, model)
    out.validate()
    return out


def asymptotic_poles_small_gamma(model: SpectralModel, gamma: float) -> PoleSet:
    """Weak-dissipation prediction: ``s_l ~ -i E_l - p_l Gamma``, ``r_l ~ p_l Gamma``.

    Valid when ``Gamma * max(p)`` is far below the smallest level gap; the
    caller is trusted on that.
    """
    e, p = model.energies, model.overlaps
    return PoleSet(-1j * e - p * gamma, p * gamma + 0j, gamma, model)


def asymptotic_poles_large_gamma(model: SpectralModel, gamma: float) -> PoleSet:
    """Strong-dissipation prediction: one fast mode plus w-1 slow modes.

    The fast mode sits at ``-Gamma - i <H>`` and carries residual ~ Gamma.
    The slow modes hug the purely imaginary zeros ``-i omega_l`` of the
    resolvent, one in each gap between adjacent levels:
    ``s_l ~ -i omega_l - 1/(Gamma R'(-i omega_l))`` with residual
    ``-1/(Gamma R'(-i omega_l))``.
    """
    e, p = model.energies, model.overlaps
    mean_energy = float(np.sum(p * e))
    poles = [complex(-gamma - 1j * mean_energy)]
    residuals = [complex(gamma)]
    for omega in axis_zeros(e, p):
        slope = resolvent_derivative(model, -1j * omega)  # real and positive
        shift = -1.0 / (gamma * slope)
        poles.append(-1j * omega + shift)
        residuals.append(shift)
    return PoleSet(np.array(poles), np.array(residuals), gamma, model)


def asymptotic_pole_small_charge(model: SpectralModel, gamma: float, level_index: int):
    """Prediction for the pole pinned to a level with vanishing overlap.

    The remaining charges and the constant force form a background field
    ``E_bg(s) = 1/Gamma + sum_{l' != l} p_l' / (s + i E_l')``; force balance
    against the single small charge gives
    ``s ~ -i E_l - p_l / E_bg(-i E_l)`` and residual
    ``r ~ p_l / (Gamma E_bg(-i E_l)^2)``.
    """
    e, p = model.energies, model.overlaps
    if not 0 <= level_index < model.w:
        raise ValueError(f"level_index {level_index} out of range for w = {model.w}")
    others = np.arange(model.w) != level_index
    background = 1.0 / gamma + np.sum(
        p[others] / (-1j * e[level_index] + 1j * e[others])
    )
    pole = -1j * e[level_index] - p[level_index] / background
    residual = p[level_index] / (gamma * background**2)
    return complex(pole), complex(residual)


def _level_pairs(levels) -> list:
    if isinstance(levels, SpectralModel):
        return list(levels.levels)
    return [(float(e), float(p)) for e, p in levels]


def asymptotic_poles_near_degenerate(cluster_levels, background, gamma: float, epsilon: float):
    """Emergent slow poles of an almost degenerate cluster of levels.

    ``cluster_levels`` are the (energy, overlap) pairs of the perturbed
    cluster, assumed to spread linearly in ``epsilon`` around their center
    (taken as the overlap-weighted mean). ``background`` holds the remaining
    levels, as a SpectralModel or plain (energy, overlap) pairs; its
    overlaps are used as given, without renormalization.

    Returns the W-1 (pole, residual) predictions
    ``s_l ~ -i(Ebar + eps wtilde_l) - eps^2 E_bg(-i Ebar) / Rtilde'(-i wtilde_l)``,
    ``r_l ~ -eps^2 / (Gamma Rtilde'(-i wtilde_l))``,
    where ``-i wtilde_l`` are the zeros of the cluster resolvent built from
    the scaled offsets. The background's own stationary points are not
    included.
    """
    cluster = _level_pairs(cluster_levels)
    if len(cluster) < 2:
        raise ValueError("an almost degenerate cluster needs at least 2 levels")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    energies = np.array([e for e, _ in cluster])
    charges = np.array([p for _, p in cluster])
    center = float(np.average(energies, weights=charges))
    offsets = (energies - center) / epsilon

    bg = _level_pairs(background)
    bg_field = 1.0 / gamma
    if bg:
        bg_e = np.array([e for e, _ in bg])
        bg_p = np.array([p for _, p in bg])
        bg_field = bg_field + complex(np.sum(bg_p / (-1j * center + 1j * bg_e)))

    out = []
    for wtilde in axis_zeros(offsets, charges):
        slope = float(np.sum(charges / (offsets - wtilde) ** 2))  # Rtilde'(-i wtilde)
        pole = -1j * (center + epsilon * wtilde) - epsilon**2 * bg_field / slope
        residual = -(epsilon**2) / (gamma * slope)
        out.append((complex(pole), complex(residual)))
    return out
