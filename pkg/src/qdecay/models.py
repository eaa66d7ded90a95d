"""Concrete systems and direct time-domain experiments.

Covers the driven two-level atom (with exact closed-form poles), the
tight-binding ring with optional on-site disorder, the open chain used for
multi-channel runs, and a non-Hermitian propagator good enough to serve as
an independent oracle for the residue pipeline: the quadrature mean computed
here never touches the pole machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ConvergenceError
from .poles import PoleSet
from .spectral import QuantumSystem, SpectralModel, _frozen_array

_TAYLOR_DEGREE = 18
_SCALED_NORM = 0.5

__all__ = [
    "TwoLevelParams",
    "MultiChannelSystem",
    "two_level_system",
    "two_level_spectral_model",
    "two_level_closed_forms",
    "tight_binding_ring",
    "tight_binding_line",
    "ring_preparation_state",
    "matrix_exponential",
    "effective_generator",
    "effective_propagator",
    "propagate",
    "decay_rate",
    "mean_time_by_quadrature",
]


@dataclass(frozen=True)
class TwoLevelParams:
    """Detuning, drive amplitude and decay rate of the driven two-level atom."""

    delta: float
    omega: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")


def two_level_system(params: TwoLevelParams) -> QuantumSystem:
    """Excited/ground two-level system decaying through the excited state."""
    h = np.array(
        [[params.delta / 2.0, params.omega], [params.omega, -params.delta / 2.0]],
        dtype=complex,
    )
    return QuantumSystem(hamiltonian=h, decay_state=np.array([1.0, 0.0]), gamma=params.gamma)


def two_level_spectral_model(params: TwoLevelParams) -> SpectralModel:
    """Exact levels and overlaps of the two-level system.

    The levels sit at ``+-sqrt(delta^2/4 + omega^2)``; partial fractions of
    ``R(s) = (s - i delta/2) / (s^2 + delta^2/4 + omega^2)`` give the
    overlaps ``p_+- = (E_+ +- delta/2) / (2 E_+)``. With the drive off the
    excited state is an eigenstate and only one level remains.
    """
    if params.omega == 0.0:
        return SpectralModel(
            levels=((params.delta / 2.0, 1.0),),
            degeneracy_tol=1e-15 + 1e-12 * abs(params.delta),
        )
    e_plus = float(np.hypot(params.delta / 2.0, params.omega))
    p_plus = (e_plus + params.delta / 2.0) / (2.0 * e_plus)
    p_minus = (e_plus - params.delta / 2.0) / (2.0 * e_plus)
    return SpectralModel(
        levels=((-e_plus, p_minus), (e_plus, p_plus)),
        degeneracy_tol=1e-12 * e_plus,
    )


def two_level_closed_forms(params: TwoLevelParams) -> PoleSet:
    """Exact poles and residuals of the driven two-level system.

    With ``y = 2 Omega / (Gamma + i delta)`` and the principal square root,

        s_+- = -( Gamma/2 +- (Gamma + i delta)/2 sqrt(1 - y^2) )
        r_+- = -(Gamma/2) y^2 / (1 - y^2 -+ sqrt(1 - y^2))

    The drive-free case collapses to the single pole ``-Gamma - i delta/2``
    with residual Gamma.

    Raises
    ------
    ValueError
        At ``y^2 = 1``, where the two poles coalesce and the simple-pole
        description stops existing.
    """
    delta, omega, gamma = params.delta, params.omega, params.gamma
    model = two_level_spectral_model(params)
    if omega == 0.0:
        pole = np.array([-gamma - 0.5j * delta])
        return PoleSet(pole, np.array([gamma + 0j]), gamma, model)

    y2 = (2.0 * omega / (gamma + 1j * delta)) ** 2
    if abs(1.0 - y2) == 0.0:
        raise ValueError(
            f"parameters sit on the exceptional point y^2 = 1 (delta={delta}, "
            f"omega={omega}, gamma={gamma}); the poles coalesce there"
        )
    root = np.sqrt(1.0 - y2)
    s_plus = -(gamma / 2.0 + (gamma + 1j * delta) / 2.0 * root)
    s_minus = -(gamma / 2.0 - (gamma + 1j * delta) / 2.0 * root)
    r_plus = -(gamma / 2.0) * y2 / (1.0 - y2 - root)
    r_minus = -(gamma / 2.0) * y2 / (1.0 - y2 + root)
    return PoleSet(
        np.array([s_plus, s_minus]), np.array([r_plus, r_minus]), gamma, model
    )


def _disorder_draws(seed: int, count: int) -> np.ndarray:
    """Uniform draws on [-1, 1) from the counter-based Philox4x64-10 generator.

    Keying Philox with the seed makes realizations reproducible bit for bit
    across platforms and processes; the draws are scaled linearly by the
    disorder strength so one seed describes a whole family of strengths.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    return rng.uniform(-1.0, 1.0, count)


def tight_binding_ring(
    L: int,
    gamma_hop: float = 1.0,
    epsilon: float = 0.0,
    seed: int = 0,
    gamma: float = 1.0,
) -> QuantumSystem:
    """Ring of L sites with hopping ``-gamma_hop`` and uniform on-site disorder.

    On-site energies are i.i.d. uniform on ``[-epsilon, epsilon]``; the decay
    channel sits on the last site. ``gamma`` is the decay rate of the
    resulting system.
    """
    if L < 4 or L % 2 != 0:
        raise ValueError(f"L must be an even integer >= 4, got {L}")
    h = np.diag(_disorder_draws(seed, L) * epsilon).astype(complex)
    for x in range(L):
        h[x, (x + 1) % L] += -gamma_hop
        h[(x + 1) % L, x] += -gamma_hop
    decay = np.zeros(L, dtype=complex)
    decay[L - 1] = 1.0
    return QuantumSystem(hamiltonian=h, decay_state=decay, gamma=gamma)


def tight_binding_line(L: int, gamma_hop: float = 1.0) -> np.ndarray:
    """Open chain of L sites with hopping ``-gamma_hop`` and no disorder."""
    if L < 2:
        raise ValueError(f"L must be at least 2, got {L}")
    h = np.zeros((L, L), dtype=complex)
    for x in range(L - 1):
        h[x, x + 1] = -gamma_hop
        h[x + 1, x] = -gamma_hop
    return h


def ring_preparation_state(L: int, delta: float) -> np.ndarray:
    """``sqrt(1-delta) |L> + sqrt(delta) |L/2>``, the canonical offset state."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    state = np.zeros(L, dtype=complex)
    state[L - 1] = np.sqrt(1.0 - delta)
    state[L // 2 - 1] = np.sqrt(delta)
    return state


@dataclass(frozen=True)
class MultiChannelSystem:
    """Hermitian Hamiltonian with d orthonormal decay channels.

    ``channels`` is a (d, N) array whose rows are the channel states; the
    decay projector is the sum of their outer products.
    """

    hamiltonian: np.ndarray
    channels: np.ndarray
    gamma: float

    def __post_init__(self):
        h = np.array(self.hamiltonian, dtype=complex)
        c = np.atleast_2d(np.array(self.channels, dtype=complex))
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"hamiltonian must be square, got shape {h.shape}")
        if c.shape[1] != h.shape[0]:
            raise ValueError("channel dimension does not match the Hamiltonian")
        if not np.allclose(h, h.conj().T, rtol=0.0, atol=1e-12):
            raise ValueError("hamiltonian is not Hermitian within 1e-12")
        gram = c.conj() @ c.T
        if not np.allclose(gram, np.eye(c.shape[0]), rtol=0.0, atol=1e-12):
            raise ValueError("channels are not orthonormal within 1e-12")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "hamiltonian", _frozen_array(h, complex))
        object.__setattr__(self, "channels", _frozen_array(c, complex))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def decay_projector(self) -> np.ndarray:
        return self.channels.T @ self.channels.conj()


def _channels_of(system) -> np.ndarray:
    if isinstance(system, MultiChannelSystem):
        return system.channels
    return system.decay_state[None, :]


def matrix_exponential(matrix: np.ndarray) -> np.ndarray:
    """exp(M) by scaling and squaring around a degree-18 Taylor polynomial.

    The matrix is halved until its 1-norm drops below 0.5, the truncated
    series is evaluated by Horner's scheme, and the result squared back up.
    Deliberately avoids diagonalizing the non-normal generator.
    """
    m = np.asarray(matrix, dtype=complex)
    norm = np.linalg.norm(m, 1)
    squarings = max(0, int(np.ceil(np.log2(norm / _SCALED_NORM)))) if norm > _SCALED_NORM else 0
    scaled = m / (2.0**squarings)
    eye = np.eye(m.shape[0], dtype=complex)
    result = eye.copy()
    for k in range(_TAYLOR_DEGREE, 0, -1):
        result = eye + scaled @ result / k
    for _ in range(squarings):
        result = result @ result
    return result


def effective_generator(system) -> np.ndarray:
    """``-i H - Gamma D``, the generator of the dissipative evolution."""
    channels = _channels_of(system)
    projector = channels.T @ channels.conj()
    return -1j * system.hamiltonian - system.gamma * projector


def effective_propagator(system, t: float) -> np.ndarray:
    """``U(t) = exp(-i H t - Gamma D t)`` as a dense matrix."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return matrix_exponential(effective_generator(system) * t)


def propagate(system, initial_state: np.ndarray, t: float) -> np.ndarray:
    """Evolve a unit-norm state for time t under the dissipative dynamics.

    The norm can only shrink; growth beyond 1e-10 signals a propagator
    accuracy failure and raises instead of returning a bad state.
    """
    psi = np.asarray(initial_state, dtype=complex)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"initial state norm {norm!r} is not 1")
    out = effective_propagator(system, t) @ psi
    if np.linalg.norm(out) > norm + 1e-10:
        raise AccuracyError(
            f"propagation increased the norm to {np.linalg.norm(out)!r}",
            value=np.linalg.norm(out),
        )
    return out


def decay_rate(system, state: np.ndarray) -> float:
    """Instantaneous decay rate ``2 Gamma sum_j |<channel_j | state>|^2``."""
    overlaps = _channels_of(system).conj() @ np.asarray(state, dtype=complex)
    return float(2.0 * system.gamma * np.sum(np.abs(overlaps) ** 2))


def _integrate_decay(system, initial: np.ndarray, t_max: float, rel_tol: float):
    """Simpson integrals of F and t*F on [0, t_max] with automatic step halving.

    States are advanced with one cached step propagator, so each refinement
    level costs a single sweep of matrix-vector products. The step starts
    well below the fastest oscillation period of F and halves until both
    integrals settle.
    """
    gen = effective_generator(system)
    channels = _channels_of(system)
    omega_scale = np.linalg.norm(system.hamiltonian, 1) + system.gamma
    steps = max(64, int(np.ceil(t_max * omega_scale / 0.3)))
    steps += steps % 2

    def pass_at(n: int):
        h = t_max / n
        step = matrix_exponential(gen * h)
        psi = initial.astype(complex)
        density = np.empty(n + 1)
        overlaps = channels.conj() @ psi
        density[0] = np.sum(np.abs(overlaps) ** 2)
        for k in range(1, n + 1):
            psi = step @ psi
            overlaps = channels.conj() @ psi
            density[k] = np.sum(np.abs(overlaps) ** 2)
        density *= 2.0 * system.gamma
        weights = np.full(n + 1, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        times = np.linspace(0.0, t_max, n + 1)
        p_det = h / 3.0 * np.sum(weights * density)
        first = h / 3.0 * np.sum(weights * times * density)
        survival = float(np.linalg.norm(psi) ** 2)
        return p_det, first, survival

    p_prev, m_prev, survival = pass_at(steps)
    if survival >= 1e-10:
        raise AccuracyError(
            f"survival probability {survival:.3e} at t_max = {t_max} is above "
            "1e-10; slow modes need a longer horizon",
            value=survival,
        )
    for _ in range(14):
        steps *= 2
        p_new, m_new, _ = pass_at(steps)
        p_ok = abs(p_new - p_prev) <= rel_tol * max(abs(p_new), 1e-3)
        m_ok = abs(m_new - m_prev) <= rel_tol * max(abs(m_new), 1e-3)
        p_prev, m_prev = p_new, m_new
        if p_ok and m_ok:
            return p_prev, m_prev
    raise ConvergenceError(
        "decay-time quadrature did not settle after 14 step halvings",
        residual=abs(m_new - m_prev),
    )


def mean_time_by_quadrature(
    system,
    t_max: float,
    initial_state: np.ndarray | None = None,
    rel_tol: float = 1e-8,
):
    """Detection probability and mean decay time by direct propagation.

    ``initial_state=None`` means the uniform mixture over the decay
    channels: every channel is propagated as a pure state and the integrals
    averaged. A pure state may leave probability behind (p_det < 1), in
    which case the mean is conditional on detection.

    ``t_max`` must leave survival below 1e-10 for every propagated state;
    otherwise an AccuracyError carrying the residual survival is raised.
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if initial_state is None:
        starts = list(_channels_of(system))
    else:
        psi = np.asarray(initial_state, dtype=complex)
        if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
            raise ValueError("initial state must have unit norm")
        starts = [psi]
    p_total, m_total = 0.0, 0.0
    for start in starts:
        p, m = _integrate_decay(system, start, t_max, rel_tol)
        p_total += p
        m_total += m
    p_det = p_total / len(starts)
    mean = (m_total / len(starts)) / p_det
    return p_det, mean
