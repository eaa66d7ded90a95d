"""Hermitian input systems and their reduction to distinct levels with overlaps.

Everything downstream (resolvent, poles, decay-time statistics) consumes the
reduced description: the list of distinct energies ``E_l`` together with the
total squared projection ``p_l`` of the decay state onto each eigenspace.
Degenerate eigenvectors are merged into a single level, levels the decay
state cannot see are dropped, so the number of surviving levels is the
winding number ``w``.

Units: hbar = 1 throughout, so energies and rates are interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, ConvergenceError

DEFAULT_OVERLAP_TOL = 1e-12

__all__ = [
    "QuantumSystem",
    "EigenDecomposition",
    "SpectralModel",
    "jacobi_eigh",
    "eigendecompose",
    "build_spectral_model",
    "subspace_rank",
    "total_subspace_rank",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuantumSystem:
    """Hermitian Hamiltonian, a single decay state, and the decay rate.

    Parameters
    ----------
    hamiltonian : (N, N) complex array
        Must equal its conjugate transpose entrywise within 1e-12.
    decay_state : (N,) complex array
        Unit Euclidean norm within 1e-12.
    gamma : float
        Positive decay rate of amplitude through the decay state.
    """

    hamiltonian: np.ndarray
    decay_state: np.ndarray
    gamma: float

    def __post_init__(self):
        h = np.array(self.hamiltonian, dtype=complex)
        d = np.array(self.decay_state, dtype=complex).ravel()
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"hamiltonian must be square, got shape {h.shape}")
        if d.shape[0] != h.shape[0]:
            raise ValueError(
                f"decay_state length {d.shape[0]} does not match matrix size {h.shape[0]}"
            )
        if not np.allclose(h, h.conj().T, rtol=0.0, atol=1e-12):
            raise ValueError("hamiltonian is not Hermitian within 1e-12")
        norm = np.linalg.norm(d)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"decay_state norm {norm!r} is not 1 within 1e-12")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "hamiltonian", _frozen_array(h, complex))
        object.__setattr__(self, "decay_state", _frozen_array(d, complex))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class EigenDecomposition:
    """Full real spectrum and orthonormal eigenbasis, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen_array(self.eigenvalues, float))
        object.__setattr__(self, "eigenvectors", _frozen_array(self.eigenvectors, complex))


@dataclass(frozen=True)
class SpectralModel:
    """Distinct energy levels with their decay-state overlaps.

    ``levels`` is an ascending tuple of (energy, overlap) pairs. Overlaps sum
    to one; mass that was dropped because it fell below ``overlap_tol`` is
    reported in ``discarded_overlap`` rather than silently hidden.
    """

    levels: tuple
    degeneracy_tol: float
    overlap_tol: float = DEFAULT_OVERLAP_TOL
    discarded_overlap: float = 0.0

    def __post_init__(self):
        levels = tuple((float(e), float(p)) for e, p in self.levels)
        if not levels:
            raise ValueError("a SpectralModel needs at least one level")
        if not (self.degeneracy_tol > 0 and self.overlap_tol > 0):
            raise ValueError("tolerances must be positive")
        energies = np.array([e for e, _ in levels])
        overlaps = np.array([p for _, p in levels])
        gaps = np.diff(energies)
        if np.any(gaps <= self.degeneracy_tol):
            raise ValueError(
                "level energies must be strictly increasing with gaps above "
                f"degeneracy_tol={self.degeneracy_tol!r}; smallest gap "
                f"{gaps.min() if gaps.size else float('inf')!r}"
            )
        if np.any(overlaps <= self.overlap_tol) or np.any(overlaps > 1.0 + 1e-12):
            raise ValueError("every overlap must satisfy overlap_tol < p <= 1")
        if abs(overlaps.sum() - 1.0) > 1e-10:
            raise ValueError(f"overlaps sum to {overlaps.sum()!r}, expected 1 within 1e-10")
        object.__setattr__(self, "levels", levels)

    @property
    def w(self) -> int:
        """Number of distinct levels visible to the decay state."""
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for e, _ in self.levels])

    @property
    def overlaps(self) -> np.ndarray:
        return np.array([p for _, p in self.levels])

    @property
    def min_gap(self) -> float:
        e = self.energies
        return float(np.diff(e).min()) if e.size > 1 else np.inf

    @property
    def span(self) -> float:
        e = self.energies
        return float(e[-1] - e[0]) if e.size > 1 else 0.0


def jacobi_eigh(matrix: np.ndarray, max_sweeps: int = 50, rel_tol: float = 1e-14):
    """Diagonalize a complex Hermitian matrix by cyclic Jacobi rotations.

    Sweeps over all upper-triangle pivots, each time applying the unitary
    plane rotation that zeroes the pivot, until the off-diagonal Frobenius
    norm drops below ``rel_tol`` times the matrix norm.

    Returns (eigenvalues ascending, eigenvector columns).

    Raises
    ------
    ConvergenceError
        If the off-diagonal residual is still above threshold after
        ``max_sweeps`` sweeps. The residual is attached to the error.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n == 1:
        return a.real.ravel().copy(), v

    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    threshold = rel_tol * scale

    def offdiag_norm() -> float:
        upper = a[np.triu_indices(n, k=1)]
        return float(np.sqrt(2.0) * np.linalg.norm(upper))

    for _ in range(max_sweeps):
        if offdiag_norm() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                # Rotating on pivots comparable to machine noise just churns.
                if mag <= 1e-18 * scale:
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s * phase], [-s * np.conj(phase), c]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[[p, q], :] = rot.conj().T @ a[[p, q], :]
                v[:, [p, q]] = v[:, [p, q]] @ rot
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        residual = offdiag_norm()
        if residual > threshold:
            raise ConvergenceError(
                f"Jacobi sweeps did not converge in {max_sweeps} sweeps, "
                f"off-diagonal residual {residual:.3e}",
                residual=residual,
            )

    eigenvalues = np.diag(a).real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]


def eigendecompose(system: QuantumSystem, max_sweeps: int = 50) -> EigenDecomposition:
    """Full eigendecomposition of the system Hamiltonian."""
    values, vectors = jacobi_eigh(system.hamiltonian, max_sweeps=max_sweeps)
    return EigenDecomposition(values, vectors)


def _cluster_sorted(values: np.ndarray, tol: float) -> list:
    """Single-linkage clustering of an ascending array: chain gaps <= tol."""
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            groups.append(slice(start, i))
            start = i
    return groups


def build_spectral_model(
    system: QuantumSystem,
    degeneracy_tol: float | None = None,
    overlap_tol: float = DEFAULT_OVERLAP_TOL,
) -> SpectralModel:
    """Reduce a system to its distinct-level/overlap description.

    Eigenvalues closer than ``degeneracy_tol`` (default ``1e-9 * ||H||``) are
    merged into one level whose overlap is the summed squared projection of
    the decay state onto the merged eigenvectors. Levels whose total overlap
    is at most ``overlap_tol`` are dropped and the rest renormalized; the
    dropped mass is recorded on the result.

    Raises
    ------
    ValueError
        If every overlap falls below ``overlap_tol`` (decay state orthogonal
        to the whole spectrum).
    """
    eig = eigendecompose(system)
    radius = max(abs(eig.eigenvalues[0]), abs(eig.eigenvalues[-1]), 1e-300)
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * radius
    if not (degeneracy_tol > 0 and overlap_tol > 0):
        raise ValueError("tolerances must be positive")

    amplitudes = eig.eigenvectors.conj().T @ system.decay_state
    weights = np.abs(amplitudes) ** 2
    total = weights.sum()
    if abs(total - 1.0) > 1e-10:
        raise AccuracyError(
            f"pre-drop overlap sum {total!r} deviates from 1 beyond 1e-10; "
            "eigenbasis is not orthonormal enough",
            value=total,
        )

    levels = []
    discarded = 0.0
    for group in _cluster_sorted(eig.eigenvalues, degeneracy_tol):
        p = float(weights[group].sum())
        if p <= overlap_tol:
            discarded += p
            continue
        energy = float(np.average(eig.eigenvalues[group], weights=weights[group]))
        levels.append((energy, p))
    if not levels:
        raise ValueError(
            "decay state is orthogonal to the entire spectrum "
            f"(all overlaps <= {overlap_tol!r})"
        )

    kept = sum(p for _, p in levels)
    levels = [(e, p / kept) for e, p in levels]
    return SpectralModel(
        levels=tuple(levels),
        degeneracy_tol=degeneracy_tol,
        overlap_tol=overlap_tol,
        discarded_overlap=discarded,
    )


def subspace_rank(channel_states, level_eigenvectors, rank_tol: float = 1e-10) -> int:
    """Numerical rank of the cross-Gram matrix between channels and one eigenspace.

    ``channel_states`` and ``level_eigenvectors`` are sequences of orthonormal
    vectors. The rank is the count of eigenvalues of the Hermitian Gram
    product exceeding ``rank_tol``.
    """
    c = np.atleast_2d(np.array(channel_states, dtype=complex))
    e = np.atleast_2d(np.array(level_eigenvectors, dtype=complex))
    if c.shape[1] != e.shape[1]:
        raise ValueError(
            f"channel dimension {c.shape[1]} does not match eigenvector dimension {e.shape[1]}"
        )
    cross = c.conj() @ e.T
    gram = cross @ cross.conj().T
    values, _ = jacobi_eigh(gram)
    return int(np.sum(values > rank_tol))


def total_subspace_rank(
    channel_states,
    eigen: EigenDecomposition,
    degeneracy_tol: float | None = None,
    rank_tol: float = 1e-10,
) -> int:
    """Sum of per-level cross-Gram ranks over all distinct levels.

    This is the winding number of the multi-channel problem: each level
    contributes the dimension of its eigenspace that the channel subspace
    can see.
    """
    radius = max(abs(eigen.eigenvalues[0]), abs(eigen.eigenvalues[-1]), 1e-300)
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * radius
    total = 0
    for group in _cluster_sorted(eigen.eigenvalues, degeneracy_tol):
        vectors = eigen.eigenvectors[:, group].T
        total += subspace_rank(channel_states, vectors, rank_tol=rank_tol)
    return total
