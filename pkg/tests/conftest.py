import numpy as np
import pytest

from qdecay import SpectralModel


def random_spectral_model(rng, w=None, min_gap=0.1, min_overlap=0.02, span=(-5.0, 5.0)):
    """Random valid model: w levels in span with gaps and overlaps bounded away from zero."""
    if w is None:
        w = int(rng.integers(1, 13))
    while True:
        energies = np.sort(rng.uniform(span[0], span[1], w))
        if w == 1 or np.diff(energies).min() > min_gap:
            break
    overlaps = rng.uniform(min_overlap, 1.0, w)
    overlaps /= overlaps.sum()
    # renormalization can push an entry below the floor; nudge and renormalize once
    overlaps = np.maximum(overlaps, min_overlap / w)
    overlaps /= overlaps.sum()
    return SpectralModel(
        levels=tuple(zip(energies.tolist(), overlaps.tolist())),
        degeneracy_tol=min_gap * 1e-3,
    )


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2.0


def random_unit_vector(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
