import numpy as np
import pytest

from qdecay import (
    PotentialField,
    SingularityError,
    SpectralModel,
    build_spectral_model,
    compute_winding,
    find_poles,
    potential_gradient,
    potential_value,
    resolvent_at,
    resolvent_derivative,
    tight_binding_ring,
    two_level_spectral_model,
    winding_map,
    TwoLevelParams,
)
from conftest import random_spectral_model

SINGLE = SpectralModel(levels=((0.0, 1.0),), degeneracy_tol=1e-12)


def test_resolvent_single_level():
    assert resolvent_at(SINGLE, 1.0) == pytest.approx(1.0)
    assert resolvent_derivative(SINGLE, 1.0) == pytest.approx(-1.0)


def test_resolvent_two_level_closed_form():
    # R(s) = (s - i delta/2) / (s^2 + delta^2/4 + Omega^2)
    model = two_level_spectral_model(TwoLevelParams(delta=1.0, omega=1.0, gamma=1.0))
    value = resolvent_at(model, 1.0)
    assert value == pytest.approx((1.0 - 0.5j) / 2.25, abs=1e-14)


def test_resolvent_purely_imaginary_on_axis(rng):
    for _ in range(20):
        model = random_spectral_model(rng)
        omega = rng.uniform(-8.0, 8.0)
        if np.min(np.abs(omega + model.energies)) < 1e-3:
            continue
        value = resolvent_at(model, 1j * omega)
        scale = model.overlaps.sum() / np.abs(omega + model.energies).min()
        assert abs(value.real) < 1e-13 * max(scale, 1.0)


def test_resolvent_derivative_finite_difference(rng):
    h = 1e-6
    for _ in range(10):
        model = random_spectral_model(rng)
        s = complex(rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0))
        numeric = (resolvent_at(model, s + h) - resolvent_at(model, s - h)) / (2 * h)
        exact = resolvent_derivative(model, s)
        assert abs(numeric - exact) < 1e-6 * abs(exact)


def test_resolvent_pole_guard():
    with pytest.raises(SingularityError) as info:
        resolvent_at(SINGLE, 0.0)
    assert info.value.index == 0


def test_winding_map_special_points():
    assert winding_map(0.0) == pytest.approx(-np.exp(-1.0))
    assert winding_map(1.0) == pytest.approx(0.0)
    assert winding_map(1e14j) == pytest.approx(np.e, rel=1e-10)
    with pytest.raises(SingularityError):
        winding_map(-1.0)


def test_winding_single_level():
    for gamma in (0.01, 1.0, 100.0):
        assert compute_winding(SINGLE, gamma).winding == 1


def test_winding_ring():
    model = build_spectral_model(tight_binding_ring(6, 1.0, 0.0, gamma=4.0))
    curve = compute_winding(model, 4.0)
    assert curve.winding == 4
    assert curve.arg_residual < 1e-6


def test_winding_counts_levels(rng):
    for _ in range(30):
        model = random_spectral_model(rng)
        assert compute_winding(model, rng.uniform(0.05, 20.0)).winding == model.w


def test_winding_gamma_rescaling_invariance():
    model = build_spectral_model(tight_binding_ring(6, 1.0, 0.0, gamma=1.0))
    for gamma in np.logspace(-3, 3, 20):
        assert compute_winding(model, gamma).winding == model.w


def test_winding_curve_step_bound():
    model = build_spectral_model(tight_binding_ring(6, 1.0, 0.0, gamma=4.0))
    points = compute_winding(model, 4.0).curve_points
    steps = np.abs(np.angle(points[1:] / points[:-1]))
    assert steps.max() < np.pi / 2


def test_potential_single_charge():
    field = PotentialField(SINGLE, gamma=1.0)
    assert potential_value(field, 1.0, 0.0) == pytest.approx(1.0)
    # stationary point of a single unit charge sits at x = -gamma
    gx, gy = potential_gradient(field, -1.0, 0.0)
    assert abs(gx) < 1e-14 and abs(gy) < 1e-14
    with pytest.raises(SingularityError):
        potential_value(field, 0.0, 0.0)


def test_potential_mirror_symmetry():
    model = SpectralModel(levels=((-1.5, 0.5), (1.5, 0.5)), degeneracy_tol=1e-9)
    field = PotentialField(model, gamma=2.0)
    for x, y in [(-0.3, 0.7), (-1.2, 2.1), (0.4, 0.2)]:
        assert potential_value(field, x, y) == pytest.approx(potential_value(field, x, -y))


def test_gradient_matches_resolvent_identity(rng):
    for _ in range(10):
        model = random_spectral_model(rng)
        gamma = rng.uniform(0.2, 5.0)
        field = PotentialField(model, gamma)
        x, y = rng.uniform(-3.0, -0.2), rng.uniform(-3.0, 3.0)
        gx, gy = potential_gradient(field, x, y)
        lhs = gx - 1j * gy
        rhs = 1.0 / gamma + resolvent_at(model, complex(x, y))
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_gradient_finite_difference(rng):
    model = random_spectral_model(rng, w=4)
    field = PotentialField(model, gamma=1.3)
    h = 1e-6
    x, y = -0.8, 0.4
    gx, gy = potential_gradient(field, x, y)
    fx = (potential_value(field, x + h, y) - potential_value(field, x - h, y)) / (2 * h)
    fy = (potential_value(field, x, y + h) - potential_value(field, x, y - h)) / (2 * h)
    assert abs(fx - gx) < 1e-6 and abs(fy - gy) < 1e-6


def test_poles_are_stationary_points(rng):
    for _ in range(5):
        model = random_spectral_model(rng, w=5)
        gamma = rng.uniform(0.3, 3.0)
        field = PotentialField(model, gamma)
        for s in find_poles(model, gamma).poles:
            gx, gy = potential_gradient(field, s.real, s.imag)
            assert np.hypot(gx, gy) < 1e-8 / gamma
            assert s.real < 0
