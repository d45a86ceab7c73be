import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoprop.errors import NotTransversal, ValidationError
from geoprop.kernels import GalileiGenerator, QuadraticKernel, principal_sqrt


def test_kernel_scalar_coefficients():
    k = QuadraticKernel(1, 0.5, 0.5, -1.0, amp=2.0, phase_amp=1j, hbar=0.5)
    assert k.a_xx.shape == (1, 1)
    assert k.prefactor == 2j
    x, xp = 0.3, -0.7
    q = 0.5 * x * x + 0.5 * xp * xp - x * xp
    assert k(x, xp) == pytest.approx(2j * cmath.exp(1j * q / 0.5), abs=1e-15)


def test_kernel_2d_action():
    k = QuadraticKernel(2, np.eye(2), 2 * np.eye(2), [[1.0, 0.5], [-0.5, 1.0]], [0.1, 0.2], [0.0, 0.3], c0=0.4)
    x, xp = np.array([0.2, -0.1]), np.array([0.5, 0.3])
    want = x @ x + 2 * xp @ xp + x @ np.array([[1.0, 0.5], [-0.5, 1.0]]) @ xp + 0.02 - 0.02 + 0.09 + 0.4
    assert k.action(x, xp) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize(
    "kwargs, exc",
    [
        (dict(n=3, a_xx=0, a_xpxp=0, a_xxp=1), ValidationError),
        (dict(n=1, a_xx=0, a_xpxp=0, a_xxp=0), NotTransversal),
        (dict(n=1, a_xx=0, a_xpxp=0, a_xxp=1, amp=0.0), ValidationError),
        (dict(n=1, a_xx=0, a_xpxp=0, a_xxp=1, phase_amp=2.0), ValidationError),
        (dict(n=2, a_xx=[[1, 2], [0, 1]], a_xpxp=0, a_xxp=1), ValidationError),
        (dict(n=1, a_xx=np.nan, a_xpxp=0, a_xxp=1), ValidationError),
        (dict(n=2, a_xx=0, a_xpxp=0, a_xxp=1, b_x=[1.0]), ValidationError),
    ],
)
def test_kernel_validation(kwargs, exc):
    with pytest.raises(exc):
        QuadraticKernel(**kwargs)


def test_principal_sqrt_branch():
    assert principal_sqrt(-1) == pytest.approx(1j)
    assert principal_sqrt(-1j).real > 0


# -- generators -----------------------------------------------------------------------


def test_generator_constant_term_rejected():
    with pytest.raises(ValidationError):
        GalileiGenerator([1.0, 2.0])


def test_generator_degree_caps():
    GalileiGenerator.from_powers([0] * 7 + [1.0])
    with pytest.raises(ValidationError):
        GalileiGenerator.from_powers([0] * 8 + [1.0])
    c = np.zeros((6, 6))
    c[3, 2] = 1.0
    with pytest.raises(ValidationError):
        GalileiGenerator(c)


def test_generator_rejects_callables():
    with pytest.raises(ValidationError):
        GalileiGenerator(lambda x: x * x)


def test_generator_evaluation():
    g = GalileiGenerator.from_powers([1.0, -2.0, 0.5])
    x = np.linspace(-2, 2, 5)
    assert np.allclose(g(x), x - 2 * x**2 + 0.5 * x**3)
    assert g.degree == 3
    assert np.allclose(g.gradient(), [1.0, -4.0, 1.5])


def test_generator_2d():
    r = GalileiGenerator.radial(0.5) + GalileiGenerator.linear_2d(1.0, -1.0)
    assert r.ndim == 2 and r.degree == 2
    assert r(1.0, 2.0) == pytest.approx(0.5 * 5 + 1 - 2)
    with pytest.raises(ValidationError):
        r(1.0)
    with pytest.raises(ValidationError):
        r + GalileiGenerator.quadratic(1.0)


def test_generator_zero_and_negation():
    g = GalileiGenerator.quadratic(0.3, 0.1)
    assert (g - g).is_zero()
    assert (g + (-g)) == GalileiGenerator.zero()
    assert GalileiGenerator.zero(2).is_zero()


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=8),
    st.lists(st.floats(-5, 5), min_size=1, max_size=8),
)
def test_generator_addition_is_pointwise(a, b):
    ga, gb = GalileiGenerator.from_powers(a), GalileiGenerator.from_powers(b)
    x = np.linspace(-1, 1, 11)
    assert np.allclose((ga + gb)(x), ga(x) + gb(x), atol=1e-12)
