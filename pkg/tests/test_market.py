import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from qgames.market import RiskOscillator, hbar_eff, min_risk_inclination, omega, risk_spectrum


def fd_levels(o: RiskOscillator, points=512, count=1):
    """Lowest eigenvalues of the oscillator Hamiltonian on a truncated uniform grid."""
    hb = math.sqrt(o.hbar_e**2 + o.big_theta**2)
    w = 2 * math.pi / o.theta
    length = math.sqrt(hb / (o.m * w))
    q = np.linspace(-10 * length, 10 * length, points)
    dq = q[1] - q[0]
    kin = hb**2 / (2 * o.m * dq**2)
    diag = 2 * kin + 0.5 * o.m * w**2 * q**2
    off = np.full(points - 1, -kin)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1), eigvals_only=True)


def test_omega_examples():
    assert omega(2 * math.pi) == 1.0
    assert omega(1.0) == 2 * math.pi
    assert omega(6.0) == pytest.approx(omega(3.0) / 2)
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            omega(bad)


def test_hbar_eff_examples():
    assert hbar_eff(1.7, 0.0) == 1.7
    assert hbar_eff(3.0, 4.0) == 5.0
    vals = [hbar_eff(1.0, t) for t in np.linspace(0, 5, 20)]
    assert all(x < y for x, y in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        hbar_eff(1.0, -0.1)
    with pytest.raises(ValueError):
        hbar_eff(0.0, 1.0)


def test_ground_level_times_two_theta():
    o = RiskOscillator(m=2.0, theta=3.0, hbar_e=0.7)
    e0 = risk_spectrum(o, 0)
    assert e0 == pytest.approx(0.7 * math.pi / 3.0, rel=1e-15)
    assert e0 * 2 * o.theta == pytest.approx(2 * math.pi * 0.7, rel=1e-15)


def test_equal_spacing_and_monotonicity():
    o = RiskOscillator(theta=1.3, hbar_e=0.4, big_theta=0.3)
    levels = [risk_spectrum(o, n) for n in range(10)]
    gaps = np.diff(levels)
    np.testing.assert_allclose(gaps, hbar_eff(0.4, 0.3) * omega(1.3), rtol=1e-12)
    assert all(g > 0 for g in gaps)
    flat = RiskOscillator(theta=1.3, hbar_e=0.4, big_theta=0.0)
    assert all(risk_spectrum(o, n) > risk_spectrum(flat, n) for n in range(10))
    with pytest.raises(ValueError):
        risk_spectrum(o, -1)


def test_min_risk_inclination():
    assert min_risk_inclination(RiskOscillator(hbar_e=1.3)) == 2 * math.pi * 1.3
    assert min_risk_inclination(RiskOscillator(hbar_e=3.0, big_theta=4.0)) == 2 * math.pi * 5.0
    base = min_risk_inclination(RiskOscillator(hbar_e=0.9, big_theta=0.2))
    for m in np.linspace(0.1, 5, 10):
        for theta in np.linspace(0.1, 20, 10):
            o = RiskOscillator(m=float(m), theta=float(theta), hbar_e=0.9, big_theta=0.2)
            assert min_risk_inclination(o) == pytest.approx(base, rel=1e-14)
            assert risk_spectrum(o, 0) * 2 * theta == pytest.approx(base, rel=1e-12)


def test_oscillator_validation():
    with pytest.raises(ValueError):
        RiskOscillator(m=0.0)
    with pytest.raises(ValueError):
        RiskOscillator(theta=-1.0)
    with pytest.raises(ValueError):
        RiskOscillator(big_theta=-1.0)


@pytest.mark.parametrize("m, theta, hbar_e, big_theta", [(1.0, 2 * math.pi, 1.0, 0.0), (2.5, 0.7, 0.3, 0.4)])
def test_finite_difference_oracle(m, theta, hbar_e, big_theta):
    o = RiskOscillator(m, theta, hbar_e, big_theta)
    fd = fd_levels(o, 512, 3)
    analytic = [risk_spectrum(o, n) for n in range(3)]
    np.testing.assert_allclose(fd, analytic, rtol=1e-2)
