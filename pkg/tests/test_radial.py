"""Tortoise map, potentials, wave integration, and the A(r) profile."""

import numpy as np
import pytest
from scipy.special import spherical_jn, spherical_yn

from quasilocal import (
    AnchorBoundary,
    AsymptoticBoundary,
    AxialMode,
    BackgroundParams,
    CoverageError,
    DomainError,
    PolarMode,
    SurfaceAnchorBoundary,
    a_profile,
    integrate_wave,
    inverse_tortoise,
    potential_axial,
    potential_polar,
    tortoise,
)


# ----------------------------------------------------------------------
# tortoise coordinate
# ----------------------------------------------------------------------


def test_tortoise_spot_values(bg_unit, bg_flat):
    assert tortoise(4.0, bg_unit) == pytest.approx(4.0, abs=1e-14)  # ln(1) = 0
    assert tortoise(7.0, bg_flat) == 7.0
    # logarithmic divergence toward the horizon, monotone
    rs = tortoise(np.array([2.0 + 1e-10, 2.0 + 1e-6, 3.0, 10.0]), bg_unit)
    assert rs[0] < -40.0
    assert np.all(np.diff(rs) > 0)


def test_tortoise_domain(bg_unit):
    with pytest.raises(DomainError):
        tortoise(2.0, bg_unit)
    with pytest.raises(DomainError):
        tortoise(1.0, bg_unit)


def test_inverse_tortoise_round_trip(bg_unit, bg_flat):
    assert inverse_tortoise(4.0, bg_unit) == pytest.approx(4.0, rel=1e-13)
    assert inverse_tortoise(-3.5, bg_flat) == -3.5
    for rstar in (-30.0, -5.0, 0.0, 10.0, 1e4):
        r = inverse_tortoise(rstar, bg_unit)
        assert tortoise(r, bg_unit) == pytest.approx(rstar, abs=1e-10 * max(1, abs(rstar)))
    # proximity below machine resolution of r saturates just outside 2m
    r_deep = inverse_tortoise(-300.0, bg_unit)
    assert r_deep > 2.0
    assert r_deep == pytest.approx(2.0, rel=1e-14)


def test_inverse_tortoise_vs_bisection(bg_unit):
    # independent oracle: bisection on the monotone map
    target = 10.0
    lo, hi = 2.0 + 1e-12, 100.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if tortoise(mid, bg_unit) < target:
            lo = mid
        else:
            hi = mid
    assert inverse_tortoise(target, bg_unit) == pytest.approx(0.5 * (lo + hi), rel=1e-12)


# ----------------------------------------------------------------------
# potentials
# ----------------------------------------------------------------------


def test_potential_axial_spot(bg_unit):
    # direct substitution: (9-6)/243 * (6*3 - 6) = 4/27
    mode = AxialMode(ell=2, sigma=0.5, mu_sq=4.0)
    assert potential_axial(3.0, bg_unit, mode) == pytest.approx(4.0 / 27.0, rel=1e-15)


def test_potential_polar_spot(bg_unit):
    # direct substitution, cubic = 324 + 108 + 54 + 9 = 495
    mode = PolarMode(n=2.0, sigma=0.5)
    assert potential_polar(3.0, bg_unit, mode) == pytest.approx(
        2970.0 / 19683.0, rel=1e-15
    )


def test_potentials_vanish_at_horizon(bg_unit):
    assert potential_axial(2.0, bg_unit, AxialMode()) == 0.0
    assert potential_polar(2.0, bg_unit, PolarMode()) == 0.0
    with pytest.raises(DomainError):
        potential_axial(1.9, bg_unit, AxialMode())
    with pytest.raises(DomainError):
        potential_polar(1.9, bg_unit, PolarMode())


def test_potential_large_r_correspondence(bg_unit):
    # both behave as l(l+1)/r^2 = 6/r^2 for mu^2 = 4 <-> n = 2; the
    # difference decays one power faster than 1/r^2
    ax, po = AxialMode(ell=2, sigma=0.5), PolarMode(n=2.0, sigma=0.5)
    d1 = abs(potential_axial(1e4, bg_unit, ax) - potential_polar(1e4, bg_unit, po))
    d2 = abs(potential_axial(1e5, bg_unit, ax) - potential_polar(1e5, bg_unit, po))
    assert d1 <= 1e-6
    ratio = (d1 * 1e4**2) / (d2 * 1e5**2)
    assert ratio > 5.0  # scaled difference still decaying => faster than 1/r^2


# ----------------------------------------------------------------------
# wave integration
# ----------------------------------------------------------------------


def _flat_bessel_solution(tol=1e-11):
    bg = BackgroundParams(m=0.0)
    mode = AxialMode(ell=2, sigma=1.0, mu_sq=4.0)
    z0 = spherical_jn(2, 1.0)
    dz0 = spherical_jn(2, 1.0) + spherical_jn(2, 1.0, derivative=True)
    return bg, mode, integrate_wave(
        bg, mode, AnchorBoundary(z=z0, dz=dz0, r=1.0), (1.0, 100.0), tol=tol
    )


def test_flat_space_bessel_oracle():
    # closed form: Z = sigma r j2(sigma r) solves the flat wave equation
    _, _, sol = _flat_bessel_solution()
    r = np.linspace(1.0, 100.0, 1500)
    z, _ = sol.eval_r(r)
    ref = r * spherical_jn(2, r)
    assert np.max(np.abs(z - ref)) / np.max(np.abs(ref)) <= 1e-8
    z_pi, _ = sol.eval_r(np.pi)
    assert z_pi[0] == pytest.approx(3.0 / np.pi, abs=1e-9)  # j2(pi) = 3/pi^2


def test_zero_initial_data(bg_unit, mode_l2):
    sol = integrate_wave(
        bg_unit, mode_l2, AnchorBoundary(z=0.0, dz=0.0, r=30.0), (20.0, 50.0)
    )
    assert np.max(np.abs(sol.z)) == 0.0
    assert np.max(np.abs(sol.dz)) == 0.0


def test_fixed_step_linearity(bg_unit, mode_l2):
    kw = dict(r_range=(20.0, 60.0), fixed_step=800)
    sol_a = integrate_wave(bg_unit, mode_l2, AnchorBoundary(z=0.3, dz=0.1, r=30.0), **kw)
    sol_b = integrate_wave(bg_unit, mode_l2, AnchorBoundary(z=0.6, dz=0.2, r=30.0), **kw)
    # doubling is exact in floating point (power-of-two scaling)
    assert np.max(np.abs(sol_b.z - 2.0 * sol_a.z)) == 0.0
    sol_c = integrate_wave(bg_unit, mode_l2, AnchorBoundary(z=-0.1, dz=0.5, r=30.0), **kw)
    sol_d = integrate_wave(bg_unit, mode_l2, AnchorBoundary(z=0.5, dz=0.7, r=30.0), **kw)
    scale = np.max(np.abs(sol_d.z))
    assert np.max(np.abs(sol_d.z - (sol_b.z + sol_c.z))) <= 1e-13 * scale


def test_amplitude_scaling_through_mode(bg_unit):
    m1 = AxialMode(ell=2, sigma=0.5, amplitude=1.0)
    m2 = AxialMode(ell=2, sigma=0.5, amplitude=2.0)
    kw = dict(boundary=AnchorBoundary(z=0.5, dz=0.25, r=30.0), r_range=(25.0, 40.0), fixed_step=400)
    s1 = integrate_wave(bg_unit, m1, **kw)
    s2 = integrate_wave(bg_unit, m2, **kw)
    assert np.max(np.abs(s2.z - 2.0 * s1.z)) == 0.0


def test_fixed_step_convergence_order():
    # RK4: halving the step cuts the Bessel-oracle error ~16x
    bg = BackgroundParams(m=0.0)
    mode = AxialMode(ell=2, sigma=1.0, mu_sq=4.0)
    z0 = spherical_jn(2, 5.0) * 5.0
    dz0 = spherical_jn(2, 5.0) + 5.0 * spherical_jn(2, 5.0, derivative=True)
    errs = []
    for n in (200, 400):
        sol = integrate_wave(
            bg, mode, AnchorBoundary(z=z0, dz=dz0, r=5.0), (5.0, 40.0), fixed_step=n
        )
        ref = sol.r * spherical_jn(2, sol.r)
        errs.append(np.max(np.abs(sol.z - ref)))
    order = np.log2(errs[0] / errs[1])
    assert 3.5 <= order <= 4.6


def test_adaptive_tolerance_scaling():
    errs = []
    for tol in (1e-6, 1e-9):
        _, _, sol = _flat_bessel_solution(tol=tol)
        r = np.linspace(2.0, 90.0, 400)
        z, _ = sol.eval_r(r)
        errs.append(np.max(np.abs(z - r * spherical_jn(2, r))))
    assert errs[0] > 10.0 * errs[1]


def test_residual_below_tolerance(bg_unit, mode_l2, axial_solution):
    assert axial_solution.residual_max() <= 100.0 * axial_solution.tol


def test_boundary_outside_range(bg_unit, mode_l2):
    with pytest.raises(DomainError):
        integrate_wave(
            bg_unit, mode_l2, AnchorBoundary(z=1.0, dz=0.0, r=10.0), (20.0, 50.0)
        )
    with pytest.raises(DomainError):
        integrate_wave(
            bg_unit, mode_l2, SurfaceAnchorBoundary(z=1.0, dz=0.0), (20.0, 50.0)
        )


def test_asymptotic_boundary_flat_oracle():
    # general flat solution: a sin(x + phi) asymptotics correspond to
    # -a cos(phi) x j2(x) + a sin(phi) x y2(x)
    bg = BackgroundParams(m=0.0)
    mode = AxialMode(ell=2, sigma=1.0, mu_sq=4.0)
    phase = 0.3
    errs = []
    for v_thr in (1e-6, 1e-8):
        sol = integrate_wave(
            bg,
            mode,
            AsymptoticBoundary(amplitude=1.0, phase=phase, v_threshold=v_thr),
            (5.0, 150.0),
            tol=1e-11,
        )
        assert sol.asymptotic_truncation is not None
        assert sol.asymptotic_truncation <= v_thr * 1.0001
        r = np.linspace(5.0, 150.0, 300)
        z, _ = sol.eval_r(r)
        ref = -np.cos(phase) * r * spherical_jn(2, r) + np.sin(phase) * r * spherical_yn(2, r)
        errs.append(np.max(np.abs(z - ref)))
    # truncation error shrinks with the threshold (phase error ~ 1/r_start)
    assert errs[1] < 0.2 * errs[0]


def test_polar_integration_runs(bg_unit):
    mode = PolarMode(n=2.0, sigma=0.5)
    sol = integrate_wave(
        bg_unit, mode, AnchorBoundary(z=0.0, dz=1.0, r=30.0), (20.0, 60.0), tol=1e-11
    )
    assert sol.kind == "polar"
    assert sol.residual_max() <= 100.0 * sol.tol
    with pytest.raises(DomainError):
        a_profile(sol)


def test_coverage_errors(axial_solution):
    with pytest.raises(CoverageError):
        axial_solution.eval_r(10.0)
    with pytest.raises(CoverageError):
        axial_solution.eval_r(90.0)


# ----------------------------------------------------------------------
# parameter validation
# ----------------------------------------------------------------------


def test_parameter_validation():
    with pytest.raises(DomainError):
        BackgroundParams(m=-1.0)
    with pytest.raises(DomainError):
        AxialMode(ell=1)
    with pytest.raises(DomainError):
        AxialMode(sigma=-0.5)
    with pytest.raises(DomainError):
        PolarMode(n=0.0)
    assert AxialMode(ell=3).mu_sq == 10.0  # (ell-1)(ell+2)
    assert AxialMode(ell=2).mu_sq == 4.0


# ----------------------------------------------------------------------
# A(r) profile
# ----------------------------------------------------------------------


def test_a_prime_vs_finite_difference(axial_profile):
    h, r = 1e-4, 50.0
    fd = (axial_profile.a(r + h) - axial_profile.a(r - h)) / (2.0 * h)
    assert axial_profile.a_prime(r) == pytest.approx(fd, rel=1e-6)


def test_a_prime_h_refinement(axial_profile):
    # centered difference converges at O(h^2) toward the analytic derivative
    r = 45.0
    exact = axial_profile.a_prime(r)
    errs = []
    for h in (2e-3, 1e-3):
        fd = (axial_profile.a(r + h) - axial_profile.a(r - h)) / (2.0 * h)
        errs.append(abs(fd - exact))
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_a_double_prime_vs_finite_difference(axial_profile):
    r, h = 50.0, 1e-3
    fd = (
        axial_profile.a(r + h) - 2.0 * axial_profile.a(r) + axial_profile.a(r - h)
    ) / h**2
    assert axial_profile.a_double_prime(r) == pytest.approx(fd, rel=1e-5)


def test_a_profile_flat_symbolic_oracle():
    # flat case: A = (1/sigma^2 r) d(rZ)/dr with Z = x j2(x), closed form
    bg, mode, sol = _flat_bessel_solution()
    prof = a_profile(sol)
    x = np.array([7.0, 20.0, 55.0])
    j2 = spherical_jn(2, x)
    dj2 = spherical_jn(2, x, derivative=True)
    a_exact = 2.0 * j2 + x * dj2
    ap_exact = dj2 + 6.0 * j2 / x - x * j2
    app_exact = 4.0 * dj2 / x - 2.0 * j2 - x * dj2
    assert prof.a(x) == pytest.approx(a_exact, abs=1e-9)
    assert prof.a_prime(x) == pytest.approx(ap_exact, abs=1e-9)
    assert prof.a_double_prime(x) == pytest.approx(app_exact, abs=1e-9)


def test_a_profile_horizon_limit():
    # (r - 2m) Z term dies at the horizon, leaving A -> Z'/sigma^2
    bg = BackgroundParams(m=1.0)
    mode = AxialMode(ell=2, sigma=0.5)
    r_in = 2.0 + 1e-6
    sol = integrate_wave(
        bg, mode, AnchorBoundary(z=0.4, dz=0.3, r=3.0), (r_in, 10.0), tol=1e-11
    )
    prof = a_profile(sol)
    r = 2.0 + 2e-6
    _, dz = sol.eval_r(r)
    assert prof.a(r) == pytest.approx(dz[0] / mode.sigma**2, rel=1e-5)


def test_a_profile_coverage(axial_profile):
    with pytest.raises(CoverageError):
        axial_profile.a(500.0)
