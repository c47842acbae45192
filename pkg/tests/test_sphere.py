"""Spherical quadrature, special functions, transforms, and operators."""

import numpy as np
import pytest
from scipy.special import eval_legendre

from quasilocal import (
    BandLimitError,
    DomainError,
    GridField,
    HarmonicField,
    SphereGrid,
    analyze,
    apply_operator,
    c_theta,
    coordinate_fields,
    gauss_legendre,
    grad_hess,
    integrate,
    legendre_p,
    legendre_p_dtheta,
    synthesize,
)
from quasilocal.sphere import double_divergence, evaluate, rotate_frame

from conftest import random_harmonic


# ----------------------------------------------------------------------
# quadrature
# ----------------------------------------------------------------------


def test_gauss_legendre_degree_one():
    nodes, weights = gauss_legendre(1)
    assert nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert weights[0] == pytest.approx(2.0, abs=1e-15)


def test_gauss_legendre_degree_two_analytic():
    # roots of P_2(x) = (3x^2 - 1)/2 are +-1/sqrt(3), weights 1, 1
    nodes, weights = gauss_legendre(2)
    assert nodes == pytest.approx([-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0)], abs=1e-15)
    assert weights == pytest.approx([1.0, 1.0], abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 64])
def test_gauss_legendre_weight_sum(n):
    nodes, weights = gauss_legendre(n)
    assert weights.sum() == pytest.approx(2.0, abs=1e-13)
    assert np.all(weights > 0)
    assert np.all(np.diff(nodes) > 0)
    assert np.all(np.abs(nodes) < 1.0)


def test_gauss_legendre_invalid():
    with pytest.raises(DomainError):
        gauss_legendre(0)


# ----------------------------------------------------------------------
# Legendre functions
# ----------------------------------------------------------------------


def test_legendre_spot_values():
    assert legendre_p(2, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert legendre_p(2, 0.0) == pytest.approx(-0.5, abs=1e-15)
    xs = np.linspace(-1, 1, 7)
    assert legendre_p(0, xs) == pytest.approx(np.ones(7), abs=1e-15)


@pytest.mark.parametrize("ell", [1, 3, 7, 20])
def test_legendre_matches_scipy(ell):
    xs = np.linspace(-0.99, 0.99, 25)
    assert legendre_p(ell, xs) == pytest.approx(eval_legendre(ell, xs), abs=1e-12)


def test_legendre_domain_error():
    with pytest.raises(DomainError):
        legendre_p(2, 1.5)
    with pytest.raises(DomainError):
        legendre_p(-1, 0.5)


def test_legendre_dtheta_analytic():
    # d P_2(cos t) / dt = -3 cos t sin t
    ts = np.linspace(0.1, np.pi - 0.1, 11)
    assert legendre_p_dtheta(2, ts) == pytest.approx(
        -3.0 * np.cos(ts) * np.sin(ts), abs=1e-13
    )


def test_legendre_orthogonality_by_quadrature():
    # int P_l P_l' sin(t) dt = 2/(2l+1) delta; checks c_theta's P-level basis
    nodes, weights = gauss_legendre(24)
    for l1 in range(0, 6):
        for l2 in range(0, 6):
            val = np.sum(weights * legendre_p(l1, nodes) * legendre_p(l2, nodes))
            expect = 2.0 / (2 * l1 + 1) if l1 == l2 else 0.0
            assert val == pytest.approx(expect, abs=1e-13)


# ----------------------------------------------------------------------
# C_ell
# ----------------------------------------------------------------------


def test_c_theta_ell2_closed_form():
    # symbolic differentiation gives C_2 = 3 sin^2
    ts = np.linspace(0.0, np.pi, 21)
    assert c_theta(2, ts) == pytest.approx(3.0 * np.sin(ts) ** 2, abs=1e-13)
    assert c_theta(2, np.pi / 2) == pytest.approx(3.0, abs=1e-14)
    assert c_theta(2, 0.0) == 0.0


def test_c_theta_ell3_closed_form():
    # symbolic differentiation gives C_3 = 15 sin^2 cos
    ts = np.linspace(0.0, np.pi, 21)
    assert c_theta(3, ts) == pytest.approx(
        15.0 * np.sin(ts) ** 2 * np.cos(ts), abs=1e-12
    )
    assert abs(c_theta(3, np.pi / 2)) < 1e-14


@pytest.mark.parametrize("ell", [2, 3, 4, 5, 8])
def test_c_theta_matches_definition(ell):
    # oracle: finite differences of (1/sin) dP(cos t)/dt, independent path
    ts = np.linspace(0.4, np.pi - 0.4, 9)
    h = 1e-5

    def inner(t):
        return legendre_p_dtheta(ell, t) / np.sin(t)

    fd = np.sin(ts) * (inner(ts + h) - inner(ts - h)) / (2.0 * h)
    assert c_theta(ell, ts) == pytest.approx(fd, rel=1e-7, abs=1e-8)


def test_c_theta_poles_and_domain():
    assert c_theta(5, 0.0) == 0.0
    assert c_theta(5, np.pi) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(DomainError):
        c_theta(1, 0.5)


# ----------------------------------------------------------------------
# grids and transforms
# ----------------------------------------------------------------------


def test_grid_invariants(grid16):
    assert grid16.weights.sum() == pytest.approx(2.0, abs=1e-13)
    assert np.all(grid16.nodes > 0) and np.all(grid16.nodes < np.pi)
    with pytest.raises(BandLimitError):
        SphereGrid(8, 33, 16)
    with pytest.raises(BandLimitError):
        SphereGrid(17, 8, 16)


@pytest.mark.parametrize("l_max", [4, 8, 16, 32])
def test_transform_round_trip(l_max):
    h = random_harmonic(l_max, seed=l_max)
    grid = SphereGrid.for_band_limit(l_max)
    h2 = analyze(synthesize(h, grid))
    scale = np.max(np.abs(h.coeffs))
    assert np.max(np.abs(h2.coeffs - h.coeffs)) <= 1e-12 * scale


def test_parseval(grid16):
    h = random_harmonic(16, seed=3)
    f = synthesize(h, grid16)
    assert integrate(f * f) == pytest.approx(np.sum(h.coeffs**2), rel=1e-12)


def test_analyze_constant(grid16):
    f = GridField(np.ones((grid16.n_theta, grid16.n_phi)), grid16)
    h = analyze(f)
    assert h.coefficient(0, 0) == pytest.approx(np.sqrt(4.0 * np.pi), rel=1e-14)
    mask = np.abs(h.coeffs) > 1e-12
    assert mask.sum() == 1


def test_z2z3_is_pure_l2(grid16):
    z1, z2, z3 = coordinate_fields(grid16)
    h = analyze(z2 * z3)
    nonzero = np.argwhere(np.abs(h.coeffs) > 1e-12)
    assert nonzero.tolist() == [[2, 16 - 2]]  # single (l=2, m=-2) entry
    # coefficient fixed by the moment int (Z2 Z3)^2 = 4 pi / 15
    assert h.coefficient(2, -2) == pytest.approx(
        np.sqrt(4.0 * np.pi / 15.0), rel=1e-13
    )


def test_orthonormality_gram():
    l_max = 10
    grid = SphereGrid.for_band_limit(l_max)
    n = (l_max + 1) ** 2
    basis = np.empty((n, grid.n_theta, grid.n_phi))
    idx = 0
    for l in range(l_max + 1):
        for m in range(-l, l + 1):
            h = HarmonicField.zeros(l_max)
            h.coeffs[l, l_max + m] = 1.0
            basis[idx] = synthesize(h, grid).values
            idx += 1
    w2d = grid.weights[:, None] * (2.0 * np.pi / grid.n_phi)
    gram = np.einsum("ajk,jk,bjk->ab", basis, w2d, basis)
    assert np.max(np.abs(gram - np.eye(n))) <= 1e-12


def test_evaluate_matches_synthesize(grid16):
    h = random_harmonic(6, seed=11)
    f = synthesize(h, grid16)
    pts = evaluate(h, grid16.nodes, np.zeros_like(grid16.nodes))
    assert pts == pytest.approx(f.values[:, 0], abs=1e-12)


def test_band_limit_violation(grid16):
    h = random_harmonic(32, seed=1)
    with pytest.raises(BandLimitError):
        synthesize(h, grid16)
    f = GridField(np.ones((grid16.n_theta, grid16.n_phi)), grid16)
    with pytest.raises(BandLimitError):
        analyze(f, l_max=32)


# ----------------------------------------------------------------------
# operators and derivatives
# ----------------------------------------------------------------------


def test_operator_eigenvalues(grid16):
    z1, z2, z3 = coordinate_fields(grid16)
    h1 = analyze(z1)
    # roundoff coefficients at high degree are amplified by the eigenvalues
    assert np.max(np.abs(apply_operator(h1, "laplacian").coeffs + 2.0 * h1.coeffs)) < 1e-12
    assert np.max(np.abs(apply_operator(h1, "laplacian_plus_2").coeffs)) < 1e-12
    h23 = analyze(z2 * z3)
    out = apply_operator(h23, "laplacian_laplacian_plus_2")
    assert out.coefficient(2, -2) == pytest.approx(24.0 * h23.coefficient(2, -2), rel=1e-13)
    with pytest.raises(DomainError):
        apply_operator(h1, "banana")


def test_grad_hess_coordinate_function(grid16):
    z1, _, _ = coordinate_fields(grid16)
    d = grad_hess(z1)
    assert np.max(np.abs(d.grad_sq.values - (1.0 - z1.values**2))) < 1e-12
    assert np.max(np.abs(d.laplacian.values + 2.0 * z1.values)) < 1e-11


def test_laplacian_commutes_with_analyze(grid16):
    h = random_harmonic(16, seed=5)
    f = synthesize(h, grid16)
    lap_grid = analyze(grad_hess(f).laplacian)
    lap_spec = apply_operator(h, "laplacian")
    scale = np.max(np.abs(lap_spec.coeffs)) or 1.0
    assert np.max(np.abs(lap_grid.coeffs - lap_spec.coeffs)) <= 1e-10 * scale


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bochner_identity(seed):
    # int |Hess f|^2 = int (Lap f)^2 - int |grad f|^2 on the unit sphere
    l_max = 8
    grid = SphereGrid.for_band_limit(2 * l_max)
    d = grad_hess(synthesize(random_harmonic(l_max, seed), grid))
    lhs = integrate(d.hess_sq)
    rhs = integrate(d.laplacian * d.laplacian) - integrate(d.grad_sq)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_double_divergence_pure_trace():
    # T_ab = g_ab f has nabla^a nabla^b T_ab = Delta f, exactly representable
    l_max = 8
    grid = SphereGrid.for_band_limit(2 * l_max)
    h = random_harmonic(l_max, seed=9)
    f = synthesize(h, grid)
    zero = GridField(np.zeros_like(f.values), grid)
    dd = double_divergence(f, zero, f)
    lap = synthesize(apply_operator(analyze(f), "laplacian"), grid)
    scale = np.max(np.abs(lap.values))
    assert np.max(np.abs(dd.values - lap.values)) <= 1e-10 * scale


# ----------------------------------------------------------------------
# integration
# ----------------------------------------------------------------------


def test_integrate_moments(grid16):
    z1, z2, z3 = coordinate_fields(grid16)
    ones = GridField(np.ones_like(z1.values), grid16)
    assert integrate(ones) == pytest.approx(4.0 * np.pi, rel=1e-14)
    # moment verified symbolically: int Z2^2 Z3^2 = 4 pi / 15
    assert integrate((z2 * z3) * (z2 * z3)) == pytest.approx(
        4.0 * np.pi / 15.0, rel=1e-13
    )
    assert abs(integrate(z1)) < 1e-14


# ----------------------------------------------------------------------
# frames and serialization
# ----------------------------------------------------------------------


def test_rotate_frame(grid16):
    from quasilocal.sphere import DEFAULT_FRAME

    ang = 0.7
    rot = rotate_frame(DEFAULT_FRAME, ang)
    assert rot @ rot.T == pytest.approx(np.eye(3), abs=1e-15)
    z1, z2, z3 = coordinate_fields(grid16)
    z1r, z2r, z3r = coordinate_fields(grid16, rot)
    assert z1r.values == pytest.approx(z1.values, abs=1e-15)
    assert z2r.values == pytest.approx(
        np.cos(ang) * z2.values + np.sin(ang) * z3.values, abs=1e-14
    )


def test_csv_serialization(tmp_path, grid16):
    h = random_harmonic(4, seed=2)
    f = synthesize(h, SphereGrid.for_band_limit(4))
    fp, hp = tmp_path / "grid.csv", tmp_path / "harm.csv"
    f.to_csv(fp)
    h.to_csv(hp)
    grid_lines = fp.read_text().strip().splitlines()
    assert grid_lines[0] == "theta,phi,value"
    assert len(grid_lines) == 1 + 5 * 9
    harm_lines = hp.read_text().strip().splitlines()
    assert harm_lines[0] == "l,m,coefficient"
    assert len(harm_lines) == 1 + sum(2 * l + 1 for l in range(5))
    # values survive the round trip exactly (repr formatting)
    lv = harm_lines[1].split(",")
    assert float(lv[2]) == h.coefficient(0, 0)
