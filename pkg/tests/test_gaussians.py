import math

import numpy as np
import pytest

from surfconv.gaussians import GaussianSpec, gaussian_linear_pair_integral, random_gaussian
from surfconv.quadrature import (
    ball_volume,
    box_rule,
    gauss_legendre_interval,
    polar_rule,
    sphere_area,
    sphere_rule,
    tensor_rule,
)


def test_mass_and_norms_closed_forms():
    g = GaussianSpec(dim=2, amplitude=3.0, mean=(0.5, -1.0), sigmas=(0.7, 1.3))
    assert g.mass == pytest.approx(3.0 * 2 * math.pi * 0.7 * 1.3)
    assert g.l1_norm == pytest.approx(g.mass)  # positive amplitude
    # ||g||_2^2 = amp^2 prod sigma_i sqrt(pi)
    assert g.l2_norm_sq == pytest.approx(9.0 * (0.7 * math.sqrt(math.pi)) * (1.3 * math.sqrt(math.pi)))
    # lp consistency: ||g||_p^p = amp^p prod sigma sqrt(2 pi / p)
    p = 2.5
    expected = (3.0**p) * math.prod(s * math.sqrt(2 * math.pi / p) for s in (0.7, 1.3))
    assert g.lp_norm(p) ** p == pytest.approx(expected)


def test_unit_mass_factory():
    g = GaussianSpec.unit_mass(3, mean=(0.1, 0.2, 0.3), sigmas=(1.0, 2.0, 0.5))
    assert g.mass == pytest.approx(1.0)


def test_evaluate_against_quadrature():
    g = GaussianSpec(dim=2, amplitude=1.0, mean=(0.2, 0.0), sigmas=(0.6, 0.8))
    pts, w = box_rule(64, [(-7, 7), (-7, 7)])
    assert float(np.sum(w * g.evaluate(pts))) == pytest.approx(g.mass, rel=1e-10)


def test_fourier_closed_form_against_quadrature():
    g = GaussianSpec(dim=1, amplitude=2.0, mean=(0.3,), sigmas=(0.9,))
    xi = np.array([[0.4]])
    pts, w = box_rule(400, [(-8, 8)])
    osc = np.exp(-2j * math.pi * pts[:, 0] * 0.4)
    num = complex(np.sum(w * g.evaluate(pts) * osc))
    assert num == pytest.approx(complex(g.fourier(xi)[0]), rel=1e-9)
    # modulus drops the phase
    assert abs(num) == pytest.approx(float(g.fourier_modulus(xi)[0]), rel=1e-9)


def test_sampling_matches_density_moments():
    g = GaussianSpec(dim=2, amplitude=5.0, mean=(1.0, -2.0), sigmas=(0.5, 1.5))
    rng = np.random.default_rng(7)
    xs = g.sample(rng, 200_00)
    np.testing.assert_allclose(xs.mean(axis=0), [1.0, -2.0], atol=0.05)
    np.testing.assert_allclose(xs.std(axis=0), [0.5, 1.5], atol=0.05)


def test_tail_bound_is_an_upper_bound():
    g = GaussianSpec(dim=2, amplitude=1.0, mean=(0.5, 0.0), sigmas=(1.0, 2.0))
    rng = np.random.default_rng(1)
    xs = g.sample(rng, 100_000)
    for r in (2.0, 4.0, 6.0):
        emp = np.mean(np.max(np.abs(xs), axis=1) > r)
        assert emp <= g.tail_outside_box(r) + 3e-3
    r9 = g.box_for_mass(1e-9)
    assert g.tail_outside_box(r9) <= 1e-9


def test_random_gaussian_determinism_and_mass():
    a = random_gaussian(np.random.default_rng(3), 3)
    b = random_gaussian(np.random.default_rng(3), 3)
    assert a == b
    assert a.mass == pytest.approx(1.0)


def test_gaussian_linear_pair_integral_oracle():
    # integral f(x) h(Bx) dx against brute-force quadrature
    f = GaussianSpec(dim=2, amplitude=1.3, mean=(0.2, -0.1), sigmas=(0.8, 1.1))
    h = GaussianSpec(dim=1, amplitude=0.7, mean=(0.4,), sigmas=(0.9,))
    bmat = np.array([[0.5, -1.0]])
    closed = gaussian_linear_pair_integral(f, h, bmat)
    pts, w = box_rule(160, [(-7, 7), (-7, 7)])
    brute = float(np.sum(w * f.evaluate(pts) * h.evaluate(pts @ bmat.T)))
    assert closed == pytest.approx(brute, rel=1e-8)


# -- quadrature ---------------------------------------------------------------


def test_gauss_legendre_polynomial_exactness():
    x, w = gauss_legendre_interval(6, 0.0, 2.0)
    # degree 11 is integrated exactly by 6 nodes
    assert float(np.sum(w * x**11)) == pytest.approx(2.0**12 / 12, rel=1e-13)


def test_tensor_rule_separability():
    ax = gauss_legendre_interval(8, 0.0, 1.0)
    ay = gauss_legendre_interval(9, -1.0, 1.0)
    pts, w = tensor_rule([ax, ay])
    val = float(np.sum(w * pts[:, 0] ** 2 * pts[:, 1] ** 2))
    assert val == pytest.approx((1.0 / 3.0) * (2.0 / 3.0), rel=1e-12)


def test_sphere_rule_integrates_polynomials():
    for dim in (1, 2, 3):
        nodes, w = sphere_rule(dim)
        assert float(np.sum(w)) == pytest.approx(sphere_area(dim), rel=1e-10)
        # integral of x_0^2 over S^(dim-1) = area / dim
        assert float(np.sum(w * nodes[:, 0] ** 2)) == pytest.approx(
            sphere_area(dim) / dim, rel=1e-8
        )


def test_ball_volume_values():
    assert ball_volume(1, 2.0) == pytest.approx(4.0)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3, 0.5) == pytest.approx(4.0 / 3.0 * math.pi * 0.125)


def test_polar_rule_gaussian_mass():
    g = GaussianSpec(dim=2, amplitude=1.0, mean=(0.0, 0.0), sigmas=(1.0, 1.0))
    pts, w = polar_rule(2, r_max=8.0, n_radial=64, n_azimuth=64)
    assert float(np.sum(w * g.evaluate(pts))) == pytest.approx(g.mass, rel=1e-8)
