import math
from fractions import Fraction

import numpy as np
import pytest

from surfconv.gaussians import GaussianSpec
from surfconv.pullback import (
    McConfig,
    change_of_variables_check,
    plancherel_ratio,
    pullback_weight_ratio,
    region_cover_factor,
    region_weight_ratio,
    squared_fourier_weight,
)
from surfconv.surface import CoefficientMatrix

BANDED = CoefficientMatrix.from_rows([[1, 0], [1, 1], [0, 1]])
SCALAR = CoefficientMatrix.from_rows([[Fraction(3, 2)]])
W3 = GaussianSpec(dim=3, amplitude=1.0, mean=(0.0, 0.0, 0.0), sigmas=(1.0, 0.8, 1.2))


def one_d_oracle(c: float, rho: float) -> float:
    # exact ratio of the two frequency integrals for a single coefficient:
    # the y-average of |c y|^-(rho+1) over |y| in [1, 2), both signs
    if rho == 0.0:
        return 2.0 * abs(c) ** (-rho - 1.0) * math.log(2.0)
    return 2.0 * abs(c) ** (-rho - 1.0) * (1.0 - 2.0**-rho) / rho


@pytest.mark.parametrize("rho", [0.0, 1.0, -0.5])
def test_one_dimensional_closed_form(rho):
    w = GaussianSpec(dim=1, amplitude=1.3, mean=(0.4,), sigmas=(0.8,))
    rep = pullback_weight_ratio(SCALAR, rho, w, McConfig(n_y=4000, seed=11))
    assert rep.ratio == pytest.approx(one_d_oracle(1.5, rho), rel=0.02)


def test_plancherel_one_dimensional_oracle():
    f = GaussianSpec(dim=1, amplitude=0.9, mean=(0.3,), sigmas=(1.1,))
    rep = plancherel_ratio(SCALAR, f, McConfig(n_y=4000, seed=13))
    assert rep.ratio == pytest.approx(2.0 * math.log(2.0) / 1.5, rel=0.02)
    # the quadrature on the bound side reproduces ||f||_2^2 to near machine
    assert rep.params["pullback_rhs_quadrature"] == pytest.approx(
        f.l2_norm_sq, rel=1e-6
    )


def test_weighted_integral_is_dilation_invariant():
    f = GaussianSpec(dim=3, amplitude=1.0, mean=(0.2, -0.1, 0.3), sigmas=(0.9, 1.1, 0.7))
    values = []
    for t in (1.0, 2.0):
        ft = GaussianSpec(
            dim=3,
            amplitude=f.amplitude * t ** (-3 / 2),
            mean=tuple(m * t for m in f.mean),
            sigmas=tuple(s * t for s in f.sigmas),
        )
        rep = plancherel_ratio(BANDED, ft, McConfig(n_y=1500, seed=17))
        values.append(rep.weighted_integral)
    assert values[1] == pytest.approx(values[0], rel=0.05)


def test_matrix_homogeneity_power():
    # scaling C by t multiplies the frequency integral by t^-(rho + l)
    rho = 1.0
    doubled = CoefficientMatrix.from_rows([[2, 0], [2, 2], [0, 2]])
    r1 = pullback_weight_ratio(BANDED, rho, W3, McConfig(n_y=1500, seed=19))
    r2 = pullback_weight_ratio(doubled, rho, W3, McConfig(n_y=1500, seed=19))
    power = math.log(r2.lhs / r1.lhs) / math.log(2.0)
    assert power == pytest.approx(-(rho + 2), abs=0.05)


def test_region_cover_partition_sums_to_total():
    cov = region_cover_factor(BANDED, 0.0, W3, McConfig(n_y=800, seed=29), mode="selected")
    assert cov["cover_factor"] == pytest.approx(1.0, abs=1e-9)
    assert set(cov["per_region"]) == {"0", "1", "2"}


def test_region_cover_defining_overcounts():
    cov = region_cover_factor(BANDED, 0.0, W3, McConfig(n_y=800, seed=29), mode="defining")
    assert cov["cover_factor"] >= 1.0 - 1e-9


def test_middle_row_selected_region_is_empty():
    # on the unit circle |zeta_1| and |zeta_1 + zeta_2| cannot both be small
    # enough for row 2 to be reached before rows 0 and 1 fill the quota
    rep = region_weight_ratio(BANDED, 0.0, W3, (2,), McConfig(n_y=400, seed=3))
    assert rep.lhs == 0.0
    assert rep.params["empty_region"] is True


def test_region_validation():
    with pytest.raises(ValueError):
        region_weight_ratio(BANDED, 0.0, W3, (0, 1), McConfig(n_y=100))
    with pytest.raises(ValueError):
        pullback_weight_ratio(BANDED, -2.5, W3, McConfig(n_y=100))
    with pytest.raises(ValueError):
        pullback_weight_ratio(
            CoefficientMatrix.from_rows([[1, 0], [2, 0], [0, 1]]), 0.0, W3, McConfig(n_y=100)
        )
    with pytest.raises(ValueError):
        pullback_weight_ratio(BANDED, 0.0, GaussianSpec(dim=2, amplitude=1.0, mean=(0.0, 0.0), sigmas=(1.0, 1.0)), McConfig(n_y=100))


@pytest.mark.parametrize("q", [(0,), (1,), (2,)])
def test_change_of_variables_banded(q):
    g = GaussianSpec(dim=3, amplitude=1.0, mean=(0.3, -0.2, 0.5), sigmas=(0.8, 1.0, 1.2))
    rep = change_of_variables_check(BANDED, q, (1.3, -1.6), g, McConfig(n_radial=64))
    assert rep.rel_err < 1e-6


def test_change_of_variables_square_cases():
    g1 = GaussianSpec(dim=1, amplitude=2.0, mean=(0.4,), sigmas=(0.9,))
    rep = change_of_variables_check(SCALAR, (), (1.5,), g1, McConfig())
    assert rep.rel_err < 1e-8
    m22 = CoefficientMatrix.from_rows([[1, 0], [0, 1]])
    g2 = GaussianSpec(dim=2, amplitude=1.0, mean=(0.2, -0.3), sigmas=(0.7, 1.1))
    rep = change_of_variables_check(m22, (), (1.2, -1.8), g2, McConfig(n_radial=64))
    assert rep.rel_err < 1e-6


def test_squared_fourier_weight_matches_modulus():
    f = GaussianSpec(dim=2, amplitude=1.4, mean=(0.3, -0.2), sigmas=(0.8, 1.2))
    w = squared_fourier_weight(f)
    xs = np.array([[0.0, 0.0], [0.3, -0.1], [1.0, 0.5]])
    np.testing.assert_allclose(w.evaluate(xs), f.fourier_modulus(xs) ** 2, rtol=1e-12)


def test_thread_count_does_not_change_bits():
    r1 = pullback_weight_ratio(BANDED, 0.0, W3, McConfig(n_y=600, seed=31, threads=1))
    r4 = pullback_weight_ratio(BANDED, 0.0, W3, McConfig(n_y=600, seed=31, threads=4))
    assert r1.lhs == r4.lhs and r1.stderr == r4.stderr


def test_doubling_reduces_or_keeps_error_one_d():
    w = GaussianSpec(dim=1, amplitude=1.0, mean=(0.2,), sigmas=(0.9,))
    cfg = McConfig(n_y=1000, seed=41)
    oracle = one_d_oracle(1.5, 1.0)
    r1 = pullback_weight_ratio(SCALAR, 1.0, w, cfg)
    r2 = pullback_weight_ratio(SCALAR, 1.0, w, cfg.doubled())
    assert abs(r2.ratio - oracle) / oracle < 0.03
    assert abs(r2.ratio - r1.ratio) / r1.ratio < 0.10
