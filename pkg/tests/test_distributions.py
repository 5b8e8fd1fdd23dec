import math

import numpy as np
import pytest
from scipy import integrate

from UQ_Engine_Helper.distributions import (
    NEG_INF,
    UnivariateNormal,
    UnivariateUniform,
    build_distribution,
    dist_log_pdf,
    dist_sample,
    is_rejected,
)
from UQ_Engine_Helper.rng import RngStream


def test_normal_log_pdf_at_mean():
    d = UnivariateNormal("N", mean=1.0, sigma=2.0)
    assert dist_log_pdf(d, 1.0) == pytest.approx(-math.log(2.0) - 0.5 * math.log(2 * math.pi))


def test_uniform_log_pdf_inside_and_outside():
    d = UnivariateUniform("U", minimum=-1.0, maximum=3.0)
    assert dist_log_pdf(d, 0.0) == pytest.approx(-math.log(4.0))
    assert dist_log_pdf(d, 3.5) == NEG_INF
    assert dist_log_pdf(d, -2.0) == NEG_INF


def test_invalid_parameters():
    with pytest.raises(ValueError):
        UnivariateNormal("N", 0.0, 0.0)
    with pytest.raises(ValueError):
        UnivariateUniform("U", 1.0, 1.0)


def test_samples_follow_distribution():
    rng = RngStream(11, "prior/test")
    d = UnivariateNormal("N", mean=5.0, sigma=0.5)
    draws = np.array([dist_sample(d, rng) for _ in range(4000)])
    assert draws.mean() == pytest.approx(5.0, abs=0.05)
    assert draws.std() == pytest.approx(0.5, abs=0.05)


def test_uniform_samples_stay_in_support():
    rng = RngStream(11, "prior/u")
    d = UnivariateUniform("U", 2.0, 3.0)
    assert all(2.0 <= dist_sample(d, rng) <= 3.0 for _ in range(500))


def test_build_distribution_and_to_config():
    settings = {"Name": "P", "Type": "Univariate/Uniform", "Minimum": 0.0, "Maximum": 1.0}
    d = build_distribution(settings)
    assert isinstance(d, UnivariateUniform)
    assert d.to_config() == settings


def test_rejection_sentinel():
    assert is_rejected(NEG_INF)
    assert is_rejected(float("nan"))
    assert not is_rejected(-1e300)


@pytest.mark.parametrize("distribution, lo, hi", [
    (UnivariateNormal("N", mean=0.0, sigma=1.0), -40.0, 40.0),
    (UnivariateNormal("N", mean=3.0, sigma=0.2), 3.0 - 8.0, 3.0 + 8.0),
    (UnivariateNormal("N", mean=-50.0, sigma=10.0), -50.0 - 400.0, -50.0 + 400.0),
    (UnivariateUniform("U", minimum=-1.0, maximum=3.0), -1.0, 3.0),
    (UnivariateUniform("U", minimum=0.0, maximum=1e-3), 0.0, 1e-3),
])
def test_density_integrates_to_one(distribution, lo, hi):
    total, _ = integrate.quad(lambda x: math.exp(dist_log_pdf(distribution, x)), lo, hi,
                              points=[getattr(distribution, "mean", lo)], limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)
