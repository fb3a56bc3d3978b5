import numpy as np
import pytest

from bregman_stationarity.errors import ConstructionError, DimensionError, DomainError, RangeError
from bregman_stationarity.kernel import KernelName, KernelSpec, bregman_scalar, bregman_vec

# (tag, sampler for interior points)
KERNELS = [
    ("shannon", lambda rng, size: rng.uniform(0.2, 3.0, size)),
    ("fermi", lambda rng, size: rng.uniform(0.05, 0.95, size)),
    ("burg", lambda rng, size: rng.uniform(0.2, 3.0, size)),
    ("fracpow:0.5", lambda rng, size: rng.uniform(0.2, 3.0, size)),
    ("hellinger", lambda rng, size: rng.uniform(-0.9, 0.9, size)),
    ("poly:1.0", lambda rng, size: rng.uniform(0.2, 3.0, size)),
    ("poly:2.5", lambda rng, size: rng.uniform(0.2, 3.0, size)),
    ("euclid", lambda rng, size: rng.uniform(-3.0, 3.0, size)),
]


@pytest.mark.parametrize("tag, sample", KERNELS)
def test_inverse_round_trip(tag, sample):
    """phi'^-1(phi'(x)) = x, and the generic bracketing inverse agrees with the closed form"""
    kernel = KernelSpec.from_tag(tag)
    rng = np.random.default_rng(0)
    x = sample(rng, 50)
    s = kernel.phi_prime(x)

    np.testing.assert_allclose(kernel.phi_prime_inv(s), x, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(kernel.phi_prime_inv(s[:10], exact=False), x[:10], rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("tag, sample", KERNELS)
def test_three_point_identity(tag, sample):
    """D(z,x) - D(z,y) - D(y,x) = (phi'(y) - phi'(x)) (z - y)"""
    kernel = KernelSpec.from_tag(tag)
    rng = np.random.default_rng(1)
    x, y, z = sample(rng, 10_000), sample(rng, 10_000), sample(rng, 10_000)

    lhs = kernel.bregman(z, x) - kernel.bregman(z, y) - kernel.bregman(y, x)
    rhs = (kernel.phi_prime(y) - kernel.phi_prime(x)) * (z - y)
    scale = np.maximum(1.0, np.abs(kernel.bregman(z, x)) + np.abs(rhs))
    assert np.max(np.abs(lhs - rhs) / scale) <= 1e-9


@pytest.mark.parametrize("tag, sample", KERNELS)
def test_derivative_monotone_and_divergence_nonnegative(tag, sample):
    kernel = KernelSpec.from_tag(tag)
    rng = np.random.default_rng(2)
    x, y = sample(rng, 10_000), sample(rng, 10_000)

    assert np.all((kernel.phi_prime(x) - kernel.phi_prime(y)) * (x - y) >= -1e-9)
    assert np.all(kernel.bregman(y, x) >= 0.0)
    np.testing.assert_allclose(kernel.bregman(x, x), 0.0, atol=1e-12)
    assert np.all(kernel.phi_double_prime(x) > 0.0)


def test_boundary_values():
    shannon = KernelSpec.shannon()
    assert shannon.phi(0.0) == 0.0
    assert bregman_scalar(shannon, 0.0, 0.25) == pytest.approx(0.25)

    burg = KernelSpec(KernelName.BURG)
    assert burg.phi(0.0) == np.inf
    assert bregman_scalar(burg, 0.0, 1.0) == np.inf

    hellinger = KernelSpec(KernelName.HELLINGER)
    assert hellinger.phi(1.0) == pytest.approx(0.0)


def test_domain_errors():
    shannon = KernelSpec.shannon()
    with pytest.raises(DomainError):
        shannon.phi(-0.1)
    with pytest.raises(DomainError):
        shannon.phi_prime(0.0)
    with pytest.raises(DomainError):
        shannon.bregman(0.5, 0.0)
    with pytest.raises(RangeError):
        KernelSpec(KernelName.BURG).phi_prime_inv(1.0)
    with pytest.raises(DimensionError):
        bregman_scalar(shannon, np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    with pytest.raises(DimensionError):
        bregman_vec(shannon, [0.5, 0.5], [0.5])


def test_mirror_inverse_maps_range_limits_to_endpoints():
    burg = KernelSpec(KernelName.BURG)
    np.testing.assert_array_equal(burg.mirror_inverse(np.array([0.0, 2.0])), [np.inf, np.inf])
    assert burg.mirror_inverse(np.array([-2.0]))[0] == pytest.approx(0.5)
    assert KernelSpec.shannon().mirror_inverse(np.array([-np.inf]))[0] == 0.0


@pytest.mark.parametrize(
    "tag, name, param",
    [
        ("shannon", KernelName.SHANNON, None),
        ("poly:1.0", KernelName.POLYNOMIAL, 1.0),
        ("fracpow:0.5", KernelName.FRACTIONAL_POWER, 0.5),
        ("fermi_dirac", KernelName.FERMI_DIRAC, None),
        ("Euclid", KernelName.EUCLIDEAN, None),
    ],
)
def test_tags(tag, name, param):
    kernel = KernelSpec.from_tag(tag)
    assert kernel.name is name
    assert kernel.param == param
    assert KernelSpec.from_tag(kernel.to_tag()) == kernel


@pytest.mark.parametrize("tag", ["gauss", "shannon:1", "poly", "poly:-1", "fracpow:1.5", "poly:abc"])
def test_bad_tags(tag):
    with pytest.raises(ConstructionError):
        KernelSpec.from_tag(tag)


def test_flags():
    assert not KernelSpec.from_tag("euclid").legendre
    assert KernelSpec.shannon().legendre
    assert KernelSpec.shannon().closed_domain
    assert not KernelSpec.polynomial(1.0).closed_domain
    assert not KernelSpec.from_tag("burg").supercoercive
    assert KernelSpec.from_tag("fermi").supercoercive
    assert KernelSpec.from_tag("burg").dual_range == (-np.inf, 0.0)


def test_near_boundary():
    shannon = KernelSpec.shannon()
    x = np.array([0.0, 1e-13, 0.5])
    np.testing.assert_array_equal(shannon.near_boundary(x), [True, True, False])
    np.testing.assert_array_equal(shannon.near_boundary(x, 0.0), [True, False, False])

    hellinger = KernelSpec(KernelName.HELLINGER)
    np.testing.assert_array_equal(hellinger.near_boundary(np.array([-1.0, 1.0 - 1e-13, 0.0])), [True, True, False])
    assert not np.any(KernelSpec.from_tag("euclid").near_boundary(np.array([-1e300, 0.0, 1e300])))


@pytest.mark.parametrize("tag, sample", KERNELS)
def test_divergence_grows_with_separation(tag, sample):
    """For z <= x <= y: D(z, x) <= D(z, y) and D(x, y) <= D(z, y)"""
    kernel = KernelSpec.from_tag(tag)
    rng = np.random.default_rng(3)
    z, x, y = np.sort(sample(rng, (10_000, 3)), axis=1).T

    outer = kernel.bregman(z, y)
    slack = 1e-9 * np.maximum(1.0, outer)
    assert np.all(kernel.bregman(z, x) <= outer + slack)
    assert np.all(kernel.bregman(x, y) <= outer + slack)


@pytest.mark.parametrize("tag, sample", KERNELS)
def test_divergence_positive_off_diagonal(tag, sample):
    kernel = KernelSpec.from_tag(tag)
    rng = np.random.default_rng(4)
    x, y = sample(rng, 10_000), sample(rng, 10_000)
    apart = np.abs(y - x) >= 1e-2
    assert np.count_nonzero(apart) > 9000
    assert np.all(kernel.bregman(y[apart], x[apart]) > 0.0)


@pytest.mark.parametrize("tag", ["shannon", "fermi", "burg", "fracpow:0.5", "hellinger", "poly:1.0"])
def test_derivative_diverges_at_lower_endpoint(tag):
    kernel = KernelSpec.from_tag(tag)
    values = kernel.phi_prime(kernel.a + 10.0 ** -np.arange(1, 13))
    assert np.all(np.diff(values) < 0.0)
    assert values[-1] < -20.0


@pytest.mark.parametrize("tag", ["fermi", "hellinger"])
def test_derivative_diverges_at_upper_endpoint(tag):
    kernel = KernelSpec.from_tag(tag)
    values = kernel.phi_prime(kernel.c - 10.0 ** -np.arange(1, 13))
    assert np.all(np.diff(values) > 0.0)
    assert values[-1] > 20.0


def test_numeric_inverse_reports_unreachable_values():
    # exp(-801) underflows, so no double has phi'(x) = -800
    with pytest.raises(RangeError):
        KernelSpec.shannon().phi_prime_inv(-800.0, exact=False)
    with pytest.raises(RangeError):
        KernelSpec.shannon().phi_prime_inv(np.array([0.0, -800.0]), exact=False)
