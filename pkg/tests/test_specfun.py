"""Reference values and internal consistency of the special-function layer.

Pinned constants come from independent routes: Barnes G at small integers
from its factorial product, G(1/2) from the Glaisher closed form, Si/Ci
from standard tables, and the Q/beta factors from their gamma-ratio
definitions evaluated by hand.
"""

import numpy as np
import pytest

from cuelab import specfun as sf
from cuelab.errors import OutOfDomainError

# G(n) = prod_{k=1}^{n-2} k! for integer n >= 2
BARNES_SMALL = {2: 1.0, 3: 1.0, 4: 2.0, 5: 12.0, 6: 288.0, 7: 34560.0}


def test_euler_gamma_constant():
    assert sf.EULER_GAMMA == pytest.approx(0.5772156649015329, abs=1e-15)


def test_barnes_g_at_small_integers():
    for n, val in BARNES_SMALL.items():
        assert sf.barnes_g(n) == pytest.approx(val, rel=1e-12)


def test_barnes_g_functional_equation():
    # G(z + 1) = Gamma(z) G(z)
    from scipy.special import gammaln

    for z in (0.7, 1.3, 2.5, 6.25, 11.0):
        lhs = sf.log_barnes_g(z + 1)
        rhs = gammaln(z) + sf.log_barnes_g(z)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_barnes_g_at_one_half():
    # 2^{1/24} e^{1/8} pi^{-1/4} A^{-3/2} with Glaisher A
    assert sf.barnes_g(0.5) == pytest.approx(0.6032442812094465, rel=1e-12)


def test_joint_mgf_rhs_reference_values():
    assert sf.joint_mgf_rhs(0.0, 0.0, 5) == pytest.approx(1.0, rel=1e-14)
    # second moment of |Z(0)| is N + 1
    for n_dim in (2, 8, 16, 64):
        assert sf.joint_mgf_rhs(2.0, 0.0, n_dim) == pytest.approx(n_dim + 1, rel=1e-12)
    # fourth moment at N = 8: prod_j Gamma(j) Gamma(j+4) / Gamma(j+2)^2
    assert sf.joint_mgf_rhs(4.0, 0.0, 8) == pytest.approx(825.0, rel=1e-11)
    assert sf.joint_mgf_rhs(1.0, 0.0, 8) == pytest.approx(1.9524711752112112, rel=1e-12)


def test_joint_mgf_rhs_monotone_in_dimension():
    values = [sf.joint_mgf_rhs(3.0, 0.0, n) for n in (2, 4, 8, 16)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_q_factor_reference_values():
    assert sf.q_factor(1, 8.0, 0.0) == pytest.approx(-15.0 + 0j, rel=1e-12)
    val = sf.q_factor(2, 0.0, 3.0)
    assert val.real == pytest.approx(0.8269230769230769, rel=1e-12)
    assert val.imag == pytest.approx(0.25961538461538464, rel=1e-12)
    # s = t = 0 must give exactly 1 at every index
    for j in (1, 2, 10, 97):
        assert sf.q_factor(j, 0.0, 0.0) == pytest.approx(1.0 + 0j, abs=1e-14)


def test_q_factor_regime_bounds_spot_sweep():
    # the acceptance suite runs 10^4 triples; this is a fixed spot grid
    rng = np.random.default_rng(260819)
    for _ in range(300):
        j = int(rng.integers(1, 40))
        s, t = rng.uniform(-25.0, 25.0, size=2)
        r2 = s * s + t * t
        q = abs(sf.q_factor(j, s, t))
        if r2 >= 8.0 * j * j:
            assert q >= max(1.0, np.sqrt(r2) / (8.0 * j)) - 1e-12
        elif r2 >= j * j:
            assert q <= 1.0 + 1e-12
        else:
            assert q <= np.exp(-r2 / (10.0 * j * j)) + 1e-12


def test_beta_charfn_matches_truncated_q_product():
    for j, s, t in [(3, 1.0, 0.5), (5, 2.0, 0.0), (8, -1.5, 2.5)]:
        ref = sf.q_factor_product(j, s, t, 40000)
        assert abs(sf.beta_charfn(j, s, t) - ref) < 1e-4


def test_beta_charfn_reference_value():
    # Gamma(5)^2 / (Gamma(4) Gamma(6)) = 0.8
    assert sf.beta_charfn(5, 2.0, 0.0) == pytest.approx(0.8 + 0j, rel=1e-10)


def test_beta_charfn_decay_bound_spot_sweep():
    rng = np.random.default_rng(260820)
    for _ in range(300):
        j = int(rng.integers(1, 30))
        r = np.sqrt(rng.uniform(0.0, 8.0 * j * j))
        phi = rng.uniform(0.0, 2 * np.pi)
        s, t = r * np.cos(phi), r * np.sin(phi)
        bound = np.exp(-(s * s + t * t) / (30.0 * j))
        assert abs(sf.beta_charfn(j, s, t)) <= bound + 1e-10


def test_oscillation_variance_exact_values():
    assert sf.oscillation_variance_exact(64, 8 * np.pi) == pytest.approx(
        4.793412917720194, rel=1e-10
    )
    # large N, fixed mu: approaches 1 + gamma + f(mu)
    mu = 20 * np.pi
    limit = 1 + sf.EULER_GAMMA + sf.f_mu(mu)
    assert abs(sf.oscillation_variance_exact(10000, mu) - limit) < 5e-6


def test_oscillation_variance_grows_with_mu():
    values = [sf.oscillation_variance_exact(64, mu) for mu in (np.pi, 4 * np.pi, 8 * np.pi)]
    assert values[0] < values[1] < values[2]


def test_si_ci_reference_values():
    assert sf.si(np.pi) == pytest.approx(1.8519370519824662, rel=1e-12)
    assert sf.ci(1.0) == pytest.approx(0.3374039229009681, rel=1e-12)
    assert sf.si(0.0) == 0.0


def test_f_mu_closed_form_matches_integral_route():
    for mu in (0.5, 2.0, 8 * np.pi, 30.0):
        assert sf.f_mu(mu) == pytest.approx(sf.f_mu_integral(mu), abs=1e-8)


def test_two_point_correlation_values():
    # at separation pi and N = 2 the sine-kernel term vanishes: N^2 - 0
    assert sf.two_point_correlation(2, np.pi) == pytest.approx(4.0, rel=1e-12)
    # small separation: density vanishes like the square of the distance
    tiny = sf.two_point_correlation(16, 1e-6)
    assert 0 <= tiny < 1e-6


def test_expected_narrow_pairs_values_and_cubic_growth():
    lo = sf.expected_narrow_pairs(32, 0.5)
    hi = sf.expected_narrow_pairs(32, 1.0)
    assert lo == pytest.approx(0.01757868954043551, rel=1e-9)
    assert hi == pytest.approx(0.1385460053252981, rel=1e-9)
    # doubling eps multiplies the count by ~8 (cubic repulsion), and the
    # closed bound N eps^3 / (18 pi) caps both
    assert hi / lo == pytest.approx(8.0, abs=0.2)
    assert lo <= 32 * 0.5**3 / (18 * np.pi)
    assert hi <= 32 * 1.0**3 / (18 * np.pi)


def test_domain_errors():
    from cuelab.errors import InvalidArgumentError

    with pytest.raises(OutOfDomainError):
        sf.log_barnes_g(0.0)
    with pytest.raises(OutOfDomainError):
        sf.log_barnes_g(-2.0)
    with pytest.raises(InvalidArgumentError):
        sf.joint_mgf_rhs(2.0, 0.0, 0)
    # only the t = 0 slice of the joint transform is implemented
    with pytest.raises(OutOfDomainError):
        sf.joint_mgf_rhs(2.0, 1.0, 4)
    with pytest.raises(InvalidArgumentError):
        sf.q_factor(0, 1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        sf.beta_charfn(0, 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        sf.expected_narrow_pairs(8, -0.5)
