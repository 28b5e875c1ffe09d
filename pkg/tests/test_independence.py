import numpy as np
import pytest
from scipy import stats

from bang.config import DiscoveryConfig
from bang.independence import (OracleBackend, SampleBackend, el_test, joint_residual_test,
                               moment_conditions, threshold_test)
from bang.moments import MomentOracle
from bang.named_graphs import CONFOUNDED_CHAIN
from bang.sem import draw_parameters, sample_data


def test_threshold_test_rule():
    assert threshold_test([0.01, -0.04], 0.1).independent
    assert not threshold_test([0.01, -0.05], 0.1).independent
    assert threshold_test([], 0.1).independent


def test_el_zero_mean_column_is_independent(rng):
    g = rng.standard_normal((2000, 1))
    g -= g.mean()
    d = el_test(g, 0.05)
    assert d.independent
    assert d.statistic == pytest.approx(0, abs=1e-8)
    assert d.p_value == pytest.approx(1, abs=1e-6)


def test_el_matches_wald_for_small_shift(rng):
    # local alternative: EL ratio and Hotelling statistic agree to first order
    g = rng.standard_normal((20000, 2)) + [0.01, -0.015]
    d = el_test(g, 0.05)
    m = g.mean(axis=0)
    wald = len(g) * m @ np.linalg.solve(np.cov(g, rowvar=False, bias=True), m)
    assert d.statistic == pytest.approx(wald, rel=0.05)
    assert d.df == 2
    assert d.p_value == pytest.approx(stats.chi2.sf(d.statistic, 2))


def test_el_strong_signal_rejects(rng):
    g = rng.standard_normal((5000, 3)) + 0.5
    d = el_test(g, 0.01)
    assert not d.independent and d.diagnostic is None
    early = el_test(g, 0.01, early_stop=True)
    assert not early.independent and early.lower_bound
    assert early.statistic <= d.statistic + 1e-6


def test_el_all_positive_column_rejects():
    # 0 is outside the convex hull: the dual is unbounded
    g = np.abs(np.random.default_rng(0).standard_normal((500, 1))) + 0.1
    assert not el_test(g, 0.05).independent


def test_el_degenerate_inputs():
    n = 100
    zero = np.zeros((n, 2))
    d = el_test(zero, 0.05)
    assert d.independent and d.df == 0
    const = np.ones((n, 1))
    d = el_test(const, 0.05)
    assert not d.independent and d.diagnostic == "degenerate column"
    bad = np.full((n, 1), np.nan)
    assert el_test(bad, 0.05).diagnostic == "non-finite moment conditions"
    with pytest.raises(ValueError):
        el_test(np.ones((2, 3)), 0.05)
    with pytest.raises(ValueError):
        el_test(np.ones((10, 1)), 1.5)


def test_el_collinear_columns_reduce_df(rng):
    x = rng.standard_normal(3000)
    g = np.column_stack([x, 2 * x, x + 0.1])
    d = el_test(g, 0.05)
    assert d.df == 2


def test_el_row_permutation_invariance(rng):
    g = rng.standard_normal((3000, 3)) + [0.02, 0.0, -0.03]
    a = el_test(g, 0.05)
    b = el_test(g[rng.permutation(len(g))], 0.05)
    assert a.statistic == pytest.approx(b.statistic, rel=1e-8, abs=1e-10)
    assert a.independent == b.independent


def test_el_p_value_monotone_in_shift(rng):
    z = rng.standard_normal((4000, 1))
    z -= z.mean()
    shifts = np.linspace(0, 0.1, 11)
    p = [el_test(z + s, 0.05).p_value for s in shifts]
    assert all(b <= a + 1e-12 for a, b in zip(p, p[1:]))
    assert p[0] > 0.99 and p[-1] < 1e-6


def test_moment_conditions_shapes(rng):
    gc = rng.standard_normal((2, 50))
    gv = rng.standard_normal(50)
    g = moment_conditions(gc, gv, 3)
    np.testing.assert_allclose(g[:, 1], gc[1] ** 2 * gv)
    g2 = moment_conditions(gc, gv, 4, both_directions=True)
    assert g2.shape == (50, 4)
    np.testing.assert_allclose(g2[:, 2], gv ** 3 * gc[0])


def test_joint_residual_test_validation(rng):
    cfg = DiscoveryConfig()
    with pytest.raises(ValueError):
        joint_residual_test(np.zeros((0, 10)), np.zeros(10), cfg)
    with pytest.raises(ValueError):
        joint_residual_test(np.zeros((1, 10)), np.zeros(11), cfg)
    thr = DiscoveryConfig(test="threshold", eta=0.2)
    x = rng.standard_normal((1, 20000))
    assert joint_residual_test(x, rng.standard_normal(20000), thr).independent


def test_sample_and_oracle_backends_agree_on_clear_cases():
    rng = np.random.default_rng(4)
    prm = draw_parameters(CONFOUNDED_CHAIN, signed=False, rng=rng)
    Y = sample_data(prm, "gamma", 50000, rng)
    sb = SampleBackend(Y)
    ob = OracleBackend(MomentOracle.from_params(prm, "gamma"))
    np.testing.assert_allclose(sb.S, ob.S, atol=0.1)
    W = np.eye(4)
    cfg = DiscoveryConfig()
    ocfg = DiscoveryConfig(mode="oracle")
    # 1 -> 2: raw Y2 depends on Y1
    assert not sb.test(W[[0]], W[1], cfg).independent
    assert not ob.test(W[[0]], W[1], ocfg).independent
    # error of 2 is independent of Y1 (1 and 2 are not siblings)
    D = np.zeros((4, 4))
    D[1, 0] = prm.B[1, 0]
    R = np.eye(4) - D
    assert ob.test(R[[0]], R[1], ocfg).independent
    assert sb.test(R[[0]], R[1], cfg).independent
