import pytest

from bang.algorithm import DiscoveryState, discover, discover_oracle, run_bang, test_budget
from bang.benchmark import BenchmarkSetting, draw_instance, replicate_rng
from bang.config import DiscoveryConfig
from bang.graph import MixedGraph, random_bap, validate
from bang.independence import OracleBackend, SampleBackend, ShadowBackend
from bang.moments import MomentOracle
from bang.named_graphs import COLLIDER_CONFOUNDED, CONFOUNDED_CHAIN, DECOY
from bang.sem import draw_parameters, sample_data

ORACLE = DiscoveryConfig(mode="oracle")


def _oracle(prm, family="gamma"):
    return MomentOracle.from_params(prm, family)


class SoundnessMonitor:
    """Checks the oracle-mode induction conditions after every loop step."""

    def __init__(self, truth: MixedGraph):
        self.truth = truth
        self.an = [truth.ancestors(v) for v in range(truth.p)]
        self.steps = 0
        self.last_l = 1
        self.last_size = 0

    def __call__(self, state):
        self.steps += 1
        assert state.check() == []
        g = self.truth
        for v in range(g.p):
            assert state.pa_hat[v] <= self.an[v] - g.siblings(v)
            assert g.siblings(v) <= state.sib_hat[v]
            assert g.parents(v) <= state.pa_hat[v] | state.sib_hat[v]
        size = sum(len(s) for s in state.pa_hat)
        assert size >= self.last_size
        assert size <= g.p * (g.p - 1) // 2
        assert state.l <= max(1, max(len(s) for s in state.sib_hat) + 1)
        self.last_size = size


@pytest.mark.parametrize("preset", ["sparse", "medium", "dense"])
def test_oracle_soundness_invariants(preset):
    setting = BenchmarkSetting.preset(preset)
    for r in range(30):
        truth, prm = draw_instance(setting, replicate_rng(99, r))
        mon = SoundnessMonitor(truth)
        res = run_bang(OracleBackend(_oracle(prm)), ORACLE, callback=mon)
        assert mon.steps > 0
        assert res.graph == truth


@pytest.mark.parametrize("graph", [CONFOUNDED_CHAIN, DECOY, COLLIDER_CONFOUNDED],
                         ids=["chain", "decoy", "collider"])
@pytest.mark.parametrize("K,family", [(3, "gamma"), (4, "uniform")])
def test_named_graphs_oracle(graph, K, family, rng):
    for _ in range(10):
        prm = draw_parameters(graph, rng=rng)
        res = discover_oracle(_oracle(prm, family), DiscoveryConfig(mode="oracle", K=K))
        assert res.graph == graph


def test_decoy_never_certifies_2_or_5_for_3(rng):
    for _ in range(10):
        prm = draw_parameters(DECOY, rng=rng)
        res = discover_oracle(_oracle(prm))
        assert not {1, 4} & res.state.certified_ever(2)


def test_gaussian_oracle_fails(rng):
    # uncorrelated Gaussian residuals are independent, so any regression
    # passes and confounding is never detected
    prm = draw_parameters(CONFOUNDED_CHAIN, rng=rng)
    res = discover_oracle(_oracle(prm, "gaussian"), DiscoveryConfig(mode="oracle", K=4))
    assert res.graph != CONFOUNDED_CHAIN
    assert not res.graph.bidirected


def test_edgeless_graph(rng):
    g = MixedGraph(4)
    res = discover_oracle(_oracle(draw_parameters(g, rng=rng)))
    assert res.graph == g


def test_single_vertex(rng):
    Y = rng.standard_normal((100, 1))
    res = discover(Y)
    assert res.graph == MixedGraph(1) and res.test_count == 0


def test_sample_output_always_valid():
    for r in range(10):
        rng = replicate_rng(3, r)
        g = random_bap(5, 5, 4, rng=rng)
        Y = sample_data(draw_parameters(g, rng=rng), "gamma", 500, rng)
        res = discover(Y)
        assert validate(res.graph) == []
        assert res.state.check() == []


def test_sample_recovers_confounded_chain_at_large_n():
    rng = replicate_rng(17, 0)
    prm = draw_parameters(CONFOUNDED_CHAIN, signed=False, rng=rng)
    Y = sample_data(prm, "gamma", 100_000, rng)
    res = discover(Y, DiscoveryConfig(alpha=0.001))
    assert res.graph == CONFOUNDED_CHAIN


def test_audit_log_records_every_test(rng):
    prm = draw_parameters(CONFOUNDED_CHAIN, rng=rng)
    res = discover_oracle(_oracle(prm))
    tests = [a for a in res.audit if "test_id" in a]
    assert [a["test_id"] for a in tests] == list(range(1, res.test_count + 1))
    kinds = {a["kind"] for a in res.audit}
    assert {"prune_sibling", "certify_test", "certify"} <= kinds


def test_max_degree_limits_subsets(rng):
    g = random_bap(6, 8, 7, rng=rng)
    prm = draw_parameters(g, rng=rng)
    res = discover_oracle(_oracle(prm), DiscoveryConfig(mode="oracle", max_degree=1))
    assert all(len(a["C"]) <= 1 for a in res.audit if a["kind"] == "certify_test")
    assert validate(res.graph) == []


def test_budget_helper():
    st = DiscoveryState.initial(4)
    st.test_count = 100
    assert test_budget(st, 1) == (100, True)
    assert test_budget(st, 1, constant=0.1) == (100, False)


def test_state_check_detects_violations():
    st = DiscoveryState.initial(3)
    st.pa_hat[1] = {0}
    st.D[1, 0] = 0.5
    assert any("meets" in s for s in st.check())
    st.sib_hat[1].discard(0)
    assert any("asymmetric" in s for s in st.check())


@pytest.mark.slow
def test_shadow_agreement_on_certification_calls():
    """Sample EL decisions match oracle zero-tests on most certification calls."""
    setting = BenchmarkSetting.preset("sparse")
    agree = total = 0
    for r in range(100):
        rng = replicate_rng(5, r)
        truth, prm = draw_instance(setting, rng)
        Y = sample_data(prm, "gamma", 100_000, rng)
        sh = ShadowBackend(OracleBackend(_oracle(prm)), SampleBackend(Y), DiscoveryConfig(alpha=0.01))
        res = run_bang(sh, ORACLE)
        kinds = [a["kind"] for a in res.audit if "test_id" in a]
        for kind, (o, s) in zip(kinds, sh.records):
            if kind == "certify_test":
                total += 1
                agree += o == s
    assert total > 0
    assert agree / total >= 0.95
