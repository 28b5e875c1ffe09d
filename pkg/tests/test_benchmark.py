import numpy as np

from bang.benchmark import (BenchmarkSetting, records_from_csv, records_to_csv, replicate_rng,
                            run_benchmark, run_oracle_suite, summarize)


def test_replicate_streams_independent_of_order():
    a = replicate_rng(1, 5).random(3)
    replicate_rng(1, 4).random(100)
    np.testing.assert_array_equal(a, replicate_rng(1, 5).random(3))
    assert not np.allclose(a, replicate_rng(1, 6).random(3))


def test_worker_count_does_not_change_results():
    s = BenchmarkSetting.preset("sparse", reps=3, n_grid=(400,), seed=2)
    serial = run_benchmark(s, workers=1)
    parallel = run_benchmark(s, workers=2)
    key = lambda r: (r.replicate, r.n, r.exact, r.pairwise_correct, r.test_count)
    assert [key(r) for r in serial] == [key(r) for r in parallel]


def test_csv_round_trip_and_summary():
    s = BenchmarkSetting.preset("sparse", reps=2, n_grid=(300, 600), seed=4)
    recs = run_benchmark(s)
    back = records_from_csv(records_to_csv(recs))
    assert [(r.replicate, r.n, r.exact, r.test_count) for r in back] == \
        [(r.replicate, r.n, r.exact, r.test_count) for r in recs]
    assert summarize(back) == summarize(recs)
    assert set(summarize(recs)) == {"300", "600"}


def test_setting_id_and_defaults():
    s = BenchmarkSetting.preset("dense", family="uniform", signed=False, ancestral=True)
    assert (s.d, s.b, s.moment_order) == (8, 7, 4)
    assert s.setting_id == "dense-p6-anc-uniform-pos-K4"


def test_oracle_suite_small():
    rep = run_oracle_suite(BenchmarkSetting.preset("medium", reps=20))
    assert rep.rate == 1.0 and rep.failing_seeds == []
    assert rep.as_dict(6)["fitted_budget_constant"] is None


def test_oracle_suite_degree_cap():
    # replicate 0 has a vertex whose four parents must be certified together,
    # which a cap of J = 3 cannot do
    rep = run_oracle_suite(BenchmarkSetting.preset("medium", reps=20, max_degree=3))
    assert rep.failing_seeds == [0]
    d = rep.as_dict(6)
    assert d["fitted_budget_constant"] <= d["documented_budget_constant"]
