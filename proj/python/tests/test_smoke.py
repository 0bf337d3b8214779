import math

import numpy as np
import pytest

import skewpbo


def test_sun_without_skewness_is_gaussian():
    omega = np.array([[1.0, 0.3], [0.3, 2.0]])
    sun = skewpbo.Sun(np.zeros(2), omega, np.zeros((2, 1)), np.zeros(1), np.eye(1))
    z = np.array([0.4, -0.7])
    inv = np.linalg.inv(omega)
    expected = -0.5 * z @ inv @ z - math.log(2 * math.pi) - 0.5 * math.log(np.linalg.det(omega))
    assert sun.log_pdf(z) == pytest.approx(expected, abs=1e-9)
    again = skewpbo.Sun.from_json(sun.to_json())
    assert np.array_equal(again.omega, sun.omega)
    assert sun.sample(100, seed=3).shape == (100, 2)


def test_mvn_cdf_and_skewness():
    assert skewpbo.mvn_cdf(np.zeros(1), np.eye(1)) == pytest.approx(0.5, abs=1e-12)
    assert skewpbo.mvn_cdf(np.zeros(2), np.eye(2)) == pytest.approx(0.25, abs=1e-6)
    assert skewpbo.skewness_statistic(np.array([-1.0, 0.0, 1.0])) == 0.0
    with pytest.raises(skewpbo.SkewPboError) as err:
        skewpbo.skewness_statistic(np.zeros(4))
    assert skewpbo.error_kind(err.value) == "ZeroVariance"


def test_lin_ess_respects_bounds():
    draws = skewpbo.lin_ess_sample(np.array([[1.0, 0.5], [0.5, 1.0]]), np.array([0.2, -0.1]), 500, seed=1)
    assert draws.shape == (500, 2)
    assert (draws[:, 0] >= 0.2).all() and (draws[:, 1] >= -0.1).all()


def test_single_duel_posterior():
    points = np.array([[-0.4], [0.4]])
    post = skewpbo.fit("skewgp", points, [(0, 1)], lengthscale=np.array([0.5]), bank_size=500, seed=2)
    mean = post.posterior_mean(points)
    assert mean[0] > mean[1]
    assert post.predict_samples(points, 50, seed=1).shape == (50, 2)
    summary = post.summary(np.linspace(-1, 1, 5)[:, None], np.array([0.4]), samples=400, seed=4)
    assert set(summary) >= {"mean", "lower", "upper", "skewness", "seed"}
    assert len(summary["mean"]) == 5
    exact = skewpbo.log_marginal_exact(points, [(0, 1)], lengthscale=np.array([0.5]))
    assert exact == pytest.approx(math.log(0.5), abs=1e-9)
    bound = skewpbo.log_marginal_lower_bound(points, [(0, 1)], lengthscale=np.array([0.5]), block_size=30)
    assert bound == pytest.approx(exact, abs=1e-10)
    gpl = skewpbo.fit("gpl", points, [(0, 1)], lengthscale=np.array([0.5]))
    assert gpl.posterior_mean(points)[0] > 0.0
    with pytest.raises(skewpbo.SkewPboError):
        gpl.predict_samples(points, 5)


def test_benchmarks_and_experiment(tmp_path):
    assert "forrester" in skewpbo.benchmark_names()
    assert skewpbo.benchmark("cos1d", np.zeros((1, 1)))[0] == pytest.approx(2.0)
    config = {
        "benchmark": "cos1d",
        "surrogate": "gpl",
        "acquisition": {"kind": "UCB", "candidates": 100, "mc_samples": 200, "refine_evaluations": 10},
        "initial_duels": 4,
        "budget": 7,
        "trials": 2,
        "seed": 5,
        "curves": False,
        "annealing_budget": 5,
    }
    records = skewpbo.run_experiment(config)
    assert len(records) == 2
    assert len(records[0]["iterations"]) == 4
    assert records == skewpbo.run_experiment(config) or all(
        a["iterations"][-1]["reference"] == b["iterations"][-1]["reference"]
        for a, b in zip(records, skewpbo.run_experiment(config))
    )
    paths = skewpbo.export_results(records, tmp_path, "json")
    assert any(p.endswith("results.json") for p in paths)


def test_session_store(tmp_path):
    store = skewpbo.SessionStore(tmp_path)
    with pytest.raises(skewpbo.SkewPboError) as err:
        store.create({"bounds": [[0.0, 0.0]]})
    assert skewpbo.error_kind(err.value) == "InvalidConfig"
    sid = store.create(
        {
            "bounds": [[-3.0, 3.0]],
            "seed": 1,
            "acquisition": {"kind": "TH", "candidates": 100, "mc_samples": 100},
            "bank_size": 200,
            "annealing_budget": 5,
            "summary_samples": 200,
        }
    )
    duel = store.next(sid)
    assert duel["initial"]
    result = store.answer(sid, "candidate")
    assert result["reference"] == duel["candidate"]
    duel = store.next(sid)
    assert not duel["initial"]
    store.answer(sid, "reference")
    summary = store.summary(sid, np.linspace(-3, 3, 4))
    assert len(summary["rows"]) == 4
    assert store.list() == [sid]
    assert skewpbo.SessionStore(tmp_path).snapshot(sid) == store.snapshot(sid)
