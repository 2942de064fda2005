import pytest

import amcast_lab as am


def test_scenarios_pass():
    results = am.scenarios()
    assert [r["name"] for r in results][:3] == ["relayed-order", "ack-after-local", "notif-bystander"]
    assert all(r["passed"] for r in results)
    relayed = results[0]
    assert relayed["observed"][2] == ["m1", "m3"]


def test_latency_step():
    assert am.latency_step("flexcast") == (1.0, 101.0)
    assert am.latency_step("skeen") == (101.0, 201.0)


def test_small_run_is_clean_and_deterministic():
    kwargs = dict(protocol="flexcast", clients=2, duration_ms=1500, seed=3, flush_every=50, trace=True)
    a = am.run(**kwargs)
    b = am.run(**kwargs)
    assert a["verdict"]["ok"]
    assert a["incomplete"] == 0
    assert a["trace"] == b["trace"]
    assert [r["rank"] for r in a["ranks"]] == [1, 2, 3]
    assert a["ranks"][0]["p90"] <= a["ranks"][1]["p90"]
    assert set(a["overhead"]) == {0.0}
    assert am.check_trace(a["trace"])["ok"]


def test_hierarchical_relays():
    r = am.run(protocol="hierarchical", overlay="t1", clients=2, duration_ms=1500)
    assert r["verdict"]["safety"] == []
    assert r["verdict"]["minimality"]
    assert max(r["overhead"]) > 0


def test_statistics_helpers():
    assert am.percentile(list(range(1, 101)), 90) == 90
    assert am.scalability_factor(100, 24, 174, 48) == pytest.approx(0.87)
    assert am.cascade_probabilities(0.9, 3) == pytest.approx([0.9, 0.09, 0.01])
    assert "o1" in am.overlay_presets()
    assert am.overlay("t1")["parent"] is not None


def test_errors_surface_as_exceptions():
    with pytest.raises(ValueError, match="locality"):
        am.run(locality=2.0)
    with pytest.raises(ValueError, match="protocol"):
        am.run(protocol="paxos")
    with pytest.raises(ValueError):
        am.percentile([], 90)
    with pytest.raises(ValueError):
        am.check_trace("not a trace line")
