import math

import pytest

import soberdse as sd


def test_pareto_and_adrs():
    front = sd.pareto_filter([(1, 4), (2, 2), (4, 1), (3, 3), (2, 5)])
    assert front == [(1.0, 4.0), (2.0, 2.0), (4.0, 1.0)]
    assert sd.adrs([(1, 4), (3, 2), (4, 1)], [(2, 4), (4, 2)]) == pytest.approx(7 / 9)
    assert sd.dominates((1, 2), (2, 3))
    assert not sd.dominates((2, 2), (2, 2))
    with pytest.raises(ValueError, match="degenerate ADRS input"):
        sd.adrs([], [(1, 1)])


def test_instance_and_surrogate():
    inst = sd.synth_instance(sd.Family.SMOOTH, 1, sd.SizeClass.SMALL)
    assert 100 <= inst.space_size <= 1000
    features = sd.extract_features(inst)
    assert len(features) == 24
    assert features[0] == pytest.approx(math.log10(inst.space_size))

    model = sd.SurrogateModel(inst)
    knobs = [0] * len(inst.cardinalities)
    assert model.evaluate(knobs) == model.evaluate(knobs)
    front = model.exhaustive_front()
    assert front == sorted(front)


def test_explore_and_portfolio():
    inst = sd.synth_instance(sd.Family.DECEPTIVE, 0, sd.SizeClass.SMALL)
    r = sd.explore(sd.ExplorerId.SA, inst, budget=50, seed=3)
    assert r["evaluations_used"] <= 50
    assert r == sd.explore(sd.ExplorerId.SA, inst, budget=50, seed=3)

    p = sd.run_portfolio(inst, budget=2000)
    assert p["exhaustive_reference"]
    assert p["adrs"] == [0.0] * 10
    assert p["best"] == sd.ExplorerId.NSGA2


def test_selector_primitives():
    p = sd.softmax([0.0] * 10)
    assert p == pytest.approx([0.1] * 10)
    assert sd.entropy(p) == pytest.approx(math.log(10))
    loss, grad = sd.cross_entropy(p, 3)
    assert loss == pytest.approx(math.log(10))
    assert grad[3] == pytest.approx(-0.9)
    assert sd.reward(0.2, 0.1) == pytest.approx(-1.0)
    adv, ret = sd.gae([1.0], [0.5])
    assert adv == pytest.approx([0.5])
    assert ret == pytest.approx([1.0])


def test_dataset_round_trip(tmp_path):
    hashes = sd.generate(tmp_path, [sd.Family.SMOOTH, sd.Family.PLATEAU], [0, 1], sd.SizeClass.SMALL, budget=40)
    assert set(hashes) == {"instances.jsonl", "runs.jsonl", "labels.jsonl"}
    d = sd.load(tmp_path)
    assert len(d["ids"]) == 4
    assert len(d["train_ids"]) + len(d["inference_ids"]) == 4
    assert d["files"] == hashes
    assert all(isinstance(label, sd.ExplorerId) for label in d["labels"].values())
