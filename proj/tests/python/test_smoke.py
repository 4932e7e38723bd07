import json
import os
import subprocess

import numpy as np
import pytest

import mcsched


def test_generate_roundtrip_and_edf_feasible():
    inst = mcsched.generate_instance(n=20, lo_fraction=0.3, seed=4)
    assert len(inst) == 20
    assert mcsched.edf_misses(inst) == 0
    back = mcsched.Instance.from_json(inst.to_json())
    assert back.to_json() == inst.to_json()
    assert {j.criticality for j in inst.jobs} <= {"HI", "LO"}


def test_invalid_lo_fraction_raises():
    with pytest.raises(ValueError):
        mcsched.generate_instance(n=10, lo_fraction=0.95)


def test_env_episode_respects_mask():
    inst = mcsched.generate_instance(n=8, seed=1, release_mean=3.0)
    env = mcsched.Env()
    obs, mask, reward, done = env.reset(inst, degradation_threshold=0.5, seed=3)
    assert obs.shape == (8 * 11 + 3,)
    assert mask.dtype == np.bool_ and mask.shape == (9,)
    rng = np.random.default_rng(0)
    total = 0.0
    while not done:
        action = int(rng.choice(np.flatnonzero(mask)))
        obs, mask, reward, done = env.step(action)
        total += reward
    assert np.isfinite(total)
    assert len(env.trace) >= 1


def test_masked_action_rejected():
    env = mcsched.Env()
    inst = mcsched.generate_instance(n=4, seed=2)
    _, mask, _, _ = env.reset(inst)
    with pytest.raises(ValueError):
        env.step(int(np.flatnonzero(~mask)[0]))


def test_baseline_ordering_under_degradation():
    instances = [mcsched.generate_instance(n=30, seed=s) for s in range(40)]
    edf = mcsched.evaluate("edf", instances)
    assert edf["overall_completion_rate"] == 1.0
    prio = mcsched.evaluate("priority", instances, degradation_threshold=0.5)
    rand = mcsched.evaluate("random", instances, degradation_threshold=0.5)
    assert prio["hi_completion_rate"] > rand["hi_completion_rate"]


def test_speed_and_brute_force():
    inst = mcsched.Instance.from_json(
        json.dumps({"version": 1, "seed": 0, "lo_fraction": 0.0,
                    "jobs": [{"id": 0, "release": 0, "deadline": 8, "processing": 2, "criticality": "HI"}]}))
    assert mcsched.min_tolerable_speed(inst, mcsched.simulate_edf(inst), keep="all") == pytest.approx(0.25, abs=1e-3)
    best = mcsched.brute_force_best_schedule(inst)
    assert best["completed_hi"] == 1 and best["order"] == [0]


def test_train_checkpoint_evaluate_and_gantt(tmp_path):
    ckpt = tmp_path / "ckpt.bin"
    rewards = mcsched.train(n=4, steps=1000, hidden=8, rollout=250, seed=1, checkpoint=str(ckpt))
    assert len(rewards) > 10
    info = mcsched.checkpoint_info(str(ckpt))
    assert info["n_max"] == 4 and info["hidden"] == 8
    instances = [mcsched.generate_instance(n=4, seed=s, release_mean=2.0) for s in range(5)]
    report = mcsched.evaluate("checkpoint:" + str(ckpt), instances, degradation_threshold=0.3, traces=True)
    assert report["n_instances"] == 5
    svg = mcsched.render_gantt_svg(report["traces"][0])
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


@pytest.mark.skipif("MCSCHED_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_instances_load_in_python(tmp_path):
    subprocess.run([os.environ["MCSCHED_CLI"], "generate", "--n", "6", "--count", "2", "--seed", "5",
                    "--out", str(tmp_path)], check=True, capture_output=True)
    inst = mcsched.Instance.load(str(tmp_path / "instance_00000.json"))
    assert len(inst) == 6 and inst.seed == 5
