import numpy as np
import pytest

import semnav


def test_scene_generation_is_deterministic():
    a = semnav.generate_scene(3, semnav.SceneType.Kitchen, 10, 10)
    b = semnav.generate_scene(3, semnav.SceneType.Kitchen, 10, 10)
    assert a == b
    assert a.to_json() == b.to_json()
    assert semnav.scene_from_json(a.to_json()) == a
    assert len(a.object_classes) >= 5


def test_step_and_shortest_path():
    scene = semnav.generate_scene(1, semnav.SceneType.Bedroom, 8, 8)
    poses = scene.valid_poses()
    start, target = poses[0], poses[-1]
    r = semnav.step(scene, start, target, 2)
    assert r.reward == pytest.approx(-0.01)
    assert r.next_pose.x == start.x and r.next_pose.y == start.y
    assert semnav.shortest_path_length(scene, start, target) > 0
    with pytest.raises(semnav.ContractError):
        semnav.step(scene, start, target, 7)


def test_features_and_semantics_shapes():
    scene = semnav.generate_scene(2, semnav.SceneType.LivingRoom, 8, 8)
    pose = scene.valid_poses()[5]
    f = semnav.visual_features(scene, pose)
    assert isinstance(f, np.ndarray) and f.shape == (128,)
    corpus = semnav.build_corpus([scene])
    opt = semnav.AutoencoderOptions()
    opt.epochs = 3
    enc = semnav.train_autoencoder(corpus, opt)
    sem = semnav.frame_semantics(semnav.annotate(scene, pose), enc)
    assert sem.shape == (345,)
    hist = enc.loss_history
    assert all(b <= a for a, b in zip(hist, hist[1:]))


def test_oracle_and_untrained_network_evaluation():
    scenes = [semnav.generate_scene(5, semnav.SceneType.Bathroom, 7, 7)]
    cfg = semnav.FeaturizerConfig()
    cfg.dim = 16
    tables = semnav.build_observation_tables(scenes, cfg)
    targets = [[t.pose for t in semnav.select_targets(scenes[0], semnav.TargetMode.ObjectOriented, 2, 1)]]
    ev = semnav.EvalConfig()
    ev.episodes_per_target = 10
    oracle = semnav.evaluate(semnav.PolicyKind.Oracle, None, tables, targets, ev)
    assert oracle.success_pct() == 100.0
    params = semnav.init_params(semnav.Variant.SN, semnav.NetDims(16, 8, 0), 1)
    net = semnav.evaluate(semnav.PolicyKind.Network, params, tables, targets, ev)
    rnd = semnav.evaluate(semnav.PolicyKind.Random, None, tables, targets, ev)
    assert net.success_pct() == rnd.success_pct()
    assert net.mean_length() == rnd.mean_length()


def test_short_training_run_is_reproducible():
    scenes = [semnav.generate_scene(6, semnav.SceneType.Kitchen, 6, 6)]
    cfg = semnav.FeaturizerConfig()
    cfg.dim = 16
    tables = semnav.build_observation_tables(scenes, cfg)
    targets = [[t.pose for t in semnav.select_targets(scenes[0], semnav.TargetMode.ObjectOriented, 1, 1)]]
    tc = semnav.TrainConfig()
    tc.total_frames = 500
    tc.embed_dim = 8
    tc.episode_cap = 100
    a = semnav.train(tc, tables, targets)
    b = semnav.train(tc, tables, targets)
    assert a.params == b.params
    assert a.frames == sum(e.episode_len for e in a.log)


def test_strict_config_parsing():
    text = semnav.parse_run_config("[train]\nlr = 0.001\n")
    assert "lr = 0.001" in text
    with pytest.raises(semnav.ConfigError):
        semnav.parse_run_config("[train]\nlearning_rate = 1\n")
