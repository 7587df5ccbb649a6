"""Smoke tests for the pybind11 module."""

import math

import numpy as np
import pytest

import pcdenoise as pcd


def test_schedule_basics():
    sched = pcd.Schedule(T=1000, beta_T=2e-6)
    assert sched.T == 1000
    assert sched.beta[0] == 0.0
    assert sched.sigma_bar_sq[0] == 0.0
    assert 0.0310 < sched.sigma_bar(1000) < 0.0320
    assert sched.match_timestep(0.0) == 0
    assert sched.match_timestep(1.0) == 1000
    assert sched.adaptive_steps(1000, 5) == [0, 200, 400, 600, 800, 1000]


def test_shapes_and_noise():
    sphere = pcd.sample_shape("sphere", 2000, seed=1)
    assert sphere.shape == (2000, 3)
    radii = np.linalg.norm(sphere, axis=1)
    assert np.allclose(radii, 1.0, atol=1e-12)

    noisy = pcd.apply_noise(sphere, pattern="gaussian", sigma=0.02, seed=2)
    assert noisy.shape == sphere.shape
    assert not np.allclose(noisy, sphere)

    again = pcd.apply_noise(sphere, pattern="gaussian", sigma=0.02, seed=2)
    np.testing.assert_array_equal(noisy, again)


def test_geometry_ops():
    points = pcd.sample_shape("cube", 500, seed=3)
    idx = pcd.knn(points, [0.0, 0.0, 0.0], 5)
    assert len(idx) == 5
    d = np.linalg.norm(points[idx], axis=1)
    assert np.all(np.diff(d) >= 0)

    picks = pcd.farthest_point_sample(points, 10, seed_index=0)
    assert picks[0] == 0
    assert len(set(picks)) == 10

    normalized, center, scale = pcd.normalize_unit_sphere(points * 3.0 + 1.0)
    assert math.isclose(np.linalg.norm(normalized - np.mean(normalized, axis=0), axis=1).max(),
                        1.0, rel_tol=1e-9)
    assert scale > 0


def test_noise_estimate_matches_known_sigma():
    sigma = 0.02
    rng = np.random.default_rng(7)
    scores = -(sigma * rng.standard_normal((200000, 3)))
    est = pcd.estimate_noise_variance(scores, calibration="chi3")
    assert abs(math.sqrt(est["sigma_bar_sq"]) - sigma) < 0.05 * sigma


def test_oracle_denoise_reduces_chamfer():
    clean = pcd.sample_shape("sphere", 4000, seed=11)
    noisy = pcd.apply_noise(clean, pattern="gaussian", sigma=0.02, seed=12)
    out, report = pcd.denoise_oracle(noisy, clean, patch_size=800, seed=5)
    assert report["tau_hat"] > 0
    assert len(report["schedule_steps"]) >= 2
    before = pcd.chamfer(noisy, clean)
    after = pcd.chamfer(out, clean)
    assert after * 5.0 <= before
    assert pcd.point_to_surface(out, "sphere") < pcd.point_to_surface(noisy, "sphere")


def test_denoise_determinism_across_jobs():
    clean = pcd.sample_shape("torus", 3000, seed=21)
    noisy = pcd.apply_noise(clean, pattern="gaussian", sigma=0.015, seed=22)
    a, _ = pcd.denoise_oracle(noisy, clean, patch_size=600, seed=9, jobs=1)
    b, _ = pcd.denoise_oracle(noisy, clean, patch_size=600, seed=9, jobs=4)
    np.testing.assert_array_equal(a, b)


def test_invalid_input_raises_value_error():
    with pytest.raises(ValueError):
        pcd.sample_shape("dodecahedron", 10)
    with pytest.raises(ValueError):
        pcd.knn(np.zeros((4, 3)), [0, 0, 0], 10)


def test_xyz_round_trip(tmp_path):
    cloud = pcd.sample_shape("torus", 300, seed=5)
    path = str(tmp_path / "cloud.xyz")
    pcd.write_xyz(path, cloud)
    back = pcd.read_cloud(path)
    np.testing.assert_allclose(back, cloud, atol=1e-8)


def test_train_and_denoise_round_trip(tmp_path):
    shapes = [pcd.sample_shape("cube", 400, seed=31),
              pcd.sample_shape("torus", 400, seed=32)]
    ckpt = str(tmp_path / "model.ckpt")
    history = pcd.train(shapes, ckpt, iterations=30, patch_size=48, K_p=16,
                        width=8, layers=2, graph_k=6, fusion_k=8, seed=3)
    assert len(history) == 30
    assert all(h["loss"] >= 0 for h in history)

    noisy = pcd.apply_noise(shapes[0], pattern="gaussian", sigma=0.02, seed=33)
    out, report = pcd.denoise_checkpoint(noisy, ckpt, patch_size=48, seed=4)
    assert out.shape == noisy.shape
    assert report["patch_count"] >= 1
