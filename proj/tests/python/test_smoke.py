# Copyright 2026 The twostepqa Authors
# SPDX-License-Identifier: Apache-2.0

import math
import os
import pathlib

import numpy as np
import pytest

import twostepqa as tq

DATA = pathlib.Path(
    os.environ.get("TWOSTEPQA_TEST_DATA_DIR", pathlib.Path(__file__).parents[1] / "data")
)


def photo(name):
    return tq.load_luma(DATA / f"{name}.png")


def jpeg(img, quality):
    return tq.decode_luma(tq.encode_jpeg(img, quality))


def test_rgb_png_decodes_to_rec601_luma(tmp_path):
    from PIL import Image

    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, size=(40, 60, 3), dtype=np.uint8)
    Image.fromarray(rgb, "RGB").save(tmp_path / "rgb.png")
    luma = tq.load_luma(tmp_path / "rgb.png")
    expected = rgb.astype(np.float64) @ np.array([0.299, 0.587, 0.114])
    assert luma.shape == (40, 60)
    np.testing.assert_allclose(luma, expected, atol=1e-9)


def test_psnr_matches_definition():
    ref = photo("camera")
    dst = jpeg(ref, 30)
    mse = np.mean((ref - dst) ** 2)
    assert tq.psnr(ref, dst) == pytest.approx(10 * math.log10(255**2 / mse), abs=1e-9)
    assert math.isinf(tq.psnr(ref, ref))


def test_ssim_matches_scikit_image():
    metrics = pytest.importorskip("skimage.metrics")
    ref = photo("coins")
    dst = jpeg(ref, 20)
    expected = metrics.structural_similarity(
        ref, dst, gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=255
    )
    # scikit-image averages over the border-cropped map; recompute that mean.
    _, full = metrics.structural_similarity(
        ref,
        dst,
        gaussian_weights=True,
        sigma=1.5,
        use_sample_covariance=False,
        data_range=255,
        full=True,
    )
    assert expected == pytest.approx(full[5:-5, 5:-5].mean(), abs=1e-12)
    assert tq.ssim(ref, dst) == pytest.approx(expected, abs=1e-6)


def test_ms_ssim_identity_and_ladder():
    ref = photo("chelsea")
    assert tq.ms_ssim(ref, ref) == pytest.approx(1.0, abs=1e-9)
    scores = [tq.ms_ssim(ref, jpeg(ref, q)) for q in (90, 50, 25, 10)]
    assert scores == sorted(scores, reverse=True)
    assert 0 < scores[-1] < 1


def test_niqe_model_scores_noise_higher():
    model = tq.NiqeModel.load(tq.default_model_path())
    assert model.patch_size == 96
    assert len(model.mean) == 36
    img = photo("camera")
    rng = np.random.default_rng(1)
    noisy = np.clip(img + rng.normal(0, 25, img.shape), 0, 255)
    clean_score = model.score(img)
    assert 0 < clean_score < model.score(noisy)


def test_model_round_trip(tmp_path):
    model = tq.NiqeModel.load(tq.default_model_path())
    model.save(tmp_path / "copy.model")
    assert tq.NiqeModel.load(tmp_path / "copy.model").mean == model.mean


def test_fusion_arithmetic():
    assert tq.basic_2step(0.9, 20, 100) == 0.72
    assert tq.basic_2step(1.0, 0) == 1.0
    p = tq.derive_rescale(1, 0, 0, 100, 0.5)
    assert p.a2 == pytest.approx(-0.005, abs=1e-12)
    assert p.b2 == pytest.approx(1.0, abs=1e-12)
    assert tq.general_2step(1, 100, p) == pytest.approx(0.5, abs=1e-12)


def test_correlations_match_scipy():
    stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(2)
    x = np.round(rng.normal(size=30) * 3)
    y = x + rng.normal(size=30)
    assert tq.srocc(x, y) == pytest.approx(stats.spearmanr(x, y)[0], abs=1e-12)
    assert tq.pcc(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
    assert tq.mapped_pcc(x, 2 * x + 3) == pytest.approx(1.0, abs=1e-9)


def test_errors_raise_library_exception():
    with pytest.raises(tq.Error, match="dimension mismatch"):
        tq.psnr(np.zeros((10, 10)), np.zeros((10, 11)))
    with pytest.raises(ValueError):
        tq.ms_ssim(np.zeros((100, 100)), np.zeros((100, 100)))
    with pytest.raises(tq.Error):
        tq.load_luma(DATA / "missing.png")


def write_ladder(tmp_path):
    rows = ["content_id,ref_path,dst_path,mos"]
    for i, name in enumerate(["astronaut", "camera", "chelsea", "coffee", "rocket", "coins"]):
        ref = photo(name)[:192, :192]
        from PIL import Image

        Image.fromarray(ref.astype(np.uint8)).save(tmp_path / f"{name}.png")
        rows.append(f"{name},{name}.png,,")
        for q in (80, 40, 15):
            (tmp_path / f"{name}_q{q}.jpg").write_bytes(tq.encode_jpeg(ref, q))
            rows.append(f"{name},,{name}_q{q}.jpg,{q + i}")
    (tmp_path / "manifest.csv").write_text("\n".join(rows) + "\n")
    return tmp_path / "manifest.csv"


def test_benchmark_and_sweep(tmp_path):
    manifest = write_ladder(tmp_path)
    model = tq.default_model_path()
    report = tq.benchmark(manifest, model, splits=20, seed=3)
    assert set(report) == {"PSNR", "MS-SSIM", "NIQE", "2stepQA"}
    assert len(report["MS-SSIM"]["srocc"]) == 20
    assert report == tq.benchmark(manifest, model, splits=20, seed=3)
    rows = tq.alpha_sweep(manifest, model, [50, 100], splits=20, seed=3)
    assert [r[0] for r in rows] == [50, 100]
    assert rows[1][1] == pytest.approx(report["2stepQA"]["median_srocc"], abs=1e-12)


def test_score_files(tmp_path):
    ref = photo("camera")
    tmp = tmp_path / "d.jpg"
    tmp.write_bytes(tq.encode_jpeg(ref, 10))
    s = tq.score_files(DATA / "camera.png", tmp, tq.default_model_path())
    assert s["two_step"] == pytest.approx(tq.basic_2step(s["ms_ssim"], s["niqe_ref"]), abs=1e-15)
    assert s["ms_ssim"] == pytest.approx(tq.ms_ssim(ref, tq.load_luma(tmp)), abs=1e-15)
