import numpy as np
import pytest

from morphomod.datagen import ORANGE, synth_disorient, synthetic_host
from morphomod.errors import EmptyMaskWarning, PipelineStageError
from morphomod.metrics import iou
from morphomod.pipeline import (
    ChromaSource,
    FileSource,
    PipelineConfig,
    ProvidedSource,
    morphomod,
    restore,
    segment,
)
from morphomod.raster import save_png


def restore_scalar_oracle(x, m, x_hat):
    out = np.empty_like(x)
    for y in range(x.shape[0]):
        for c in range(x.shape[1]):
            out[y, c] = x_hat[y, c] if m[y, c] else x[y, c]
    return out


# --------------------------------------------------------------------------
# segment


def test_segment_empty_source_warns_and_returns_empty():
    rng = np.random.default_rng(0)
    img = rng.random((12, 12, 3))
    with pytest.warns(EmptyMaskWarning):
        mask = segment(img, ProvidedSource(np.zeros((12, 12))), d=3)
    assert not mask.any()


def test_segment_center_pixel_dilates_to_block():
    img = np.zeros((5, 5, 3))
    prob = np.zeros((5, 5))
    prob[2, 2] = 1.0
    mask = segment(img, ProvidedSource(prob), d=1)
    expected = np.zeros((5, 5), dtype=bool)
    expected[1:4, 1:4] = True
    assert np.array_equal(mask, expected)


def test_segment_threshold_binarizes_at_half_by_default():
    img = np.zeros((4, 4, 3))
    prob = np.full((4, 4), 0.5)
    assert segment(img, ProvidedSource(prob), d=0).all()
    with pytest.warns(EmptyMaskWarning):
        assert not segment(img, ProvidedSource(prob), d=0, threshold=0.6).any()


def test_segment_chroma_source_recovers_exact_box():
    sample = synth_disorient(np.random.default_rng(42))
    mask = segment(sample.image, ChromaSource(ORANGE, 0.1), d=0)
    assert iou(mask, sample.mask) == 1.0


def test_segment_file_source(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.random((8, 8, 3))
    prob = np.zeros((8, 8))
    prob[2:5, 3:6] = 1.0
    path = tmp_path / "mask.png"
    save_png(prob, path)
    mask = segment(img, FileSource(path), d=0)
    assert np.array_equal(mask, prob > 0)


def test_segment_rejects_mismatched_mask():
    img = np.zeros((6, 6, 3))
    with pytest.raises(ValueError):
        segment(img, ProvidedSource(np.ones((3, 3))), d=0)


# --------------------------------------------------------------------------
# restore


def test_restore_zero_mask_is_input():
    rng = np.random.default_rng(2)
    x = rng.random((7, 7, 3))
    x_hat = rng.random((7, 7, 3))
    out = restore(x, np.zeros((7, 7), dtype=bool), x_hat)
    assert np.array_equal(out, x)


def test_restore_full_mask_is_cleaned():
    rng = np.random.default_rng(3)
    x = rng.random((7, 7, 3))
    x_hat = rng.random((7, 7, 3))
    out = restore(x, np.ones((7, 7), dtype=bool), x_hat)
    assert np.array_equal(out, x_hat)


def test_restore_matches_scalar_oracle():
    rng = np.random.default_rng(4)
    for _ in range(20):
        x = rng.random((9, 8, 3))
        x_hat = rng.random((9, 8, 3))
        m = rng.random((9, 8)) < 0.5
        assert np.array_equal(restore(x, m, x_hat), restore_scalar_oracle(x, m, x_hat))


# --------------------------------------------------------------------------
# full pipeline


def test_pipeline_empty_mask_is_bit_exact_identity():
    rng = np.random.default_rng(5)
    img = rng.random((16, 16, 3))
    with pytest.warns(EmptyMaskWarning):
        restored, mask = morphomod(img, ProvidedSource(np.zeros((16, 16))), PipelineConfig())
    assert np.array_equal(restored, img)
    assert not mask.any()


def test_pipeline_fills_box_with_uniform_background():
    sample = synth_disorient(np.random.default_rng(6))
    restored, mask = morphomod(
        sample.image, ProvidedSource(sample.mask), PipelineConfig(d=0)
    )
    # uniform gray background: the harmonic fill converges to it
    assert np.abs(restored[sample.mask] - 0.5).max() <= 1e-4
    assert np.array_equal(restored[~sample.mask], sample.image[~sample.mask])


def test_pipeline_background_bit_exact_for_any_d():
    rng = np.random.default_rng(7)
    img = synthetic_host(rng, 48)
    prob = np.zeros((48, 48))
    prob[20:30, 12:25] = 1.0
    for d in (0, 2, 5):
        restored, mask = morphomod(img, ProvidedSource(prob), PipelineConfig(d=d))
        assert np.array_equal(restored[~mask], img[~mask])


def test_pipeline_mask_grows_with_d():
    rng = np.random.default_rng(8)
    img = synthetic_host(rng, 32)
    prob = np.zeros((32, 32))
    prob[10:20, 10:20] = 1.0
    masks = [
        morphomod(img, ProvidedSource(prob), PipelineConfig(d=d))[1] for d in (0, 1, 3)
    ]
    assert masks[0].sum() < masks[1].sum() < masks[2].sum()
    assert not (masks[0] & ~masks[1]).any()
    assert not (masks[1] & ~masks[2]).any()


def test_pipeline_deterministic():
    rng = np.random.default_rng(9)
    img = synthetic_host(rng, 32)
    prob = np.zeros((32, 32))
    prob[8:18, 6:20] = 1.0
    config = PipelineConfig(d=2)
    a, _ = morphomod(img, ProvidedSource(prob), config)
    b, _ = morphomod(img, ProvidedSource(prob), config)
    assert np.array_equal(a, b)


def test_pipeline_dumps_stages(tmp_path):
    sample = synth_disorient(np.random.default_rng(10))
    morphomod(
        sample.image, ProvidedSource(sample.mask), PipelineConfig(d=1),
        dump_dir=tmp_path, dump_stem="probe",
    )
    for suffix in ("mask", "inpainted", "restored"):
        assert (tmp_path / f"probe.{suffix}.png").exists()


def test_pipeline_attributes_stage_failures(tmp_path):
    rng = np.random.default_rng(11)
    img = rng.random((8, 8, 3))
    with pytest.raises(PipelineStageError) as err:
        morphomod(img, FileSource(tmp_path / "missing.png"), PipelineConfig())
    assert err.value.stage == "segment"

    prob = np.zeros((8, 8))
    prob[2:5, 2:5] = 1.0
    with pytest.raises(PipelineStageError) as err:
        morphomod(img, ProvidedSource(prob), PipelineConfig(backend="sdxl"))
    assert err.value.stage == "inpaint"


def test_pipeline_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(d=-1)
    with pytest.raises(ValueError):
        PipelineConfig(kernel="hexagon")
    config = PipelineConfig(kernel="disk", fill="gray")
    assert config.kernel.value == "disk"
    assert config.fill.value == "gray"
