import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image as PILImage

from morphomod.errors import DegenerateRegionError, PngFormatError, UnsupportedPngError
from morphomod.raster import (
    FillStrategy,
    composite,
    load_mask,
    load_png,
    prefill,
    save_png,
)
from png_oracle import read_png, write_png_16bit_gray


def test_load_png_single_pixel_extremes(tmp_path):
    white = tmp_path / "white.png"
    PILImage.new("RGB", (1, 1), (255, 255, 255)).save(white)
    assert np.array_equal(load_png(white), np.ones((1, 1, 3)))

    black = tmp_path / "black.png"
    PILImage.new("RGB", (1, 1), (0, 0, 0)).save(black)
    assert np.array_equal(load_png(black), np.zeros((1, 1, 3)))


def test_load_png_matches_independent_decoder(tmp_path):
    rng = np.random.default_rng(7)
    raw = rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8)
    path = tmp_path / "random.png"
    PILImage.fromarray(raw, "RGB").save(path)

    loaded = load_png(path)
    oracle, depth = read_png(path)
    assert depth == 8
    assert np.array_equal(loaded, oracle.astype(np.float64) / 255.0)


def test_save_png_bytes_match_independent_decoder(tmp_path):
    rng = np.random.default_rng(8)
    img = rng.random((6, 5, 3))
    path = tmp_path / "saved.png"
    save_png(img, path)
    oracle, _ = read_png(path)
    assert np.array_equal(oracle, np.round(img * 255.0).astype(np.uint8))


def test_round_trip_gray_half(tmp_path):
    img = np.full((3, 3, 3), 0.5)
    path = tmp_path / "gray.png"
    save_png(img, path)
    oracle, _ = read_png(path)
    assert set(np.unique(oracle)) <= {127, 128}
    assert np.abs(load_png(path) - img).max() <= 1.0 / 255.0


def test_round_trip_binary_mask_exact(tmp_path):
    rng = np.random.default_rng(9)
    mask = rng.random((16, 12)) < 0.3
    path = tmp_path / "mask.png"
    save_png(mask, path)
    reloaded = load_mask(path)
    assert np.array_equal(reloaded, mask.astype(np.float64))


def test_round_trip_random_image(tmp_path):
    rng = np.random.default_rng(10)
    img = rng.random((64, 64, 3))
    path = tmp_path / "img.png"
    save_png(img, path)
    assert np.abs(load_png(path) - img).max() <= 1.0 / 255.0


def test_round_trip_rgba(tmp_path):
    rng = np.random.default_rng(11)
    rgba = rng.random((9, 7, 4))
    path = tmp_path / "rgba.png"
    save_png(rgba, path)
    back = load_png(path)
    assert back.shape == (9, 7, 4)
    assert np.abs(back - rgba).max() <= 1.0 / 255.0


def test_load_16bit_grayscale(tmp_path):
    values = np.array([[0, 32768], [65535, 1234]], dtype=np.uint16)
    path = tmp_path / "deep.png"
    write_png_16bit_gray(path, values)
    arr = load_png(path)
    assert arr.shape == (2, 2)
    assert np.allclose(arr, values.astype(np.float64) / 65535.0)


def test_missing_file_is_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_png(tmp_path / "nope.png")


def test_malformed_png(tmp_path):
    path = tmp_path / "junk.png"
    path.write_bytes(b"this is definitely not a png")
    with pytest.raises(PngFormatError):
        load_png(path)


def test_non_png_image_rejected(tmp_path):
    path = tmp_path / "sneaky.png"
    PILImage.new("RGB", (4, 4), (10, 20, 30)).save(path, format="JPEG")
    with pytest.raises(PngFormatError):
        load_png(path)


def test_one_bit_png_unsupported(tmp_path):
    path = tmp_path / "bilevel.png"
    PILImage.new("1", (4, 4), 1).save(path)
    with pytest.raises(UnsupportedPngError):
        load_png(path)


def test_grayscale_loads_as_mask(tmp_path):
    path = tmp_path / "gray.png"
    PILImage.new("L", (3, 2), 200).save(path)
    arr = load_png(path)
    assert arr.shape == (2, 3)
    assert np.allclose(arr, 200 / 255.0)


def test_save_rejects_out_of_range(tmp_path):
    with pytest.raises(ValueError):
        save_png(np.full((2, 2, 3), 1.5), tmp_path / "bad.png")


# --------------------------------------------------------------------------
# composite


def _rand_rgba(rng, h, w):
    return rng.random((h, w, 4))


def test_composite_zero_opacity_is_identity():
    rng = np.random.default_rng(0)
    base = rng.random((8, 8, 3))
    overlay = _rand_rgba(rng, 4, 4)
    out = composite(base, overlay, (2, 2), opacity_scale=0.0)
    assert np.array_equal(out, base)


def test_composite_full_opacity_replaces_region():
    rng = np.random.default_rng(1)
    base = rng.random((8, 8, 3))
    overlay = np.concatenate([rng.random((3, 4, 3)), np.ones((3, 4, 1))], axis=2)
    out = composite(base, overlay, (1, 2), opacity_scale=1.0)
    assert np.array_equal(out[1:4, 2:6], overlay[..., :3])
    untouched = base.copy()
    untouched[1:4, 2:6] = out[1:4, 2:6]
    assert np.array_equal(out, untouched)


def test_composite_midpoint_blend():
    base = np.full((1, 1, 3), 0.2)
    overlay = np.full((1, 1, 4), 0.8)
    overlay[..., 3] = 1.0
    out = composite(base, overlay, (0, 0), opacity_scale=0.5)
    assert np.allclose(out, 0.5 * 0.8 + 0.5 * 0.2)


def test_composite_clips_out_of_bounds():
    base = np.zeros((4, 4, 3))
    overlay = np.ones((3, 3, 4))
    out = composite(base, overlay, (-1, 2), opacity_scale=1.0)
    expected = np.zeros((4, 4, 3))
    expected[0:2, 2:4] = 1.0
    assert np.array_equal(out, expected)
    # fully off-canvas placements are a no-op
    assert np.array_equal(composite(base, overlay, (10, 10)), base)


@settings(max_examples=40, deadline=None)
@given(
    base=arrays(np.float64, (5, 6, 3), elements=st.floats(0, 1)),
    overlay=arrays(np.float64, (3, 3, 4), elements=st.floats(0, 1)),
    scale=st.floats(0, 1),
    oy=st.integers(-3, 6),
    ox=st.integers(-3, 7),
)
def test_composite_stays_in_unit_range(base, overlay, scale, oy, ox):
    out = composite(base, overlay, (oy, ox), opacity_scale=scale)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_composite_rejects_bad_opacity():
    base = np.zeros((2, 2, 3))
    overlay = np.zeros((1, 1, 4))
    with pytest.raises(ValueError):
        composite(base, overlay, (0, 0), opacity_scale=1.5)


# --------------------------------------------------------------------------
# prefill


def test_prefill_none_is_identity():
    rng = np.random.default_rng(2)
    img = rng.random((6, 6, 3))
    mask = rng.random((6, 6)) < 0.4
    assert np.array_equal(prefill(img, mask, FillStrategy.NONE), img)


def test_prefill_constants():
    rng = np.random.default_rng(3)
    img = rng.random((5, 5, 3))
    mask = rng.random((5, 5)) < 0.5
    mask[0, 0] = True
    for strategy, value in ((FillStrategy.WHITE, 1.0), (FillStrategy.BLACK, 0.0),
                            (FillStrategy.GRAY, 0.5)):
        out = prefill(img, mask, strategy)
        assert np.all(out[mask] == value)
        assert np.array_equal(out[~mask], img[~mask])


def test_prefill_average_background_brute_force():
    # background pixels are an even split of 0.0 and 1.0 -> mean exactly 0.5
    img = np.zeros((4, 2, 3))
    img[:2] = 0.0
    img[2:] = 1.0
    mask = np.zeros((4, 2), dtype=bool)
    mask[1, 0] = mask[2, 1] = True
    img[1, 0] = 0.0
    img[2, 1] = 1.0
    out = prefill(img, mask, FillStrategy.AVERAGE_BACKGROUND)

    background = [img[y, x] for y in range(4) for x in range(2) if not mask[y, x]]
    expected = np.mean(np.stack(background), axis=0)
    assert np.allclose(expected, 0.5)
    assert np.allclose(out[mask], expected)


def test_prefill_parses_strategy_names():
    img = np.zeros((2, 2, 3))
    mask = np.ones((2, 2), dtype=bool)
    assert np.all(prefill(img, mask, "white") == 1.0)
    with pytest.raises(ValueError):
        prefill(img, mask, "sparkle")


def test_prefill_degenerate_average_background():
    img = np.zeros((3, 3, 3))
    mask = np.ones((3, 3), dtype=bool)
    with pytest.raises(DegenerateRegionError):
        prefill(img, mask, FillStrategy.AVERAGE_BACKGROUND)


@settings(max_examples=40, deadline=None)
@given(
    img=arrays(np.float64, (5, 5, 3), elements=st.floats(0, 1)),
    mask=arrays(np.bool_, (5, 5)),
    strategy=st.sampled_from(list(FillStrategy)),
)
def test_prefill_never_touches_background(img, mask, strategy):
    if strategy is FillStrategy.AVERAGE_BACKGROUND and mask.all():
        return
    out = prefill(img, mask, strategy)
    assert np.array_equal(out[~mask], img[~mask])
