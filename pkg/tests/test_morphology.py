import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from morphomod.morphology import (
    KernelShape,
    binarize,
    dilate,
    erode,
    invert,
    make_kernel,
)


def dilate_oracle(mask, kernel):
    """Definitional per-offset OR, independent of the separable fast path."""
    d = kernel.d
    padded = np.pad(mask, d, constant_values=False)
    height, width = mask.shape
    out = np.zeros_like(mask)
    for dy, dx in kernel.offsets:
        out |= padded[d - dy : d - dy + height, d - dx : d - dx + width]
    return out


def erode_oracle(mask, kernel, fill=False):
    d = kernel.d
    padded = np.pad(mask, d, constant_values=fill)
    height, width = mask.shape
    out = np.ones_like(mask)
    for dy, dx in kernel.offsets:
        out &= padded[d - dy : d - dy + height, d - dx : d - dx + width]
    return out


def dilate_scalar(mask, kernel):
    """Triple-loop reference for tiny cases."""
    height, width = mask.shape
    out = np.zeros_like(mask)
    for y in range(height):
        for x in range(width):
            for dy, dx in kernel.offsets:
                yy, xx = y - dy, x - dx
                if 0 <= yy < height and 0 <= xx < width and mask[yy, xx]:
                    out[y, x] = True
                    break
    return out


def _random_mask(rng, shape=(16, 16), p=None):
    density = rng.uniform(0.05, 0.5) if p is None else p
    return rng.random(shape) < density


# --------------------------------------------------------------------------
# kernels


def test_kernel_identity():
    for shape in KernelShape:
        k = make_kernel(0, shape)
        assert k.offsets == [(0, 0)]


def test_kernel_square_counts():
    assert len(make_kernel(1, "square").offsets) == 9
    assert len(make_kernel(3, "square").offsets) == 49  # the 7x7 window


def test_kernel_disk_d2_enumeration():
    offsets = {
        (dy, dx)
        for dy in range(-2, 3)
        for dx in range(-2, 3)
        if dy * dy + dx * dx <= 4
    }
    k = make_kernel(2, KernelShape.DISK)
    assert set(k.offsets) == offsets
    assert len(offsets) == 13


def test_kernel_rejects_negative_d():
    with pytest.raises(ValueError):
        make_kernel(-1)


def test_kernel_rejects_unknown_shape():
    with pytest.raises(ValueError):
        make_kernel(1, "triangle")


# --------------------------------------------------------------------------
# dilate


def test_dilate_d0_identity():
    rng = np.random.default_rng(0)
    m = _random_mask(rng)
    for shape in KernelShape:
        assert np.array_equal(dilate(m, make_kernel(0, shape)), m)


def test_dilate_center_pixel_fills_neighborhood():
    m = np.zeros((3, 3), dtype=bool)
    m[1, 1] = True
    assert dilate(m, make_kernel(1, "square")).all()


def test_dilate_matches_offset_oracle():
    rng = np.random.default_rng(1)
    for _ in range(150):
        m = _random_mask(rng)
        d = int(rng.integers(0, 5))
        shape = KernelShape.SQUARE if rng.random() < 0.5 else KernelShape.DISK
        k = make_kernel(d, shape)
        assert np.array_equal(dilate(m, k), dilate_oracle(m, k))


def test_dilate_matches_scalar_reference():
    rng = np.random.default_rng(2)
    for _ in range(12):
        m = _random_mask(rng, (6, 7))
        for shape in KernelShape:
            k = make_kernel(int(rng.integers(0, 4)), shape)
            assert np.array_equal(dilate(m, k), dilate_scalar(m, k))


def test_dilate_is_extensive_and_monotone():
    rng = np.random.default_rng(3)
    for _ in range(100):
        m = _random_mask(rng)
        extra = _random_mask(rng, p=0.1)
        bigger = m | extra
        d1, d2 = sorted(rng.integers(0, 5, size=2))
        shape = KernelShape.SQUARE if rng.random() < 0.5 else KernelShape.DISK
        k1, k2 = make_kernel(int(d1), shape), make_kernel(int(d2), shape)
        out = dilate(m, k2)
        assert (out | m).sum() == out.sum()  # extensive: output contains input
        assert not (dilate(m, k1) & ~out).any()  # monotone in d
        assert not (out & ~dilate(bigger, k2)).any()  # monotone in the mask


# --------------------------------------------------------------------------
# erode


def test_erode_all_ones_clears_border():
    m = np.ones((5, 6), dtype=bool)
    out = erode(m, make_kernel(1, "square"))
    expected = np.zeros_like(m)
    expected[1:-1, 1:-1] = True
    assert np.array_equal(out, expected)


def test_closing_contains_interior_mask():
    rng = np.random.default_rng(4)
    for _ in range(50):
        m = np.zeros((16, 16), dtype=bool)
        m[3:13, 3:13] = _random_mask(rng, (10, 10), p=0.3)
        k = make_kernel(int(rng.integers(1, 3)), "square")
        closed = erode(dilate(m, k), k)
        assert not (m & ~closed).any()


def test_erode_matches_offset_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        m = _random_mask(rng)
        d = int(rng.integers(0, 5))
        shape = KernelShape.SQUARE if rng.random() < 0.5 else KernelShape.DISK
        k = make_kernel(d, shape)
        assert np.array_equal(erode(m, k), erode_oracle(m, k))
        assert np.array_equal(
            erode(m, k, out_of_bounds=True), erode_oracle(m, k, fill=True)
        )


def test_dilate_erode_duality():
    # dilation with background surround == complement of eroding the
    # complement with foreground surround (square/disk kernels are symmetric)
    rng = np.random.default_rng(6)
    for _ in range(100):
        m = _random_mask(rng)
        d = int(rng.integers(0, 5))
        shape = KernelShape.SQUARE if rng.random() < 0.5 else KernelShape.DISK
        k = make_kernel(d, shape)
        assert np.array_equal(dilate(m, k), ~erode(~m, k, out_of_bounds=True))


# --------------------------------------------------------------------------
# binarize / invert


def test_binarize_threshold_convention():
    assert not binarize(np.full((2, 2), 0.4), 0.5).any()
    assert binarize(np.full((2, 2), 0.5), 0.5).all()  # >= keeps the boundary


def test_binarize_matches_elementwise_oracle():
    rng = np.random.default_rng(7)
    prob = rng.random((12, 9))
    threshold = float(rng.random())
    out = binarize(prob, threshold)
    for y in range(12):
        for x in range(9):
            assert out[y, x] == (prob[y, x] >= threshold)


def test_binarize_rejects_bad_threshold():
    with pytest.raises(ValueError):
        binarize(np.zeros((2, 2)), 1.5)


@settings(max_examples=50, deadline=None)
@given(mask=arrays(np.bool_, (8, 8)))
def test_invert_involution_and_partition(mask):
    flipped = invert(mask)
    assert np.array_equal(invert(flipped), mask)
    assert flipped.sum() + mask.sum() == mask.size


def test_invert_all_zeros():
    assert invert(np.zeros((3, 3), dtype=bool)).all()
