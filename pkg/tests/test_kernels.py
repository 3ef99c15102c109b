"""Kernel behavior plus bit-exact agreement between the two backends."""

import numpy as np
import pytest

from wheatseg._kernels import _numpy as knp
from wheatseg._kernels.geometry import warp_coeffs, warp_output_shape

kc = pytest.importorskip("wheatseg._kernels._core")

BACKENDS = [pytest.param(knp, id="python"), pytest.param(kc, id="c")]


def random_case(rng, h=40, w=40, ph=9, pw=7):
    img = rng.random((h, w, 3), dtype=np.float32)
    mask = (rng.random((h, w)) < 0.3).astype(np.uint8)
    patch = rng.random((ph, pw, 3), dtype=np.float32)
    alpha = (rng.random((ph, pw)) < 0.5).astype(np.uint8)
    return img, mask, patch, alpha


@pytest.mark.parametrize("kern", BACKENDS)
def test_paste_composites_only_under_alpha(kern, rng):
    img, mask, patch, alpha = random_case(rng)
    before_img, before_mask = img.copy(), mask.copy()
    top, left = 5, 11
    kern.paste(img, mask, patch, alpha, top, left)
    on = alpha.astype(bool)
    region = img[top : top + 9, left : left + 7]
    assert np.array_equal(region[on], patch[on])
    assert np.array_equal(mask[top : top + 9, left : left + 7][on], np.ones(on.sum(), np.uint8))
    # everything outside the alpha support is untouched
    untouched = np.ones_like(mask, dtype=bool)
    untouched[top : top + 9, left : left + 7] = ~on
    assert np.array_equal(img[untouched], before_img[untouched])
    assert np.array_equal(mask[untouched], before_mask[untouched])


@pytest.mark.parametrize("kern", BACKENDS)
def test_paste_preserves_prior_mask(kern, rng):
    img, mask, patch, alpha = random_case(rng)
    mask[:] = 1
    kern.paste(img, mask, patch, alpha, 0, 0)
    assert mask.all()


def test_warp_output_shape_properties():
    # no-op transform keeps the size
    assert warp_output_shape(10, 20, 1.0, 0.0) == (10, 20)
    # quarter turns swap the sides
    assert warp_output_shape(10, 20, 1.0, 90.0) == (20, 10)
    assert warp_output_shape(10, 20, 1.0, -90.0) == (20, 10)
    # pure scaling is linear
    assert warp_output_shape(10, 20, 2.0, 0.0) == (20, 40)
    assert warp_output_shape(10, 20, 0.5, 0.0) == (5, 10)
    # rotation never shrinks a square's bounding box
    for angle in (15.0, 37.0, 45.0, 120.0):
        oh, ow = warp_output_shape(16, 16, 1.0, angle)
        assert oh >= 16 and ow >= 16


@pytest.mark.parametrize("kern", BACKENDS)
def test_warp_identity_is_exact(kern, rng):
    _, _, patch, alpha = random_case(rng, ph=12, pw=8)
    out_p, out_a = kern.warp_patch(patch, alpha, warp_coeffs(12, 8, 1.0, 0.0, False))
    assert np.array_equal(out_p, patch)
    assert np.array_equal(out_a, alpha)


@pytest.mark.parametrize("kern", BACKENDS)
def test_warp_flip_mirrors(kern, rng):
    _, _, patch, alpha = random_case(rng, ph=12, pw=8)
    out_p, out_a = kern.warp_patch(patch, alpha, warp_coeffs(12, 8, 1.0, 0.0, True))
    assert np.allclose(out_p, patch[:, ::-1], atol=1e-6)
    assert np.array_equal(out_a, alpha[:, ::-1])


@pytest.mark.parametrize("kern", BACKENDS)
def test_warp_quarter_turn_matches_rot90(kern, rng):
    _, _, patch, alpha = random_case(rng, ph=12, pw=8)
    # angle is counterclockwise in image coordinates
    out_p, out_a = kern.warp_patch(patch, alpha, warp_coeffs(12, 8, 1.0, 90.0, False))
    assert out_p.shape == (8, 12, 3)
    assert np.allclose(out_p, np.rot90(patch, k=-1), atol=1e-6)
    assert np.array_equal(out_a, np.rot90(alpha, k=-1))


@pytest.mark.parametrize("kern", BACKENDS)
def test_warp_zero_outside_support(kern, rng):
    patch = np.ones((6, 6, 3), dtype=np.float32)
    alpha = np.ones((6, 6), dtype=np.uint8)
    out_p, out_a = kern.warp_patch(patch, alpha, warp_coeffs(6, 6, 1.0, 45.0, False))
    corners = [(0, 0), (0, out_a.shape[1] - 1), (out_a.shape[0] - 1, 0)]
    for y, x in corners:
        assert out_a[y, x] == 0
        assert (out_p[y, x] == 0).all()


@pytest.mark.parametrize("kern", BACKENDS)
def test_overlap_counts_match_numpy_sets(kern, rng):
    a = (rng.random((33, 17)) < 0.4).astype(np.uint8)
    b = (rng.random((33, 17)) < 0.4).astype(np.uint8)
    inter, na, nb = kern.overlap_counts(a, b)
    assert inter == int(np.logical_and(a, b).sum())
    assert na == int(a.sum())
    assert nb == int(b.sum())


def _label_oracle(mask: np.ndarray):
    """Flood fill with 8-connectivity, labels in raster order of first pixel."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    nxt = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and not labels[y, x]:
                nxt += 1
                stack = [(y, x)]
                labels[y, x] = nxt
                while stack:
                    cy, cx = stack.pop()
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx_ = cy + dy, cx + dx
                            if 0 <= ny < h and 0 <= nx_ < w and mask[ny, nx_] and not labels[ny, nx_]:
                                labels[ny, nx_] = nxt
                                stack.append((ny, nx_))
    return labels, nxt


@pytest.mark.parametrize("kern", BACKENDS)
def test_label_components_against_flood_fill(kern, rng):
    for _ in range(25):
        mask = (rng.random((24, 24)) < 0.35).astype(np.uint8)
        got, n_got = kern.label_components(mask)
        want, n_want = _label_oracle(mask)
        assert n_got == n_want
        assert np.array_equal(got, want)


@pytest.mark.parametrize("kern", BACKENDS)
def test_label_components_diagonal_touch(kern):
    mask = np.array([[1, 0], [0, 1]], dtype=np.uint8)
    labels, count = kern.label_components(mask)
    assert count == 1
    assert labels[0, 0] == labels[1, 1] == 1


def test_backends_bit_identical(rng):
    for trial in range(30):
        img, mask, patch, alpha = random_case(rng)
        img2, mask2 = img.copy(), mask.copy()
        knp.paste(img, mask, patch, alpha, 3, 4)
        kc.paste(img2, mask2, patch, alpha, 3, 4)
        assert np.array_equal(img, img2) and np.array_equal(mask, mask2)

        scale = float(rng.uniform(0.5, 2.0))
        angle = float(rng.uniform(-180.0, 180.0))
        flip = bool(rng.integers(0, 2))
        coeffs = warp_coeffs(patch.shape[0], patch.shape[1], scale, angle, flip)
        p1, a1 = knp.warp_patch(patch, alpha, coeffs)
        p2, a2 = kc.warp_patch(patch, alpha, coeffs)
        assert p1.tobytes() == p2.tobytes(), f"trial {trial}: warp image bytes differ"
        assert np.array_equal(a1, a2)

        assert knp.overlap_counts(mask, mask2) == kc.overlap_counts(mask, mask2)
        l1, n1 = knp.label_components(mask)
        l2, n2 = kc.label_components(mask)
        assert n1 == n2 and np.array_equal(l1, l2)
