import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hybridgt.errors import PGMFormatError, PGMMaxvalError, PGMTruncatedError
from hybridgt.residuals import (
    GrayImage,
    ResidualField,
    dc4_predict,
    estimate_covariance,
    extract_residuals,
    load_pgm,
    neighbor_covariance,
    neighbor_origins,
    parse_pgm,
    write_pgm,
)


def reference_residuals(px, remove_mean=True):
    """Slow per-block oracle for the residual field."""
    px = px.astype(np.int64)
    nby, nbx = px.shape[0] // 4, px.shape[1] // 4
    raw = np.zeros((nby, nbx, 16))
    for by in range(nby):
        for bx in range(nbx):
            y, x = 4 * by, 4 * bx
            refs = []
            if y > 0:
                refs += list(px[y - 1, x:x + 4])
            if x > 0:
                refs += list(px[y:y + 4, x - 1])
            if len(refs) == 8:
                p = (sum(refs) + 4) // 8
            elif len(refs) == 4:
                p = round((sum(refs) + 2) / 4)
            else:
                p = 128
            raw[by, bx] = (px[y:y + 4, x:x + 4] - p).ravel()
    out = raw.copy()
    if remove_mean:
        for by in range(1, nby):
            out[by] -= raw[by - 1].mean(axis=1)[:, None]
    return out


def test_pgm_roundtrip(tmp_path):
    data = b"P5\n# comment\n2 2\n255\n" + bytes([0, 128, 255, 64])
    img = parse_pgm(data)
    assert (img.width, img.height) == (2, 2)
    np.testing.assert_array_equal(img.pixels, [[0, 128], [255, 64]])
    path = tmp_path / "x.pgm"
    write_pgm(img, path)
    np.testing.assert_array_equal(load_pgm(path).pixels, img.pixels)


def test_pgm_errors():
    with pytest.raises(PGMFormatError):
        parse_pgm(b"P2\n2 2\n255\n0 1 2 3\n")
    with pytest.raises(PGMTruncatedError):
        parse_pgm(b"P5\n2 2\n255\n")
    with pytest.raises(PGMTruncatedError):
        parse_pgm(b"P5\n2 2\n255\n\x00\x01\x02")
    with pytest.raises(PGMMaxvalError):
        parse_pgm(b"P5\n1 1\n65535\n\x00\x00")


def test_gray_image_is_read_only():
    img = GrayImage(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1


def test_dc4_examples():
    px = np.zeros((8, 8), dtype=np.uint8)
    px[3, 4:8] = 100
    px[4:8, 3] = 100
    assert dc4_predict(GrayImage(px), (4, 4)) == 100
    px = np.zeros((8, 4), dtype=np.uint8)
    px[3] = [10, 20, 30, 40]
    assert dc4_predict(GrayImage(px), (0, 4)) == 26
    assert dc4_predict(GrayImage(px), (0, 0)) == 128


def test_dc4_rounding():
    # two borders: integer (s + 4) // 8, so 8 * 77 + 4 = 620 gives 77
    img = GrayImage(np.full((8, 8), 77, dtype=np.uint8))
    assert dc4_predict(img, (4, 4)) == 77
    px = np.zeros((8, 8), dtype=np.uint8)
    px[3, 4:8] = [1, 1, 1, 1]  # (4 + 4) // 8
    assert dc4_predict(GrayImage(px), (4, 4)) == 1
    px[3, 4:8] = [1, 1, 1, 0]  # (3 + 4) // 8
    assert dc4_predict(GrayImage(px), (4, 4)) == 0
    # one border: round-half-even of (s + 2) / 4
    assert dc4_predict(img, (0, 4)) == 78  # 310 / 4 = 77.5
    px = np.zeros((8, 4), dtype=np.uint8)
    px[3] = [1, 1, 1, 1]  # 6 / 4 = 1.5
    assert dc4_predict(GrayImage(px), (0, 4)) == 2
    px[3] = [1, 1, 1, 0]  # 5 / 4 = 1.25
    assert dc4_predict(GrayImage(px), (0, 4)) == 1


def test_dc4_origin_checks():
    img = GrayImage(np.zeros((8, 8), dtype=np.uint8))
    with pytest.raises(ValueError):
        dc4_predict(img, (1, 0))
    with pytest.raises(IndexError):
        dc4_predict(img, (8, 0))


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, (12, 12)))
def test_dc4_ignores_block_contents(px):
    before = dc4_predict(GrayImage(px), (4, 4))
    px2 = px.copy()
    px2[4:8, 4:8] = 255 - px2[4:8, 4:8]
    px2[8:, :] = 0
    assert dc4_predict(GrayImage(px2), (4, 4)) == before


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(4, 20), st.integers(4, 20))), st.booleans())
def test_field_matches_reference(px, remove_mean):
    field = ResidualField(GrayImage(px), remove_mean=remove_mean)
    np.testing.assert_allclose(field.values, reference_residuals(px, remove_mean), atol=1e-12)


@pytest.mark.parametrize("value", [76, 77])
@pytest.mark.parametrize("remove_mean", [False, True])
def test_constant_image_has_zero_interior_residuals(value, remove_mean):
    img = GrayImage(np.full((32, 32), value, dtype=np.uint8))
    # blocks two sub-block rows down: neither they nor the block above touch a border
    res = extract_residuals(img, (4, 8, 28, 24), remove_mean=remove_mean)
    assert len(res) == 42
    assert all(not np.any(r.values) for r in res)


def test_ramp_residuals():
    px = np.zeros((8, 8), dtype=np.uint8)
    px[3, 4:8] = 50
    px[4:8, 3] = 50
    px[4:8, 4:8] = (50 + np.arange(16)).reshape(4, 4)
    (r,) = extract_residuals(GrayImage(px), (4, 4, 4, 4), remove_mean=False)
    np.testing.assert_array_equal(r.values, np.arange(16))
    assert r.origin == (4, 4)


def test_pixel_mean_mode():
    px = np.zeros((8, 4), dtype=np.uint8)
    px[:4] = 40
    px[4:] = 60
    field = ResidualField(GrayImage(px), mean_mode="pixel")
    # second block predicts 40 from the border, then 40 - 40 = 0 more is removed
    np.testing.assert_allclose(field.values[1, 0], 20.0)
    field = ResidualField(GrayImage(px), mean_mode="residual")
    # first block residual is 40 - 128 everywhere, so 88 is added back
    np.testing.assert_allclose(field.values[1, 0], 20.0 + 88.0)
    with pytest.raises(ValueError):
        ResidualField(GrayImage(px), mean_mode="median")


def test_covariance_examples():
    y = np.arange(16.0)
    est = estimate_covariance([y])
    np.testing.assert_allclose(est.matrix, np.outer(y, y))
    assert np.linalg.matrix_rank(est.matrix) == 1
    e = np.eye(16)
    est = estimate_covariance(e[:2])
    np.testing.assert_allclose(np.diag(est.matrix)[:3], [0.5, 0.5, 0.0])
    with pytest.raises(ValueError):
        estimate_covariance(np.zeros((0, 16)))
    with pytest.raises(ValueError):
        estimate_covariance(e, m_limit=0)


def test_covariance_limit_uses_first_rows(rng):
    rows = rng.normal(size=(48, 16))
    est = estimate_covariance(rows, m_limit=45)
    assert est.m == 45
    np.testing.assert_allclose(est.matrix, rows[:45].T @ rows[:45] / 45)


def test_neighbors(rng):
    img = GrayImage(rng.integers(0, 256, size=(64, 64), dtype=np.uint8))
    assert neighbor_origins(img, (16, 16)) == [(0, 16), (16, 0), (0, 0)]
    assert neighbor_origins(img, (0, 16)) == [(0, 0)]
    full = neighbor_covariance(img, (16, 16))
    assert full.m == 48 and not full.fallback
    field = ResidualField(img)
    rows = np.concatenate([field.region(0, 16, 16, 16), field.region(16, 0, 16, 16),
                           field.region(0, 0, 16, 16)])
    np.testing.assert_allclose(full.matrix, rows.T @ rows / 48)
    small = neighbor_covariance(img, (16, 16), m=4)
    assert small.m == 4 and np.linalg.matrix_rank(small.matrix) <= 4
    origin = neighbor_covariance(img, (0, 0))
    assert origin.fallback and origin.m == 0
    with pytest.raises(ValueError):
        neighbor_covariance(img, (8, 16))
