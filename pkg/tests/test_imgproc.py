import numpy as np
import pytest
from PIL import Image

from ssqp.imgproc import (
    GrayImage,
    ImageFormatError,
    dct2,
    idct2,
    load_image,
    partition_blocks,
    write_pgm,
)


def test_grayimage_validation():
    GrayImage(np.zeros((1, 1)))
    with pytest.raises(ValueError):
        GrayImage(np.array([1.0, 2.0]))  # not 2-D
    with pytest.raises(ValueError):
        GrayImage(np.full((2, 2), 256.0))
    with pytest.raises(ValueError):
        GrayImage(np.full((2, 2), -1.0))
    with pytest.raises(ValueError):
        GrayImage(np.array([[np.nan, 0.0]]))


def test_load_pgm_binary_identity(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    img = load_image(path)
    assert img.height == 2 and img.width == 2
    assert img.pixels.ravel().tolist() == [0.0, 255.0, 128.0, 64.0]


def test_load_pgm_ascii_with_comments(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_text("P2\n# a comment\n3 2\n255\n0 1 2\n3 4 5\n")
    img = load_image(path)
    assert img.pixels.tolist() == [[0, 1, 2], [3, 4, 5]]


def test_load_pgm_truncated_is_io_error(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255]))
    with pytest.raises(OSError):
        load_image(path)


def test_load_pgm_16bit_rejected(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(ImageFormatError):
        load_image(path)


def test_load_png_red_pixel_bt601(tmp_path):
    path = tmp_path / "red.png"
    Image.new("RGB", (1, 1), (255, 0, 0)).save(path)
    img = load_image(path)
    assert abs(img.pixels[0, 0] - 76.245) < 1e-9


def test_load_png_gray_passthrough(tmp_path):
    path = tmp_path / "g.png"
    arr = np.arange(12, dtype=np.uint8).reshape(3, 4)
    Image.fromarray(arr, mode="L").save(path)
    img = load_image(path)
    assert np.array_equal(img.pixels, arr.astype(np.float64))


def test_load_png_16bit_rejected(tmp_path):
    path = tmp_path / "deep.png"
    Image.fromarray(np.zeros((2, 2), dtype=np.uint16)).save(path)
    with pytest.raises(ImageFormatError):
        load_image(path)


def test_load_unknown_format_rejected(tmp_path):
    path = tmp_path / "x.img"
    path.write_bytes(b"GARBAGE!")
    with pytest.raises(ImageFormatError):
        load_image(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_image(tmp_path / "missing.pgm")


def test_load_deterministic(tmp_path):
    path = tmp_path / "t.pgm"
    rng = np.random.default_rng(1)
    path.write_bytes(b"P5\n8 8\n255\n" + bytes(rng.integers(0, 256, 64, dtype=np.uint8)))
    a = load_image(path)
    b = load_image(path)
    assert np.array_equal(a.pixels, b.pixels)


def test_write_pgm_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    img = GrayImage(rng.integers(0, 256, (5, 7)).astype(np.float64))
    path = tmp_path / "d.pgm"
    write_pgm(img, path)
    back = load_image(path)
    assert np.array_equal(back.pixels, img.pixels)


def test_partition_counts_full_resolution():
    img = GrayImage(np.zeros((320, 480)))
    grid = partition_blocks(img, 5)
    assert len(grid) == 6144


@pytest.mark.parametrize("h,w,b,expected", [(10, 10, 5, 4), (11, 11, 5, 4)])
def test_partition_counts_small(h, w, b, expected):
    grid = partition_blocks(GrayImage(np.zeros((h, w))), b)
    assert len(grid) == expected


def test_partition_block_too_large():
    with pytest.raises(ValueError):
        partition_blocks(GrayImage(np.zeros((4, 10))), 5)


def test_partition_blocks_disjoint_cover():
    rng = np.random.default_rng(3)
    img = GrayImage(rng.uniform(0, 255, (13, 17)))
    grid = partition_blocks(img, 4)
    seen = np.zeros((13, 17), dtype=int)
    for (r, c), blk in zip(grid.origins, grid.blocks):
        assert np.array_equal(blk, img.pixels[r : r + 4, c : c + 4])
        seen[r : r + 4, c : c + 4] += 1
    assert seen[:12, :16].min() == 1 and seen[:12, :16].max() == 1
    assert seen[12:, :].max() == 0 and seen[:, 16:].max() == 0


def test_dct2_constant_block():
    blk = np.full((5, 5), 7.0)
    coeffs = dct2(blk)
    assert abs(coeffs[0, 0] - 35.0) < 1e-12
    coeffs[0, 0] = 0.0
    assert np.abs(coeffs).max() < 1e-12


def test_dct2_roundtrip_and_parseval():
    rng = np.random.default_rng(4)
    blk = rng.uniform(0, 255, (5, 5))
    coeffs = dct2(blk)
    assert np.abs(idct2(coeffs) - blk).max() < 1e-9
    assert abs((coeffs**2).sum() - (blk**2).sum()) < 1e-6


def test_dct2_linearity():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(6, 6))
    y = rng.normal(size=(6, 6))
    a, b = 2.5, -1.25
    lhs = dct2(a * x + b * y)
    rhs = a * dct2(x) + b * dct2(y)
    assert np.abs(lhs - rhs).max() < 1e-9


def test_dct2_requires_square():
    with pytest.raises(ValueError):
        dct2(np.zeros((2, 3)))
