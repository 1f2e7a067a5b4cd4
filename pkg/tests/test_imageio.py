import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenrec.errors import DimensionError, PGMError
from eigenrec.imageio import (
    FaceVector, GrayImage, flatten, parse_pgm, read_pgm, serialize_pgm, to_8bit, unflatten,
)


@st.composite
def gray_images(draw, maxval=255):
    w = draw(st.integers(1, 7))
    h = draw(st.integers(1, 7))
    px = draw(st.lists(st.integers(0, maxval), min_size=w * h, max_size=w * h))
    return GrayImage(w, h, np.array(px, dtype=float), maxval)


def test_parse_ascii():
    img = parse_pgm(b"P2\n2 2\n255\n0 128 255 64")
    assert (img.width, img.height, img.maxval) == (2, 2, 255)
    assert img.pixels.tolist() == [0, 128, 255, 64]


def test_parse_binary_single_pixel():
    img = parse_pgm(b"P5\n1 1\n255\n" + bytes([0x7F]))
    assert (img.width, img.height) == (1, 1)
    assert img.pixels.tolist() == [127]


def test_truncated_binary_payload():
    with pytest.raises(PGMError, match="pixel-count mismatch"):
        parse_pgm(b"P5\n2 2\n255\n" + bytes([1, 2, 3]))


def test_ascii_count_mismatch():
    with pytest.raises(PGMError, match="pixel-count mismatch"):
        parse_pgm(b"P2\n2 2\n255\n1 2 3")


def test_comments_in_header():
    img = parse_pgm(b"P2\n# made by hand\n3 1 # width height\n# max\n9\n1 2 3\n")
    assert img.pixels.tolist() == [1, 2, 3]
    assert img.maxval == 9


def test_crlf_header():
    img = parse_pgm(b"P5\r\n2 1\r\n255\n" + bytes([5, 6]))
    assert img.pixels.tolist() == [5, 6]


def test_sixteen_bit_big_endian():
    img = parse_pgm(b"P5\n2 1\n65535\n" + bytes([0x01, 0x02, 0xFF, 0xFF]))
    assert img.pixels.tolist() == [0x0102, 65535]
    assert img.pixels.dtype == np.float64


@pytest.mark.parametrize("data", [
    b"P6\n1 1\n255\n\x00\x00\x00",
    b"P2\n1\n",
    b"P2\nx 1\n255\n0",
    b"",
    b"P5 1 1 255",
])
def test_malformed_header(data):
    with pytest.raises(PGMError):
        parse_pgm(data)


@pytest.mark.parametrize("maxval", [b"0", b"65536"])
def test_maxval_range(maxval):
    with pytest.raises(PGMError, match="maxval"):
        parse_pgm(b"P2\n1 1\n" + maxval + b"\n0")


def test_pixel_above_maxval():
    with pytest.raises(PGMError):
        parse_pgm(b"P2\n1 1\n10\n11")


def test_read_pgm_names_path(tmp_path):
    with pytest.raises(PGMError, match="missing.pgm"):
        read_pgm(tmp_path / "missing.pgm")


def test_flatten_worked_example():
    img = GrayImage(2, 2, [1, 2, 2, 1])
    assert flatten(img).values.tolist() == [1, 2, 2, 1]


def test_flatten_single_pixel():
    assert flatten(GrayImage(1, 1, [5])).values.tolist() == [5]


def test_flatten_is_column_major():
    # rows [1 2 3] / [4 5 6]: column 0 is (1, 4), column 1 is (2, 5), ...
    img = GrayImage(3, 2, [1, 2, 3, 4, 5, 6])
    assert flatten(img).values.tolist() == [1, 4, 2, 5, 3, 6]
    assert flatten(img).source_dims == (3, 2)


def test_unflatten_worked_example():
    img = unflatten(FaceVector([1, 2, 2, 1], (2, 2)))
    assert img.array.tolist() == [[1, 2], [2, 1]]


def test_export_clamps_and_rounds_half_up():
    img = to_8bit(FaceVector([-3.2, 0.5, 254.5, 300.0, 2.49, 7.5], (3, 2)))
    assert sorted(img.pixels.tolist()) == sorted([0, 1, 255, 255, 2, 8])
    assert to_8bit(FaceVector([-3.2], (1, 1))).pixels.tolist() == [0]


def test_unflatten_dimension_mismatch():
    with pytest.raises(DimensionError):
        FaceVector([1, 2, 3], (2, 2))


@given(gray_images())
def test_flatten_roundtrip(img):
    assert unflatten(flatten(img)) == img


@given(gray_images())
def test_flatten_index_map(img):
    vec = flatten(img).values
    grid = img.array
    for r in range(img.height):
        for c in range(img.width):
            assert vec[c * img.height + r] == grid[r, c]


@given(gray_images(), st.booleans())
def test_serialize_roundtrip(img, binary):
    assert parse_pgm(serialize_pgm(img, binary=binary)) == img


@settings(max_examples=25)
@given(gray_images(maxval=65535))
def test_serialize_roundtrip_16bit(img):
    assert parse_pgm(serialize_pgm(img)) == img
