import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenrec.eigenspace import Method, train
from eigenrec.errors import ModelFormatError
from eigenrec.imageio import FaceVector
from eigenrec.model_store import (
    HEADER_SIZE, dumps, load, loads, models_equal, payload_size, read_header, save,
)


def make_model(seed=0, m=5, width=3, height=4, method=None, labels=None):
    rng = np.random.default_rng(seed)
    d = width * height
    labels = labels or [f"s{j % 3}" for j in range(m)]
    samples = [(FaceVector(rng.uniform(0, 255, d), (width, height)), lab) for lab in labels]
    return train(samples, method or Method.pca())


def minimal_file(label=b"a"):
    # D=1, k=1, M=1, assembled field by field
    header = (b"EIGF" + struct.pack("<H", 1) + bytes([0, 0])
              + struct.pack("<d", 0.0) + struct.pack("<d", 0.0)
              + struct.pack("<IIIIII", 1, 1, 1, 1, 1, 0)
              + struct.pack("<d", 0.0) + struct.pack("<d", 0.0))
    payload = struct.pack("<dddd", 5.0, 2.0, 1.0, 0.0)
    return header + payload + struct.pack("<I", len(label)) + label


class TestRoundTrip:
    @pytest.mark.parametrize("method", [Method.pca(), Method.npca_method(),
                                        Method.npca_method(um=10, ustd=3, literal_eq13=True)])
    def test_bit_identical(self, method):
        model = make_model(method=method)
        again = loads(dumps(model))
        assert models_equal(model, again)
        assert dumps(again) == dumps(model)

    def test_bytes_are_deterministic(self):
        assert dumps(make_model(1)) == dumps(make_model(1))

    def test_file_and_stream(self, tmp_path):
        model = make_model(2)
        n = save(model, tmp_path / "m.eigf")
        assert n == (tmp_path / "m.eigf").stat().st_size
        assert models_equal(load(tmp_path / "m.eigf"), model)
        buf = io.BytesIO()
        save(model, buf)
        buf.seek(0)
        assert models_equal(load(buf), model)

    def test_unicode_labels(self):
        model = make_model(3, m=3, labels=["zoë", "名前", "zoë"])
        assert loads(dumps(model)).train_labels == ("zoë", "名前", "zoë")


class TestLayout:
    def test_header_size(self):
        assert HEADER_SIZE == 64

    def test_size_for_small_model(self):
        model = train([(FaceVector([1.0, 2, 3, 4], (2, 2)), "ab"),
                       (FaceVector([4.0, 3, 2, 9], (2, 2)), "c")], Method.pca())
        assert (model.n_pixels, model.n_components, model.n_train) == (4, 1, 2)
        assert payload_size(4, 1, 2) == 88
        assert len(dumps(model)) == 64 + 88 + (4 + 2) + (4 + 1)

    def test_hand_built_minimal(self):
        model = loads(minimal_file())
        assert model.mean_face.tolist() == [5.0]
        assert model.eigenvalues.tolist() == [2.0]
        assert model.eigenfaces.tolist() == [[1.0]]
        assert model.train_weights.tolist() == [[0.0]]
        assert model.train_labels == ("a",)
        assert dumps(model) == minimal_file()

    def test_column_major_eigenfaces(self):
        model = make_model(4)
        data = dumps(model)
        d, k = model.n_pixels, model.n_components
        start = HEADER_SIZE + 8 * (d + k)
        second = np.frombuffer(data[start + 8 * d:start + 16 * d], "<f8")
        assert np.array_equal(second, model.eigenfaces[:, 1])

    def test_header_fields(self):
        hdr = read_header(dumps(make_model(5, method=Method.npca_method(um=90, ustd=70))))
        assert (hdr["method"], hdr["um"], hdr["ustd"]) == ("npca", 90.0, 70.0)
        assert (hdr["width"], hdr["height"], hdr["D"], hdr["M"]) == (3, 4, 12, 5)


def patched(data, offset, fmt, value):
    out = bytearray(data)
    struct.pack_into(fmt, out, offset, value)
    return bytes(out)


class TestRejections:
    @pytest.fixture
    def data(self):
        return dumps(make_model(6))

    def test_bad_magic(self, data):
        with pytest.raises(ModelFormatError, match="bad magic"):
            loads(b"EIGX" + data[4:])

    def test_version(self, data):
        with pytest.raises(ModelFormatError, match="unsupported version 2"):
            loads(patched(data, 4, "<H", 2))

    @pytest.mark.parametrize("cut", [1, 8, 200])
    def test_truncated(self, data, cut):
        with pytest.raises(ModelFormatError, match="truncated"):
            loads(data[:-cut])

    def test_short_header(self, data):
        with pytest.raises(ModelFormatError, match="truncated"):
            loads(data[:40])

    def test_trailing(self, data):
        with pytest.raises(ModelFormatError, match="size mismatch"):
            loads(data + b"\x00")

    def test_unknown_method(self, data):
        with pytest.raises(ModelFormatError, match="method"):
            loads(patched(data, 6, "<B", 7))

    def test_dimension_product(self, data):
        with pytest.raises(ModelFormatError, match="invariant"):
            loads(patched(data, 24, "<I", 5))

    def test_reserved(self, data):
        with pytest.raises(ModelFormatError, match="invariant"):
            loads(patched(data, 44, "<I", 1))

    def test_pca_with_params(self, data):
        with pytest.raises(ModelFormatError, match="invariant"):
            loads(patched(data, 8, "<d", 100.0))

    def test_non_orthonormal(self, data):
        d = 12
        with pytest.raises(ModelFormatError, match="invariant"):
            loads(patched(data, HEADER_SIZE + 8 * (d + 4), "<d", 3.0))

    def test_negative_theta(self, data):
        with pytest.raises(ModelFormatError, match="invariant"):
            loads(patched(data, 56, "<d", -1.0))

    def test_bad_utf8(self):
        with pytest.raises(ModelFormatError, match="UTF-8"):
            loads(minimal_file(b"\xff"))

    def test_nan_mean(self):
        with pytest.raises(ModelFormatError, match="invariant"):
            loads(patched(minimal_file(), 64, "<d", float("nan")))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 8), st.integers(1, 5), st.integers(1, 5),
       st.booleans())
def test_roundtrip_property(seed, m, w, h, npca):
    if w * h < 2:
        w = 2
    model = make_model(seed, m=m, width=w, height=h,
                       method=Method.npca_method() if npca else Method.pca())
    assert models_equal(loads(dumps(model)), model)
