import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shipseg.errors import BoundsError, FormatError, OverlapError, ParseError
from shipseg.formats import decode_rle, encode_rle, load_dense_mask_png, save_dense_mask_png
from shipseg.types import DenseMask


def brute_force_fill(rle_text: str, height: int, width: int) -> np.ndarray:
    """Independent oracle: fill pixel by pixel from 1-indexed runs."""
    flat = np.zeros(height * width, dtype=np.uint8)
    tokens = [int(t) for t in rle_text.split()]
    for start, length in zip(tokens[::2], tokens[1::2]):
        for offset in range(length):
            flat[start - 1 + offset] = 1
    return flat.reshape(height, width)


def test_empty_rle_is_all_background():
    mask = decode_rle("", 4, 4)
    assert mask.classes.sum() == 0
    assert mask.classes.shape == (4, 4)


def test_first_row_run():
    mask = decode_rle("1 4", 2, 4)
    assert np.array_equal(mask.classes, brute_force_fill("1 4", 2, 4))
    assert mask.classes[0].tolist() == [1, 1, 1, 1]
    assert mask.classes[1].tolist() == [0, 0, 0, 0]


def test_run_exceeding_raster_is_rejected():
    with pytest.raises(BoundsError):
        decode_rle("1 20", 4, 4)


def test_multiple_runs_match_brute_force():
    text = "2 3 7 1 10 5"
    mask = decode_rle(text, 4, 4)
    assert np.array_equal(mask.classes, brute_force_fill(text, 4, 4))


def test_odd_token_count():
    with pytest.raises(ParseError):
        decode_rle("1 2 3", 4, 4)


def test_non_integer_token():
    with pytest.raises(ParseError):
        decode_rle("1 x", 4, 4)


def test_nonpositive_run():
    with pytest.raises(ParseError):
        decode_rle("0 4", 4, 4)
    with pytest.raises(ParseError):
        decode_rle("1 0", 4, 4)


def test_overlapping_runs():
    with pytest.raises(OverlapError):
        decode_rle("1 4 3 2", 4, 4)


def test_unsorted_runs():
    with pytest.raises(OverlapError):
        decode_rle("9 2 1 2", 4, 4)


@given(
    bits=st.lists(st.booleans(), min_size=12, max_size=48),
)
@settings(max_examples=200)
def test_encode_decode_identity_on_masks(bits):
    # pad to a rectangle
    width = 4
    height = (len(bits) + width - 1) // width
    flat = np.zeros(height * width, dtype=np.uint8)
    flat[: len(bits)] = np.array(bits, dtype=np.uint8)
    mask = DenseMask(flat.reshape(height, width))
    text = encode_rle(mask)
    roundtrip = decode_rle(text, height, width)
    assert np.array_equal(roundtrip.classes, mask.classes)
    # canonical text round-trips byte for byte
    assert encode_rle(roundtrip) == text


def test_decode_then_encode_is_identity_on_canonical_text():
    text = "2 3 7 1 10 5"
    assert encode_rle(decode_rle(text, 4, 4)) == text


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    mask = DenseMask((rng.random((16, 16)) > 0.5).astype(np.uint8))
    path = tmp_path / "mask.png"
    save_dense_mask_png(mask, path)
    loaded = load_dense_mask_png(path)
    assert np.array_equal(loaded.classes, mask.classes)


def test_png_all_zero(tmp_path):
    mask = DenseMask(np.zeros((16, 16), dtype=np.uint8))
    path = tmp_path / "zero.png"
    save_dense_mask_png(mask, path)
    assert load_dense_mask_png(path).classes.sum() == 0


def test_png_intermediate_value_rejected(tmp_path):
    from PIL import Image

    arr = np.zeros((16, 16), dtype=np.uint8)
    arr[3, 4] = 128
    path = tmp_path / "bad.png"
    Image.fromarray(arr, mode="L").save(path)
    with pytest.raises(ValueError, match="128"):
        load_dense_mask_png(path)


def test_png_wrong_mode_rejected(tmp_path):
    from PIL import Image

    arr = np.zeros((16, 16, 3), dtype=np.uint8)
    path = tmp_path / "rgb.png"
    Image.fromarray(arr, mode="RGB").save(path)
    with pytest.raises(FormatError):
        load_dense_mask_png(path)


def test_png_16bit_rejected(tmp_path):
    from PIL import Image

    arr = np.zeros((16, 16), dtype=np.uint16)
    path = tmp_path / "deep.png"
    Image.fromarray(arr).save(path)
    with pytest.raises(FormatError):
        load_dense_mask_png(path)
