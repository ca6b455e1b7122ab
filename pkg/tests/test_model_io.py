import numpy as np
import pytest

from passgraph.model.model_io import load_model, save_model
from passgraph.model.mpnn import MpnnConfig, MpnnModel
from passgraph.utils.errors import ChecksumFailure, ShapeMismatch, VersionMismatch


@pytest.fixture
def model():
    return MpnnModel(MpnnConfig(hidden_dim=8, num_layers=2, seed=7))


def test_round_trip_is_bit_exact(tmp_path, model):
    path = save_model(model, tmp_path / "model.pgm")
    loaded = load_model(path, expected=model.config)
    assert loaded.config == model.config
    assert list(loaded.params) == list(model.params)
    for name, value in model.params.items():
        assert loaded.params[name].tobytes() == value.tobytes()


def test_corrupted_byte_fails_checksum(tmp_path, model):
    path = save_model(model, tmp_path / "model.pgm")
    raw = bytearray(path.read_bytes())
    raw[len(raw) // 2] ^= 0x01
    path.write_bytes(bytes(raw))
    with pytest.raises(ChecksumFailure):
        load_model(path)


def test_not_a_model_file(tmp_path):
    path = tmp_path / "junk.pgm"
    path.write_bytes(b"hello")
    with pytest.raises(ChecksumFailure):
        load_model(path)


def test_hidden_dim_mismatch(tmp_path, model):
    path = save_model(model, tmp_path / "model.pgm")
    with pytest.raises(ShapeMismatch, match="hidden_dim"):
        load_model(path, expected=MpnnConfig(hidden_dim=16, num_layers=2))


def test_wrong_format_tag(tmp_path):
    from passgraph.model.model_io import load_params, save_params

    path = save_params(tmp_path / "x.pgm", "logreg", {}, {"w": np.zeros(3)})
    with pytest.raises(VersionMismatch):
        load_params(path, "mpnn")
