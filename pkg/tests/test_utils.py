import yaml

from passgraph.utils.common_utils import config_hash, derived_rng, dump_json, make_run_dir, openfile
from passgraph.utils.errors import ConfigError, MalformedLine, PassGraphError, TooManyErrors


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_derived_rng_streams():
    assert derived_rng(3, 1).random() == derived_rng(3, 1).random()
    assert derived_rng(3, 1).random() != derived_rng(3, 2).random()


def test_run_dirs_are_unique(tmp_path):
    config = {"model": {"hidden_dim": 8}}
    first = make_run_dir(tmp_path, "train", config)
    second = make_run_dir(tmp_path, "train", config)
    assert first != second
    assert first.name.startswith("train-")
    assert yaml.safe_load((first / "resolved_config.yaml").read_text()) == config


def test_json_helpers(tmp_path):
    path = dump_json({"b": 1, "a": [1, 2]}, tmp_path / "x" / "out.json")
    assert openfile(path) == {"a": [1, 2], "b": 1}
    (tmp_path / "bad.json").write_text("{not json")
    assert openfile(tmp_path / "bad.json") is None


def test_error_categories():
    assert ConfigError("model.hidden_dim", "must be >= 1").exit_code == 2
    assert str(ConfigError("a.b", "bad")) == "a.b: bad"
    errors = [MalformedLine(4, "oops")]
    e = TooManyErrors(errors, 10)
    assert isinstance(e, PassGraphError) and e.exit_code == 3
    assert e.errors == errors and "line 4" in str(e)
