"""Configuration loading: defaults, file values, env and flag precedence."""

import pytest

from searchlight.config import (
    ConfigError,
    EngineConfig,
    config_snapshot,
    load_config,
    with_artifacts,
)


def test_defaults_without_file():
    cfg = load_config(None, env={})
    assert cfg.retrieval.k1 == 0.9
    assert cfg.retrieval.b == 0.4
    assert cfg.retrieval.k_documents == 1000
    assert cfg.retrieval.k_passages == 100
    assert cfg.passage_length == 100
    assert cfg.histogram.num_bins == 30
    assert cfg.histogram.mode == "logcount"
    assert cfg.gating == "embedding"
    assert cfg.embeddings.dim == 300
    assert cfg.embeddings.oov_seed == 42
    assert cfg.training.batch_size == 32
    assert cfg.training.n_neg == 4
    assert cfg.training.max_epochs == 50
    assert cfg.training.patience == 5
    assert cfg.service.port == 8080
    assert cfg.service.page_size == 5
    assert cfg.service.default_mode == "explainable"
    assert cfg.service.serve_text is False


def test_file_values_override_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "retrieval:\n  k1: 1.2\n  b: 0.75\n"
        "histogram:\n  num_bins: 20\n  mode: count\n"
        "gating: idf\n"
        "service:\n  port: 9000\n"
    )
    cfg = load_config(str(path), env={})
    assert cfg.retrieval.k1 == 1.2
    assert cfg.retrieval.b == 0.75
    assert cfg.histogram.num_bins == 20
    assert cfg.histogram.mode == "count"
    assert cfg.gating == "idf"
    assert cfg.service.port == 9000
    # untouched values keep their defaults
    assert cfg.retrieval.k_documents == 1000


def test_env_overrides_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("artifacts:\n  index: /from/file\nservice:\n  port: 9000\n")
    cfg = load_config(
        str(path),
        env={"SEARCHLIGHT_INDEX": "/from/env", "SEARCHLIGHT_PORT": "7777"},
    )
    assert cfg.artifacts.index == "/from/env"
    assert cfg.service.port == 7777  # coerced to int


def test_explicit_overrides_beat_env(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("artifacts:\n  index: /from/file\n")
    cfg = load_config(
        str(path),
        overrides={"artifacts.index": "/from/flag"},
        env={"SEARCHLIGHT_INDEX": "/from/env"},
    )
    assert cfg.artifacts.index == "/from/flag"


def test_unknown_top_level_key_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("retreival:\n  k1: 0.9\n")
    with pytest.raises(ConfigError, match="retreival"):
        load_config(str(path), env={})


def test_unknown_section_key_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("retrieval:\n  k_1: 0.9\n")
    with pytest.raises(ConfigError, match="k_1"):
        load_config(str(path), env={})


def test_invalid_values_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("histogram:\n  mode: exotic\n")
    with pytest.raises(ConfigError):
        load_config(str(path), env={})
    path.write_text("service:\n  default_mode: loud\n")
    with pytest.raises(ConfigError):
        load_config(str(path), env={})
    path.write_text("retrieval:\n  b: 7\n")
    with pytest.raises(ConfigError):
        load_config(str(path), env={})


def test_non_mapping_root_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("- just\n- a\n- list\n")
    with pytest.raises(ConfigError):
        load_config(str(path), env={})


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("")
    cfg = load_config(str(path), env={})
    assert cfg == load_config(None, env={})


def test_retrieval_section_builds_stage_configs():
    cfg = load_config(None, env={})
    doc_cfg = cfg.retrieval.config(passages=False)
    passage_cfg = cfg.retrieval.config(passages=True)
    assert doc_cfg.k == 1000
    assert passage_cfg.k == 100
    assert doc_cfg.k1 == passage_cfg.k1 == 0.9


def test_cors_origins_tuple(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text('service:\n  cors_origins:\n    - "http://localhost:5173"\n')
    cfg = load_config(str(path), env={})
    assert cfg.service.cors_origins == ("http://localhost:5173",)


def test_config_snapshot_round_trips_to_plain_dicts():
    cfg = load_config(None, env={})
    snap = config_snapshot(cfg)
    assert snap["retrieval"]["k1"] == 0.9
    assert snap["service"]["cors_origins"] == ["*"]
    assert isinstance(snap["training"]["seed"], int)


def test_with_artifacts_replaces_paths():
    cfg = load_config(None, env={})
    updated = with_artifacts(cfg, index="/idx", model="/model")
    assert updated.artifacts.index == "/idx"
    assert updated.artifacts.model == "/model"
    assert updated.artifacts.store is None
    assert cfg.artifacts.index is None  # original untouched


def test_engine_config_validation_direct():
    with pytest.raises(ValueError):
        EngineConfig(passage_length=0)
    with pytest.raises(ValueError):
        EngineConfig(gating="mystery")
