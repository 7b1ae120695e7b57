"""Configuration parsing, defaults, validation, overrides."""
from __future__ import annotations

import pytest

from mswjoin import EquiPredicate, ExperimentConfig, load_config, parse_kv
from mswjoin.config import config_from_kv


def test_parse_kv_comments_and_blanks():
    text = """
    # a comment line
    mode = quality
    gamma=0.95   # trailing comment

    windows_ms=100,200
    """
    assert parse_kv(text) == {"mode": "quality", "gamma": "0.95",
                              "windows_ms": "100,200"}


def test_parse_kv_rejects_bare_words():
    with pytest.raises(ValueError, match="line 2"):
        parse_kv("a=1\nnonsense\n")


def test_defaults_and_typed_fields():
    cfg = config_from_kv({})
    assert cfg.mode == "quality"
    assert cfg.gamma == 0.95
    assert (cfg.period_ms, cfg.interval_ms) == (60_000, 1_000)
    assert (cfg.b_ms, cfg.g_ms) == (10, 10)
    assert cfg.strategy == "noneqsel"
    assert cfg.windows_ms == (100, 100)
    assert cfg.m == 2
    assert cfg.predicate == "cross"
    assert cfg.seed == 0

    cfg = config_from_kv({"mode": "max", "gamma": "0.9", "seed": "5",
                          "windows_ms": "50,60,70",
                          "predicate": "equi:1.v=2.v",
                          "strategy": "EqSel", "trace": "t.tsv"})
    assert cfg.mode == "max" and cfg.seed == 5
    assert cfg.windows_ms == (50, 60, 70) and cfg.m == 3
    assert cfg.strategy == "eqsel"
    assert cfg.trace_path == "t.tsv"
    assert isinstance(cfg.parsed_predicate(), EquiPredicate)


def test_unknown_keys_are_rejected():
    with pytest.raises(ValueError, match="unknown config keys"):
        config_from_kv({"gama": "0.9"})


def test_validate_lists_every_problem():
    cfg = ExperimentConfig(mode="turbo", gamma=1.5, period_ms=2_500,
                           interval_ms=1_000, b_ms=15, g_ms=10,
                           strategy="magic", windows_ms=(100, -1),
                           predicate="equi:1.v")
    with pytest.raises(ValueError) as exc:
        cfg.validate()
    msg = str(exc.value)
    for needle in ("mode", "gamma", "period", "basic window", "windows",
                   "strategy", "exactly one of", "predicate"):
        assert needle in msg


def test_validate_checks_predicate_against_stream_count():
    cfg = ExperimentConfig(windows_ms=(100, 100), predicate="equi:1.v=3.v",
                           trace_path="t.tsv")
    with pytest.raises(ValueError, match="predicate"):
        cfg.validate()


def test_validate_requires_exactly_one_input():
    with pytest.raises(ValueError, match="exactly one"):
        ExperimentConfig().validate()
    with pytest.raises(ValueError, match="exactly one"):
        ExperimentConfig(trace_path="a", gen_spec_path="b").validate()
    ExperimentConfig(trace_path="a").validate()
    ExperimentConfig(gen_spec_path="b").validate()


def test_load_config_applies_overrides(tmp_path):
    p = tmp_path / "run.conf"
    p.write_text("mode=quality\ngamma=0.95\ntrace=x.tsv\nwindows_ms=80,80\n",
                 encoding="utf-8")
    cfg = load_config(str(p))
    assert cfg.gamma == 0.95 and cfg.windows_ms == (80, 80)
    cfg = load_config(str(p), {"gamma": 0.99, "seed": None})
    assert cfg.gamma == 0.99
    assert cfg.seed == 0                     # None overrides are skipped


def test_load_config_validates(tmp_path):
    p = tmp_path / "bad.conf"
    p.write_text("gamma=2.0\ntrace=x.tsv\n", encoding="utf-8")
    with pytest.raises(ValueError, match="gamma"):
        load_config(str(p))
