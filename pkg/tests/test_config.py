import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparsegenre.config import RunConfig, emit_config, load_config, parse_config_text, snapshot_hash
from sparsegenre.errors import ConfigError

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
name = st.text(st.characters(whitelist_categories=("L", "N"), whitelist_characters="_-./"), min_size=1, max_size=12)

configs = st.builds(
    RunConfig,
    window_len_s=st.floats(0.01, 1.0),
    hop_fraction=st.floats(0.05, 1.0),
    second_fft_len=st.sampled_from([256, 512, 1024, 2048]),
    keep_k=st.integers(1, 128),
    drop_dc=st.booleans(),
    m=st.integers(1, 100),
    tol=finite,
    lam=st.floats(1e-8, 10.0),
    seed=st.integers(0, 2**32),
    sizes=st.lists(st.integers(1, 200), min_size=1, max_size=6),
    snr_list=st.lists(finite, min_size=1, max_size=6),
    solver=st.sampled_from(["omp", "ista"]),
    dataset=st.none() | name,
)


@given(configs)
def test_emit_parse_roundtrip(cfg):
    assert RunConfig().replace(**parse_config_text(emit_config(cfg))) == cfg


def test_precedence(tmp_path):
    (tmp_path / "run.cfg").write_text("# comment\nm = 20\nseed = 3\nsizes = 1, 5, 10\n")
    cfg = load_config(tmp_path / "run.cfg")
    assert (cfg.m, cfg.seed, cfg.sizes, cfg.keep_k) == (20, 3, [1, 5, 10], 64)
    assert cfg.replace(m=40).m == 40


def test_unknown_key():
    with pytest.raises(ConfigError, match="nonsense"):
        parse_config_text("nonsense = 1\n")


@pytest.mark.parametrize("text", ["m = many\n", "drop_dc = maybe\n", "just words\n"])
def test_bad_values(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_snapshot_hash_is_order_free():
    assert snapshot_hash({"a": 1, "b": [1, 2]}) == snapshot_hash({"b": [1, 2], "a": 1})
    assert snapshot_hash({"a": 1}) != snapshot_hash({"a": 2})


def test_derived_configs():
    cfg = RunConfig(keep_k=32, m=20, solver="ista")
    assert cfg.feature_config().keep_k == 32
    assert cfg.classifier_config().m == 20
    assert cfg.classifier_config().solver == "ista"
