import pytest

from mtjsc.config import ConfigError, load_config, parse_number, parse_text
from mtjsc.rng import DEFAULT_SEED


def write(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return p


def test_empty_file_gives_defaults(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    m, s, c = cfg.mtj, cfg.sensor, cfg.converter
    assert (s.v_dd, s.i_d0, s.n, s.temperature) == (1.2, 0.1e-9, 2.0, 300.0)
    assert (m.i_c0s, m.r_p, m.r_ap, m.e_over_kbt, m.tau_relax) == (200e-6, 1e3, 3e3, 60.0, 500e-12)
    assert c.v_bias == 0.4
    assert c.t_write == pytest.approx(4.8328e-9, rel=1e-4)
    assert cfg.seed == DEFAULT_SEED and cfg.variability is None


def test_single_override(tmp_path):
    cfg = load_config(write(tmp_path, "mtj.i_c0s = 100e-6\n"))
    assert cfg.mtj.i_c0s == 100e-6
    assert cfg.mtj.r_p == 1e3 and cfg.sensor.v_dd == 1.2


def test_sections_suffixes_comments(tmp_path):
    text = """
    seed = 42
    # device
    [mtj]
    r_p = 1.5k   # ohm
    r_ap = 4k
    [converter]
    t_write = 4.73n
    variability.delta_r = 100
    """
    cfg = load_config(write(tmp_path, text))
    assert cfg.mtj.r_p == 1500 and cfg.converter.t_write == pytest.approx(4.73e-9)
    assert cfg.seed == 42 and cfg.variability.delta_r == 100


def test_invariant_violation_named(tmp_path):
    with pytest.raises(ConfigError, match="r_ap must exceed"):
        load_config(write(tmp_path, "mtj.r_ap = 500\n"))


def test_problems_listed_exhaustively(tmp_path):
    text = "mtj.r_ap = 500\nsensor.n = 9\nsensor.temperature = 310\nmtj.bogus = 1\nnot a line\n"
    with pytest.raises(ConfigError) as ei:
        load_config(write(tmp_path, text))
    msgs = "\n".join(ei.value.problems)
    assert "run.cfg:4" in msgs and "bogus" in msgs
    assert "run.cfg:5" in msgs


def test_semantic_problems_all_reported(tmp_path):
    with pytest.raises(ConfigError) as ei:
        load_config(write(tmp_path, "mtj.r_ap = 500\nsensor.n = 9\n"))
    assert len(ei.value.problems) == 2


def test_temperature_mismatch(tmp_path):
    with pytest.raises(ConfigError, match="temperature"):
        load_config(write(tmp_path, "mtj.temperature = 310\n"))
    cfg = load_config(write(tmp_path, "temperature = 310\n"))
    assert cfg.mtj.temperature == cfg.sensor.temperature == 310


def test_bad_number_line(tmp_path):
    with pytest.raises(ConfigError, match=r"run.cfg:2: field 'mtj.r_p'"):
        load_config(write(tmp_path, "seed = 1\nmtj.r_p = 1 kOhm\n"))


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MTJSC_OUTPUT_DIR", str(tmp_path / "o"))
    assert load_config(None).output_dir == tmp_path / "o"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")


@pytest.mark.parametrize("text, value", [
    ("200e-6", 200e-6), ("200u", 200e-6), ("4.83n", 4.83e-9), ("1k", 1e3),
    ("-3", -3.0), (".5m", 0.5e-3), ("2M", 2e6),
])
def test_parse_number(text, value):
    assert parse_number(text) == pytest.approx(value)


def test_large_seed_exact():
    assert parse_text("seed = 18446744073709551615")[""]["seed"] == 2**64 - 1
