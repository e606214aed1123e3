import pytest
from loguru import logger

from cants.config import ColonyConfig, ConfigError, load_config, parse_assignments


def test_defaults_match_published_settings():
    cfg = ColonyConfig()
    assert (cfg.num_ants, cfg.population_size, cfg.epochs, cfg.horizon) == (30, 20, 40, 1)
    assert (cfg.dbscan_eps, cfg.dbscan_min_pts) == (0.05, 2)
    assert (cfg.pheromone_decay, cfg.pheromone_max, cfg.initial_pheromone) == (0.05, 10.0, 1.0)
    assert cfg.levels == 5
    assert cfg.sensing_radius is None and cfg.exploitation is None


def test_missing_num_ants_defaults_with_notice(tmp_path):
    messages = []
    sink = logger.add(messages.append, level="INFO", format="{message}")
    try:
        path = tmp_path / "c.cfg"
        path.write_text("max_lag = 2\n")
        cfg = load_config(path)
    finally:
        logger.remove(sink)
    assert cfg.num_ants == 30 and cfg.max_lag == 2
    assert any("num_ants" in m and "30" in m for m in messages)


def test_file_and_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nnum_ants = 10\nsensing_radius = 0.4  # inline\nexploitation = random\n")
    cfg = load_config(path, ["num_ants=150", "split=0.8,0.1,0.1"])
    assert cfg.num_ants == 150 and cfg.sensing_radius == 0.4 and cfg.exploitation is None
    assert cfg.split == (0.8, 0.1, 0.1)


@pytest.mark.parametrize(
    "line,key",
    [
        ("num_ants = 0", "num_ants"),
        ("num_ants = many", "num_ants"),
        ("sensing_radius = 1.5", "sensing_radius"),
        ("colour = blue", "colour"),
        ("weight_init = orthogonal", "weight_init"),
        ("dbscan_eps = -1", "dbscan_eps"),
    ],
)
def test_errors_name_the_field(line, key):
    with pytest.raises(ConfigError) as err:
        load_config(overrides=[line])
    assert err.value.key == key
    assert key in str(err.value)


def test_malformed_line():
    with pytest.raises(ConfigError):
        parse_assignments(["just words"])


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/cants.cfg")


def test_text_round_trip(tmp_path):
    cfg = ColonyConfig(num_ants=60, sensing_radius=0.3, seed=7)
    path = tmp_path / "c.cfg"
    path.write_text(cfg.to_text())
    assert load_config(path) == cfg
