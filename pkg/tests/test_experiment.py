import pytest

from harness.experiment import ExperimentConfig, default_config, dump_config, load_config, parse_config
from mgcp.fractional_variants import VariantKind
from utils.error_handler import DomainError, MissingFieldError, NegativeRateError, ShapeError, ValidationError


def test_minimal_config_is_accepted(minimal_config):
    cfg = parse_config(minimal_config)
    assert cfg.variant is VariantKind.BASE
    assert cfg.replicates == 100_000
    assert cfg.time_point().t == (1.0,)
    assert cfg.orders().alpha == (1.0,)


@pytest.mark.parametrize("field", ["k", "d", "rates", "variant", "t"])
def test_missing_field(minimal_config, field):
    del minimal_config[field]
    with pytest.raises(MissingFieldError) as info:
        parse_config(minimal_config)
    assert info.value.field == field


def test_alpha_out_of_domain(minimal_config):
    minimal_config["alpha"] = [1.5]
    with pytest.raises(DomainError):
        parse_config(minimal_config)


def test_rates_shape_mismatch():
    data = {"k": 2, "d": 2, "rates": [[1, 2, 3], [1, 2, 3]], "variant": "base", "t": [1, 1]}
    with pytest.raises(ShapeError):
        parse_config(data)


def test_negative_rate(minimal_config):
    minimal_config["rates"] = [[-1.0]]
    with pytest.raises(NegativeRateError):
        parse_config(minimal_config)


def test_multivariate_needs_scalar_time(minimal_config):
    minimal_config["variant"] = "time-mv"
    with pytest.raises(ShapeError):
        parse_config(minimal_config)
    minimal_config["t"] = 0.5
    assert parse_config(minimal_config).variant_time() == 0.5


def test_unknown_key(minimal_config):
    minimal_config["colour"] = "blue"
    with pytest.raises(ValidationError):
        parse_config(minimal_config)


def test_not_an_object():
    with pytest.raises(ValidationError):
        parse_config([1, 2])


def test_load_and_round_trip(config_file, tmp_path):
    data = {"k": 2, "d": 2, "rates": [[1.0, 2.0], [3.0, 4.0]], "variant": "space", "t": [0.5, 0.7],
            "alpha": [0.5, 0.8], "seed": 7, "tolerances": {"pgf": 1e-8}}
    cfg = load_config(config_file(data))
    assert cfg.variant is VariantKind.SPACE_MULTIPARAMETER
    assert cfg.tolerance("pgf", 1.0) == 1e-8
    assert cfg.tolerance("reductions", 1e-9) == 1e-9
    again = tmp_path / "again.json"
    again.write_text(dump_config(cfg), encoding="utf-8")
    reloaded = load_config(again)
    assert reloaded == cfg
    assert dump_config(reloaded) == dump_config(cfg)


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        load_config(tmp_path / "absent.json")


def test_overrides_are_validated():
    cfg = default_config().with_overrides(seed=9, replicates=10)
    assert (cfg.seed, cfg.replicates) == (9, 10)
    with pytest.raises(DomainError):
        default_config().with_overrides(replicates=0)


def test_integral_spec_defaults():
    cfg = ExperimentConfig(k=1, d=2, rates=[[1.0, 1.0]], variant="base", t=[1.0, 2.0], integral_alpha=[0.5, 1.0])
    spec = cfg.integral_spec()
    assert spec.orders == (0.5, 1.0)
    assert spec.t == (1.0, 2.0)
