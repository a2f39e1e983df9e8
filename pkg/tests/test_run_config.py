from pathlib import Path

import pytest
from pydantic import ValidationError

from app.request_models import RunConfig
from app.request_models.run_config import EulerFamilySection, FixtureFamily
from app.utils.error_handlers import ConfigError
from app.utils.validators import format_validation_error
from tests.conftest import write_config

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def first_error(exc_info) -> dict:
    return format_validation_error(exc_info.value)["details"][0]


class TestRunConfigLoading:
    """Unit tests for reading run configs"""

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.toml")), ids=lambda p: p.stem)
    def test_shipped_configs_validate(self, path):
        """Test every shipped config passes validation"""
        config = RunConfig.load(path)
        assert config.analysis.checkpoints[-1] <= config.family_length

    def test_fixture_config(self, alternating_config):
        """Test a fixture config loads into typed sections"""
        config = RunConfig.load(alternating_config)
        assert isinstance(config.family, FixtureFamily)
        assert config.run.seed == 3
        assert config.family_length == 512
        assert config.analysis.weights is None
        assert config.analysis.dictionary.points_per_dim == 3

    def test_euler_config(self, constant_euler_config):
        """Test the kind tag selects the Euler family section"""
        config = RunConfig.load(constant_euler_config)
        assert isinstance(config.family, EulerFamilySection)
        assert config.family.schedule() == [(16, 0.0), (32, 0.0)]
        assert config.analysis.weights[0].kind == "constant"

    def test_missing_file(self, tmp_path):
        """Test an unreadable path raises ConfigError"""
        with pytest.raises(ConfigError, match="cannot read config"):
            RunConfig.load(tmp_path / "absent.toml")

    def test_invalid_toml(self, tmp_path):
        """Test malformed TOML raises ConfigError"""
        path = write_config(tmp_path, "[run\nname = 1\n")
        with pytest.raises(ConfigError, match="not valid TOML"):
            RunConfig.load(path)


class TestRunConfigValidation:
    """Unit tests for schema validation"""

    def test_defaults(self):
        """Test an empty config is the default alternating fixture"""
        config = RunConfig()
        assert config.family.fixture == "alternating"
        assert config.analysis.checkpoints == [64, 128, 256, 512]
        assert config.analysis.tol == 1e-2

    def test_empty_checkpoints_rejected(self):
        """Test an empty schedule names the checkpoints field"""
        with pytest.raises(ValidationError) as exc_info:
            RunConfig.model_validate({"analysis": {"checkpoints": []}})
        error = first_error(exc_info)
        assert error["field"] == "analysis -> checkpoints"
        assert error["message"] == "checkpoint schedule must not be empty"

    def test_empty_dictionary_rejected(self):
        """Test an explicit empty observable list names the dictionary"""
        with pytest.raises(ValidationError) as exc_info:
            RunConfig.model_validate({"analysis": {"dictionary": {"observables": []}}})
        error = first_error(exc_info)
        assert error["field"] == "analysis -> dictionary -> observables"
        assert "at least one observable" in error["message"]

    def test_checkpoint_beyond_family_rejected(self):
        """Test the schedule must fit the family length"""
        with pytest.raises(ValidationError, match="checkpoint = 1024 exceeds"):
            RunConfig.model_validate({"family": {"length": 512}, "analysis": {"checkpoints": [512, 1024]}})

    def test_unknown_key_rejected(self):
        """Test sections forbid unknown keys"""
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"run": {"name": "x", "colour": "blue"}})

    def test_non_positive_tolerance_rejected(self):
        """Test tol must be positive"""
        with pytest.raises(ValidationError, match="tol must be > 0"):
            RunConfig.model_validate({"analysis": {"tol": 0.0}})

    def test_tent_weight_outside_unit_rejected(self):
        """Test a tent weight support must lie inside [0, 1]"""
        with pytest.raises(ValidationError, match="must lie inside"):
            RunConfig.model_validate({"analysis": {"weights": [{"kind": "tent", "center": 0.9, "width": 0.5}]}})

    def test_member_cells_must_refine_analysis_grid(self):
        """Test member cells must be multiples of the analysis cells"""
        with pytest.raises(ValidationError, match="not a multiple"):
            RunConfig.model_validate({
                "family": {"kind": "euler", "member_cells": [32, 48], "analysis_cells": 32},
                "analysis": {"checkpoints": [1, 2]},
            })

    def test_single_entries_broadcast(self):
        """Test one cell count broadcasts against several viscosities"""
        family = EulerFamilySection(member_cells=[64], member_eps=[0.0, 1e-3, 1e-4])
        assert family.member_count == 3
        assert family.schedule() == [(64, 0.0), (64, 1e-3), (64, 1e-4)]

    def test_length_broadcasts_single_member(self):
        """Test length repeats a single (cells, eps) entry"""
        family = EulerFamilySection(member_cells=[32], member_eps=[0.0], length=4)
        assert family.schedule() == [(32, 0.0)] * 4

    def test_mismatched_schedule_lengths_rejected(self):
        """Test member_cells and member_eps of different lengths fail"""
        with pytest.raises(ValidationError, match="equal length"):
            EulerFamilySection(member_cells=[32, 64], member_eps=[0.0, 0.1, 0.2])

    def test_gamma_and_cfl_ranges(self):
        """Test solver parameters are range-checked"""
        with pytest.raises(ValidationError, match="gamma must be > 1"):
            RunConfig.model_validate({"solver": {"gamma": 1.0}})
        with pytest.raises(ValidationError, match="cfl number"):
            RunConfig.model_validate({"solver": {"cfl": 1.0}})


class TestOverrides:
    """Unit tests for CLI flag overrides"""

    def test_overrides_replace_values(self, alternating_config):
        """Test seed, checkpoints and tol overrides"""
        config = RunConfig.load(alternating_config).with_overrides(seed=11, checkpoints=[8, 16], tol=0.5)
        assert config.run.seed == 11
        assert config.analysis.checkpoints == [8, 16]
        assert config.analysis.tol == 0.5

    def test_overrides_are_revalidated(self, alternating_config):
        """Test an override past the family length fails"""
        with pytest.raises(ValidationError, match="exceeds"):
            RunConfig.load(alternating_config).with_overrides(checkpoints=[512, 1024])

    def test_no_overrides_keep_config(self, alternating_config):
        """Test omitted overrides leave the config unchanged"""
        config = RunConfig.load(alternating_config)
        assert config.with_overrides() == config
