"""Unit tests for configuration module."""

from unittest.mock import MagicMock, patch

import pytest
from pydantic import ValidationError

from app.config import Settings, get_settings, validate_configuration


class TestSettings:
    """Test Settings model."""

    def test_settings_default_values(self):
        """Test that Settings has expected default values."""
        with patch.dict("os.environ", {}, clear=True):
            settings = Settings()

            assert settings.app_name == "pFedGame Simulator"
            assert settings.app_version == "0.1.0"
            assert settings.environment == "development"
            assert settings.log_level == "INFO"
            assert settings.workers == 1
            assert settings.output_root == "out"

    def test_settings_from_environment(self):
        """Test that Settings reads from environment variables."""
        env_vars = {
            "APP_NAME": "Test Simulator",
            "ENVIRONMENT": "production",
            "PFEDGAME_LOG": "debug",
            "PFEDGAME_WORKERS": "4",
            "PFEDGAME_OUTPUT_ROOT": "/tmp/runs",
        }

        with patch.dict("os.environ", env_vars, clear=True):
            settings = Settings()

            assert settings.app_name == "Test Simulator"
            assert settings.environment == "production"
            assert settings.log_level == "DEBUG"
            assert settings.workers == 4
            assert settings.output_root == "/tmp/runs"

    def test_log_level_fallback_variable(self):
        with patch.dict("os.environ", {"PFEDGAME_LOG_LEVEL": "warning"}, clear=True):
            assert Settings().log_level == "WARNING"

    def test_settings_validation_environment(self):
        """Test environment validation."""
        with patch.dict("os.environ", {"ENVIRONMENT": "invalid"}, clear=True):
            with pytest.raises(ValidationError):
                Settings()

    def test_settings_validation_log_level(self):
        """Test log level validation."""
        with patch.dict("os.environ", {"PFEDGAME_LOG": "LOUD"}, clear=True):
            with pytest.raises(ValidationError):
                Settings()

    def test_settings_validation_workers(self):
        with patch.dict("os.environ", {"PFEDGAME_WORKERS": "0"}, clear=True):
            with pytest.raises(ValidationError):
                Settings()

    def test_settings_model_config(self):
        """Test Settings model configuration."""
        settings = Settings()

        assert settings.model_config["env_file"] == ".env.local"
        assert settings.model_config["env_file_encoding"] == "utf-8"
        assert settings.model_config["case_sensitive"] is False
        assert settings.model_config["extra"] == "ignore"


class TestGetSettings:
    """Test get_settings function."""

    def test_get_settings_returns_settings_instance(self):
        assert isinstance(get_settings(), Settings)

    def test_get_settings_caching(self):
        """Test that get_settings caches the result."""
        assert get_settings() is get_settings()


class TestValidateConfiguration:
    """Test validate_configuration function."""

    def test_validate_configuration_success(self):
        with patch("app.config.get_settings") as mock_get_settings:
            mock_get_settings.return_value = MagicMock(
                environment="test", log_level="INFO", workers=1
            )
            assert validate_configuration() is True

    def test_validate_configuration_failure_is_logged(self, caplog):
        with patch("app.config.get_settings", side_effect=ValueError("broken env")):
            assert validate_configuration() is False
        assert "broken env" in caplog.text

    def test_validate_configuration_invalid_environment(self):
        with patch.dict("os.environ", {"ENVIRONMENT": "staging"}, clear=True):
            assert validate_configuration() is False
