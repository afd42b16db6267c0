"""
Tests for configuration loading: defaults, TOML files, environment overrides
and the resolved-configuration writer.
"""

import os
from fractions import Fraction

import pytest

from dependencies.config import PipelineConfig, get_settings, write_config
from services.errors import ConfigError


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Keep a stray .env file or HETEROPROOF_ variable out of these tests."""
    monkeypatch.chdir(tmp_path)
    for key in [k for k in os.environ if k.upper().startswith("HETEROPROOF_")]:
        monkeypatch.delenv(key)


def write_toml(path, text: str):
    path.write_text(text)
    return path


@pytest.mark.unit
class TestDefaults:
    """Values used when nothing is configured."""

    def test_defaults(self):
        """Default parameters, truncations and weights."""
        config = get_settings()
        assert config.model.a == Fraction(3, 4)
        assert config.model.b == Fraction(9, 20)
        assert config.manifold.K == 25
        assert config.manifold.nu == Fraction(17, 16)
        assert config.orbit.K == 120
        assert config.orbit.mu == Fraction(21, 20)
        assert config.newton.tol == 1e-14
        assert config.output.report_name == "report.json"

    def test_auto_values(self):
        """Scales, tau and alpha0 start on "auto"."""
        config = get_settings()
        assert config.manifold.scale_u is None
        assert config.orbit.tau is None
        assert not config.is_resolved
        resolved = get_settings(manifold={"scale_u": 0.3, "scale_s": 0.2}, orbit={"tau": 6.0, "alpha0": 1.0})
        assert resolved.is_resolved

    def test_snapshot_keeps_fractions_exact(self):
        """Fractions are serialised as strings."""
        snapshot = get_settings().snapshot()
        assert snapshot["manifold"]["nu"] == "17/16"
        assert snapshot["orbit"]["tau"] is None


@pytest.mark.unit
class TestConfigFile:
    """Flat dotted-key TOML files."""

    def test_values_from_file(self, tmp_path):
        """Fractions, floats and "auto" are read from the file."""
        path = write_toml(
            tmp_path / "proof.toml",
            'manifold.nu = "9/8"\nmanifold.K = 30\norbit.tau = 7.5\norbit.alpha0 = "auto"\n',
        )
        config = get_settings(path)
        assert config.manifold.nu == Fraction(9, 8)
        assert config.manifold.K == 30
        assert config.orbit.tau == 7.5
        assert config.orbit.alpha0 is None
        assert config.orbit.K == 120

    def test_missing_file(self, tmp_path):
        """A missing file is a configuration error."""
        with pytest.raises(ConfigError) as excinfo:
            get_settings(tmp_path / "nope.toml")
        assert excinfo.value.exit_code == 2

    @pytest.mark.parametrize(
        "text",
        [
            'manifold.nu = "1/2"\n',
            "orbit.tau = -1.0\n",
            'model.a = "three quarters"\n',
            "orbit.theta_max = 1.5\n",
            "manifold.K = = 3\n",
        ],
    )
    def test_invalid_files(self, tmp_path, text):
        """Out-of-range values and malformed TOML are refused."""
        with pytest.raises(ConfigError):
            get_settings(write_toml(tmp_path / "bad.toml", text))

    def test_boolean_is_not_a_fraction(self):
        """true is not read as 1."""
        with pytest.raises(ConfigError):
            get_settings(model={"a": True})


@pytest.mark.unit
class TestEnvironmentOverrides:
    """HETEROPROOF_ variables with a double-underscore section delimiter."""

    def test_environment_values(self, monkeypatch):
        """Nested fields are set from the environment."""
        monkeypatch.setenv("HETEROPROOF_ORBIT__TAU", "7.5")
        monkeypatch.setenv("HETEROPROOF_MANIFOLD__NU", "9/8")
        monkeypatch.setenv("HETEROPROOF_OUTPUT__OUT_DIR", "/data/proofs")
        config = get_settings()
        assert config.orbit.tau == 7.5
        assert config.manifold.nu == Fraction(9, 8)
        assert config.output.out_dir == "/data/proofs"
        assert config.orbit.K == 120

    def test_environment_beats_file(self, monkeypatch, tmp_path):
        """Environment variables take precedence over the TOML file."""
        path = write_toml(tmp_path / "proof.toml", "orbit.tau = 3.0\norbit.K = 90\n")
        monkeypatch.setenv("HETEROPROOF_ORBIT__TAU", "7.5")
        config = get_settings(path)
        assert config.orbit.tau == 7.5
        assert config.orbit.K == 90

    def test_arguments_beat_environment(self, monkeypatch):
        """Explicit overrides take precedence over the environment."""
        monkeypatch.setenv("HETEROPROOF_NEWTON__MAX_ITER", "5")
        assert get_settings(newton={"max_iter": 7}).newton.max_iter == 7

    def test_dotenv_file(self, tmp_path):
        """A .env file in the working directory is read."""
        (tmp_path / ".env").write_text("HETEROPROOF_OUTPUT__N_PLOT=321\n")
        assert get_settings().output.n_plot == 321


@pytest.mark.unit
class TestWriteConfig:
    """Resolved configurations written back as TOML."""

    def test_round_trip(self, tmp_path):
        """Written files load back to the same configuration."""
        config = get_settings(manifold={"scale_u": 0.3125, "nu": "9/8"}, orbit={"tau": 6.53125})
        path = write_config(config, tmp_path / "out" / "resolved.toml")
        text = path.read_text()
        assert 'manifold.scale_s = "auto"' in text
        assert 'manifold.nu = "9/8"' in text
        assert "orbit.tau = 6.53125" in text
        assert get_settings(path).snapshot() == config.snapshot()

    def test_quotes_escaped(self, tmp_path):
        """Strings with quotes survive the round trip."""
        config = get_settings(output={"out_dir": 'runs/"quoted"'})
        path = write_config(config, tmp_path / "resolved.toml")
        assert get_settings(path).output.out_dir == 'runs/"quoted"'

    def test_plain_model(self):
        """The settings class validates without any source."""
        assert PipelineConfig().manifold.workers == 2
