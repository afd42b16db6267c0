from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Optional, Union

from pydantic import BaseModel, BeforeValidator, Field, PlainSerializer, ValidationError, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from services.errors import ConfigError


def _parse_fraction(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ValueError("a boolean is not a number")
    if isinstance(value, (Fraction, int, float)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"cannot read {value!r} as an exact fraction")


def _parse_auto(value: Any) -> Any:
    if value is None or (isinstance(value, str) and value.strip().lower() == "auto"):
        return None
    return value


ExactFraction = Annotated[
    Fraction,
    BeforeValidator(_parse_fraction),
    PlainSerializer(lambda q: str(q), return_type=str),
]
AutoFloat = Annotated[Optional[float], BeforeValidator(_parse_auto)]


class ModelSection(BaseModel):
    a: ExactFraction = Fraction(3, 4)
    b: ExactFraction = Fraction(9, 20)


class ManifoldSection(BaseModel):
    K: int = Field(default=25, ge=2)
    nu: ExactFraction = Fraction(17, 16)
    scale_u: AutoFloat = None
    scale_s: AutoFloat = None
    R_factor: float = Field(default=10.0, gt=0)
    decay_target: float = Field(default=1e-12, gt=0)
    newton_tol: float = Field(default=1e-12, gt=0)
    workers: int = Field(default=2, ge=1)
    z_target: float = Field(default=0.75, gt=0, lt=1)
    scale_shrink: float = Field(default=0.8, gt=0, lt=1)
    tune_attempts: int = Field(default=8, ge=1)

    @field_validator("nu")
    @classmethod
    def nu_above_one(cls, v: Fraction) -> Fraction:
        if v <= 1:
            raise ValueError("manifold.nu must exceed 1")
        return v


class OrbitSection(BaseModel):
    K: int = Field(default=120, ge=2)
    mu: ExactFraction = Fraction(21, 20)
    tau: AutoFloat = None
    alpha0: AutoFloat = None
    R_factor: float = Field(default=10.0, gt=0)
    newton_tol: float = Field(default=1e-11, gt=0)
    theta_max: float = Field(default=0.9, gt=0, lt=1)
    theta_target: float = Field(default=0.5, gt=0, lt=1)
    entry_radius: float = Field(default=0.1, gt=0)
    alpha_grid: int = Field(default=64, ge=4)
    t_max: float = Field(default=60.0, gt=0)
    near_radius: float = Field(default=0.05, gt=0)
    exit_radius: float = Field(default=0.5, gt=0)
    rk4_steps: int = Field(default=4096, ge=16)
    max_K: int = Field(default=200, ge=2)
    fit_tol: float = Field(default=1e-6, gt=0)

    @field_validator("mu")
    @classmethod
    def mu_at_least_one(cls, v: Fraction) -> Fraction:
        if v < 1:
            raise ValueError("orbit.mu must be at least 1")
        return v

    @field_validator("tau")
    @classmethod
    def tau_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v <= 0:
            raise ValueError("orbit.tau must be positive")
        return v


class NewtonSection(BaseModel):
    tol: float = Field(default=1e-14, gt=0)
    max_iter: int = Field(default=20, ge=1)


class RpaSection(BaseModel):
    report_uniqueness_radius: bool = False


class OutputSection(BaseModel):
    out_dir: str = "proofs"
    report_name: str = "report.json"
    backend: str = "filesystem"
    n_plot: int = Field(default=1000, ge=2)


class PipelineConfig(BaseSettings):
    """
    Proof pipeline configuration.

    Values are read, highest precedence first, from constructor arguments,
    environment variables, a .env file, the TOML file given with --config,
    and the defaults below. Environment variable names carry the
    HETEROPROOF_ prefix and use a double underscore between section and
    field (case-insensitive).

    Example overrides:
    - HETEROPROOF_MANIFOLD__NU="9/8"
    - HETEROPROOF_ORBIT__TAU=7.5
    - HETEROPROOF_OUTPUT__OUT_DIR="/data/proofs"

    Fractions are written as strings ("17/16"); "auto" for a scale, tau or
    alpha0 means the value is resolved by `tune`.
    """

    model: ModelSection = ModelSection()
    manifold: ManifoldSection = ManifoldSection()
    orbit: OrbitSection = OrbitSection()
    newton: NewtonSection = NewtonSection()
    rpa: RpaSection = RpaSection()
    output: OutputSection = OutputSection()

    model_config = SettingsConfigDict(
        env_prefix="HETEROPROOF_",
        env_nested_delimiter="__",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        sources: list[PydanticBaseSettingsSource] = [init_settings, env_settings, dotenv_settings]
        if settings_cls.model_config.get("toml_file"):
            sources.append(TomlConfigSettingsSource(settings_cls))
        return tuple(sources)

    @property
    def is_resolved(self) -> bool:
        """True when no tunable value is left on "auto"."""
        return None not in (self.manifold.scale_u, self.manifold.scale_s, self.orbit.tau, self.orbit.alpha0)

    def snapshot(self) -> dict:
        return self.model_dump(mode="json")


def get_settings(config_path: Union[str, Path, None] = None, **overrides: Any) -> PipelineConfig:
    """Build a validated configuration, optionally layered over a TOML file"""
    settings_cls: type[PipelineConfig] = PipelineConfig
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        settings_cls = type(
            "FilePipelineConfig",
            (PipelineConfig,),
            {"model_config": SettingsConfigDict(**{**PipelineConfig.model_config, "toml_file": path})},
        )
    try:
        return settings_cls(**overrides)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    except ValueError as exc:
        # malformed TOML
        raise ConfigError(f"cannot read configuration: {exc}") from exc


def _toml_value(value: Any) -> str:
    if value is None:
        return '"auto"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_config(config: PipelineConfig, path: Union[str, Path]) -> Path:
    """Write the resolved configuration as flat dotted TOML keys"""
    lines = ["# resolved heteroproof configuration"]
    for section, values in config.snapshot().items():
        for key, value in values.items():
            lines.append(f"{section}.{key} = {_toml_value(value)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path
