"""Run configuration files (YAML)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .groups import FinitePair, GroupPair, ModularPair

DATA_DIR = Path(__file__).parent / "data"
SHIPPED = ("s3_c2", "s4_s3", "modular_p2", "modular_p3", "modular_p5")
FORMATS = ("json", "text")


class ConfigError(ValueError):
    pass


def pair_from_dict(data: Mapping[str, Any]) -> GroupPair:
    backend = data.get("backend")
    if backend == "finite":
        try:
            return FinitePair(int(data["degree"]), list(data["generators"]),
                              list(data["gamma_generators"]),
                              max_order=int(data.get("max_order", 20_000)),
                              name=data.get("name"))
        except KeyError as exc:
            raise ConfigError(f"finite pair is missing field {exc.args[0]!r}") from exc
    if backend == "modular":
        if "p" not in data:
            raise ConfigError("modular pair needs an integer field 'p'")
        return ModularPair(int(data["p"]))
    raise ConfigError(f"unknown backend {backend!r}")


@dataclass
class RunConfig:
    pair: dict
    pi: str | None = None
    select: list[str] = field(default_factory=lambda: ["all"])
    tolerance: float = 1e-9
    format: str = "json"
    base_dir: Path = field(default=Path("."), repr=False)

    def __post_init__(self):
        if not isinstance(self.pair, Mapping) or "backend" not in self.pair:
            raise ConfigError("config needs a 'pair' mapping with a 'backend'")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.pi is not None and self.pair["backend"] != "finite":
            raise ConfigError("a pi file only makes sense for a finite pair")
        if isinstance(self.select, str):
            self.select = [self.select]
        self.select = [str(s) for s in (self.select or [])]

    @property
    def backend(self) -> str:
        return self.pair["backend"]

    def pi_path(self) -> Path | None:
        if self.pi is None:
            return None
        path = Path(self.pi)
        return path if path.is_absolute() else self.base_dir / path

    def build_pair(self) -> GroupPair:
        return pair_from_dict(self.pair)

    def selected(self, check_id: str) -> bool:
        return any(s == "all" or check_id == s or check_id.startswith(s + ".")
                   for s in self.select)

    def echo(self) -> dict:
        """Config as recorded in reports; the pi path is kept as written."""
        return {"pair": dict(self.pair), "pi": self.pi, "select": list(self.select),
                "tolerance": self.tolerance, "format": self.format}


def config_from_dict(data: Mapping[str, Any], base_dir: Path | str = ".") -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - {"pair", "pi", "select", "tolerance", "format"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    return RunConfig(pair=dict(data.get("pair") or {}), pi=data.get("pi"),
                     select=data.get("select", ["all"]),
                     tolerance=float(data.get("tolerance", 1e-9)),
                     format=data.get("format", "json"), base_dir=Path(base_dir))


def load_config(path: Path | str) -> RunConfig:
    path = resolve_config(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, path.parent)


def resolve_config(name: Path | str) -> Path:
    """A path, or the name of a shipped config such as ``s4_s3``."""
    path = Path(name)
    if path.exists():
        return path
    shipped = DATA_DIR / f"{name}.yaml"
    if shipped.exists():
        return shipped
    raise ConfigError(f"no such config: {name}")
