"""INI-style run configuration.

::

    [run]
    seed = 20240601
    suites = algebra, lie-poisson
    step = 1e-5

    [suite:algebra]
    algebras = so3, sl2, h3, abelian3
    tol.jacobi = 1e-12

    [algebra:mine]
    dim = 3
    triples = 0 1 2 1; 1 2 0 1; 2 0 0 1

    [groups]
    SO3 = 0.1, 0, 0

Triples ``i j k value`` are 0-based and mean ``[e_i, e_j] += value e_k``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from poissonlab import liealg
from poissonlab import matgroups as mg
from poissonlab import numcore as nc
from poissonlab.errors import ConfigError

DEFAULT_SEED = 20240601


@dataclass
class SuiteConfig:
    name: str
    options: dict[str, str] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.options.get(key, default)

    def get_int(self, key: str, default: int) -> int:
        raw = self.options.get(key)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"[suite:{self.name}] {key} must be an integer, got {raw!r}") from None
        if value < 0:
            raise ConfigError(f"[suite:{self.name}] {key} must be non-negative")
        return value

    def get_list(self, key: str, default: list[str], sep: str = ",") -> list[str]:
        raw = self.options.get(key)
        if raw is None:
            return list(default)
        return [item.strip() for item in raw.split(sep) if item.strip()]

    def tol(self, check: str, default: float) -> float:
        return self.tolerances.get(check, default)


@dataclass
class RunConfig:
    seed: int = DEFAULT_SEED
    #: ``None`` when the config does not say; an explicit empty list runs nothing
    suites: list[str] | None = None
    step: float = nc.DEFAULT_STEP
    suite_configs: dict[str, SuiteConfig] = field(default_factory=dict)
    algebras: dict[str, liealg.LieAlgebra] = field(default_factory=dict)
    group_bases: dict[str, np.ndarray] = field(default_factory=dict)
    source: str = "<defaults>"

    def suite(self, name: str) -> SuiteConfig:
        return self.suite_configs.get(name, SuiteConfig(name))

    def algebra(self, name: str) -> liealg.LieAlgebra:
        if name in self.algebras:
            return self.algebras[name]
        return liealg.get_algebra(name)

    def group(self, name: str) -> mg.MatrixLieGroup:
        return mg.get_group(name, self.group_bases.get(name))


def _parse_float(raw: str, where: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {raw!r}") from None


def _parse_triples(raw: str, dim: int, where: str) -> list[tuple[int, int, int, float]]:
    out = []
    for chunk in raw.split(";"):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise ConfigError(f"{where}: triple {chunk.strip()!r} needs 'i j k value'")
        try:
            i, j, k = (int(p) for p in parts[:3])
        except ValueError:
            raise ConfigError(f"{where}: bad indices in {chunk.strip()!r}") from None
        if not all(0 <= t < dim for t in (i, j, k)):
            raise ConfigError(f"{where}: index out of range in {chunk.strip()!r}")
        out.append((i, j, k, _parse_float(parts[3], where)))
    return out


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str  # keep key case (group names)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    cfg = RunConfig(source=source)
    if parser.has_section("run"):
        run = parser["run"]
        if "seed" in run:
            try:
                cfg.seed = int(run["seed"])
            except ValueError:
                raise ConfigError(f"{source}: [run] seed must be an integer") from None
            if cfg.seed < 0:
                raise ConfigError(f"{source}: [run] seed must be unsigned")
        if "suites" in run:
            cfg.suites = [s.strip() for s in run["suites"].split(",") if s.strip()]
        if "step" in run:
            cfg.step = _parse_float(run["step"], f"{source}: [run] step")
            if cfg.step <= 0:
                raise ConfigError(f"{source}: [run] step must be positive")

    for section in parser.sections():
        body = parser[section]
        if section.startswith("suite:"):
            name = section.split(":", 1)[1].strip()
            sc = SuiteConfig(name)
            for key, value in body.items():
                if key.startswith("tol."):
                    tol = _parse_float(value, f"{source}: [{section}] {key}")
                    if tol <= 0:
                        raise ConfigError(f"{source}: [{section}] {key} must be positive")
                    sc.tolerances[key[4:]] = tol
                else:
                    sc.options[key] = value
            cfg.suite_configs[name] = sc
        elif section.startswith("algebra:"):
            name = section.split(":", 1)[1].strip()
            where = f"{source}: [{section}]"
            if "dim" not in body:
                raise ConfigError(f"{where} needs dim")
            try:
                dim = int(body["dim"])
            except ValueError:
                raise ConfigError(f"{where} dim must be an integer") from None
            triples = _parse_triples(body.get("triples", ""), dim, where)
            try:
                cfg.algebras[name] = liealg.from_triples(name, dim, triples)
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from None
        elif section == "groups":
            for name, value in body.items():
                coords = np.array([_parse_float(v, f"{source}: [groups] {name}") for v in value.split(",")])
                cfg.group_bases[name] = coords
        elif section != "run":
            raise ConfigError(f"{source}: unknown section [{section}]")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))
