from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from emptylog import EmptyLogger, LoggerProtocol

from conform.coevolution import Budget
from conform.domain import BoundedDomain
from conform.errors import ConfigError
from conform.plugins import BUILTINS, Synthesizer, make_synthesizer
from conform.solver import Backend, Solver, SolverConfig


@dataclass(frozen=True)
class Settings:
    solver_backend: str = 'bounded'
    solver_cmd: str = 'z3 -in'
    solver_timeout_ms: int = 5000
    synth_cmd: str = ''
    synth_builtin: str = 'enumerative'
    domain_int_lo: int = -4
    domain_int_hi: int = 4
    domain_max_array_len: int = 3
    budget_wall_clock_s: float = 1200.0
    budget_max_campaigns: int = 5
    budget_k: int = 5
    budget_max_candidates: int = 32
    seed: int = 0
    metrics_mutations: int = 20

    def __post_init__(self) -> None:
        if self.solver_backend not in {backend.value for backend in Backend}:
            raise ConfigError(f'unknown solver backend "{self.solver_backend}"')
        if self.synth_builtin not in BUILTINS:
            raise ConfigError(f'unknown builtin synthesizer "{self.synth_builtin}"')

    @staticmethod
    def field_of(key: str) -> str:
        """`budget.k` in a file or on the command line is the field `budget_k`."""
        return key.replace('.', '_').replace('-', '_')

    def merge(self, overrides: Mapping[str, Any]) -> 'Settings':
        known = {item.name for item in fields(self)}
        changes: Dict[str, Any] = {}
        for key, value in overrides.items():
            name = self.field_of(key)
            if name not in known:
                raise ConfigError(f'unknown setting "{key}"')
            if value is not None:
                changes[name] = value
        return replace(self, **changes)

    @property
    def domain(self) -> BoundedDomain:
        try:
            return BoundedDomain(self.domain_int_lo, self.domain_int_hi, self.domain_max_array_len)
        except ValueError as error:
            raise ConfigError(str(error)) from error

    @property
    def solver_config(self) -> SolverConfig:
        return SolverConfig(Backend(self.solver_backend), self.domain, self.solver_cmd, self.solver_timeout_ms)

    @property
    def budget(self) -> Budget:
        try:
            return Budget(self.budget_wall_clock_s, self.budget_max_campaigns, self.budget_k, self.budget_max_candidates)
        except ValueError as error:
            raise ConfigError(str(error)) from error

    def solver(self, logger: LoggerProtocol = EmptyLogger()) -> Solver:
        return Solver(self.solver_config, logger)

    def synthesizer(self, logger: LoggerProtocol = EmptyLogger()) -> Synthesizer:
        return make_synthesizer(self.synth_cmd or None, self.synth_builtin, self.seed, self.domain, logger=logger, solver=self.solver(logger))


def convert(text: str, like: Any) -> Any:
    if isinstance(like, bool):
        if text not in ('true', 'false'):
            raise ValueError(text)
        return text == 'true'
    if isinstance(like, int):
        return int(text)
    if isinstance(like, float):
        return float(text)
    return text


def parse_config(text: str, source: str = '<config>') -> Dict[str, Any]:
    defaults = {item.name: item.default for item in fields(Settings)}
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'{source}, line {number}: expected "key = value", got "{line}"')
        key, value = (part.strip() for part in line.split('=', 1))
        name = Settings.field_of(key)
        if name not in defaults:
            raise ConfigError(f'{source}, line {number}: unknown setting "{key}"')
        try:
            values[name] = convert(value, defaults[name])
        except ValueError as error:
            raise ConfigError(f'{source}, line {number}: "{value}" is not a valid value for "{key}"') from error
    return values


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None) -> Settings:
    """Defaults, then the file, then the overrides."""
    settings = Settings()
    if path is not None:
        try:
            text = Path(path).read_text(encoding='utf-8')
        except OSError as error:
            raise ConfigError(f'cannot read the configuration file "{path}"') from error
        settings = settings.merge(parse_config(text, str(path)))
    return settings.merge(overrides or {})
