import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple

from emptylog import EmptyLogger, LoggerProtocol

from conform.bounded import Witness, find_counterexample
from conform.domain import BoundedDomain
from conform.nodes import Sort, Expr
from conform.smt import check_with_smt
from conform.vcgen import VcPartition


class Status(Enum):
    VALID = 'valid'
    INVALID = 'invalid'
    UNKNOWN = 'unknown'


class Backend(Enum):
    BOUNDED = 'bounded'
    SMT = 'smt'


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Optional[Witness] = field(default=None, compare=False)
    backend: Backend = Backend.BOUNDED
    elapsed: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        if (self.witness is not None) != (self.status is Status.INVALID):
            raise ValueError('A witness is expected exactly for invalid verdicts.')

    @property
    def valid(self) -> bool:
        return self.status is Status.VALID

    @property
    def invalid(self) -> bool:
        return self.status is Status.INVALID

    @property
    def unknown(self) -> bool:
        return self.status is Status.UNKNOWN


@dataclass(frozen=True)
class SolverConfig:
    backend: Backend = Backend.BOUNDED
    domain: BoundedDomain = BoundedDomain()
    command: str = 'z3 -in'
    timeout_ms: int = 5000


class Solver:
    """Validity checks with a result cache. Identical queries are answered once per solver."""

    def __init__(self, config: SolverConfig = SolverConfig(), logger: LoggerProtocol = EmptyLogger()) -> None:
        self.config = config
        self.logger = logger
        self.cache: Dict[Tuple[Expr, Tuple[Tuple[str, Sort], ...]], Verdict] = {}
        self.queries = 0

    def check(self, vc: Expr, sorts: Optional[Mapping[str, Sort]] = None) -> Verdict:
        key = (vc, tuple(sorted((sorts or {}).items(), key=lambda item: item[0])))
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        self.queries += 1
        verdict = self.decide(vc, dict(sorts or {}))
        self.cache[key] = verdict
        return verdict

    def decide(self, vc: Expr, sorts: Dict[str, Sort]) -> Verdict:
        start = time.monotonic()
        if self.config.backend is Backend.SMT:
            answer, witness = check_with_smt(vc, sorts, self.config.command, self.config.timeout_ms, self.logger)
            status = {'unsat': Status.VALID, 'sat': Status.INVALID}.get(answer, Status.UNKNOWN)
            return Verdict(status, witness if status is Status.INVALID else None, Backend.SMT, time.monotonic() - start)

        witness = find_counterexample(vc, sorts, self.config.domain)
        status = Status.VALID if witness is None else Status.INVALID
        return Verdict(status, witness, Backend.BOUNDED, time.monotonic() - start)

    def check_partition(self, partition: VcPartition) -> Verdict:
        return self.check(partition.vc, partition.variables)


def check_validity(
    vc: Expr,
    domain: BoundedDomain = BoundedDomain(),
    backend: Backend = Backend.BOUNDED,
    sorts: Optional[Mapping[str, Sort]] = None,
    command: str = 'z3 -in',
    timeout_ms: int = 5000,
    logger: LoggerProtocol = EmptyLogger(),
) -> Verdict:
    return Solver(SolverConfig(backend, domain, command, timeout_ms), logger).check(vc, sorts)
