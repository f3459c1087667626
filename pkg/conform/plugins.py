import json
import shlex
import subprocess
from typing import List, Optional, Protocol, runtime_checkable

from emptylog import EmptyLogger, LoggerProtocol

from conform.domain import BoundedDomain
from conform.errors import ConfigError, PluginFailure
from conform.solver import Solver
from conform.synthesis import SynthRequest
from conform.wire import Patch, parse_reply


@runtime_checkable
class Synthesizer(Protocol):
    name: str

    def propose(self, request: SynthRequest) -> List[Patch]:
        ...  # pragma: no cover


class SubprocessSynthesizer:
    """Runs an external command once per request.

    The request goes to stdin as a single JSON line, the reply on stdout is the
    `# modification N` wire format, optionally split into `# patch N` sections."""

    def __init__(self, command: str, timeout_s: float = 300.0, logger: LoggerProtocol = EmptyLogger()) -> None:
        if not command.strip():
            raise ValueError('The synthesizer command must not be empty.')
        self.command = command
        self.arguments = shlex.split(command)
        self.timeout_s = timeout_s
        self.logger = logger
        self.name = self.arguments[0]

    def propose(self, request: SynthRequest) -> List[Patch]:
        document = json.dumps(request.as_dict()) + '\n'
        try:
            completed = subprocess.run(
                self.arguments,
                input=document,
                capture_output=True,
                text=True,
                timeout=self.timeout_s,
            )
        except FileNotFoundError as error:
            raise PluginFailure(f'the synthesizer "{self.name}" was not found') from error
        except subprocess.TimeoutExpired as error:
            raise PluginFailure(f'the synthesizer "{self.name}" did not answer within {self.timeout_s} seconds') from error

        if completed.returncode != 0:
            details = completed.stderr.strip()
            suffix = f': {details}' if details else ''
            raise PluginFailure(f'the synthesizer "{self.name}" exited with status {completed.returncode}{suffix}')

        patches = parse_reply(completed.stdout, self.name, request.campaign)
        self.logger.info(f'The synthesizer "{self.name}" answered with {len(patches)} patches.')
        return patches


BUILTINS = ('enumerative',)


def make_synthesizer(
    command: Optional[str] = None,
    builtin: str = 'enumerative',
    seed: int = 0,
    domain: BoundedDomain = BoundedDomain(),
    timeout_s: float = 300.0,
    logger: LoggerProtocol = EmptyLogger(),
    solver: Optional[Solver] = None,
) -> Synthesizer:
    """An external command wins over the builtin."""
    if command:
        return SubprocessSynthesizer(command, timeout_s, logger)
    if builtin == 'enumerative':
        from conform.enumerative import EnumerativeSynthesizer

        return EnumerativeSynthesizer(seed=seed, domain=domain, solver=solver, logger=logger)
    raise ConfigError(f'unknown builtin synthesizer "{builtin}", expected one of: {", ".join(BUILTINS)}')
