import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO

from conform.coevolution import Mode, Status, automated_assurance, co_evolve
from conform.config import Settings, load_config
from conform.conformance import conforms_prog_spec
from conform.errors import ConformError
from conform.intent import dump_report, extract_hs_intent, report_as_dict
from conform.metrics import build_summary_prompt, completeness, format_completeness
from conform.parser import parse_program, parse_test
from conform.passify import ObligationKind, dump_blocks, passify
from conform.plugins import BUILTINS
from conform.results import write_results
from conform.vcgen import FailingTrace
from conform.nodes import Program, Test


EXIT_OK = 0
EXIT_NONCONFORMING = 1
EXIT_ERROR = 2
EXIT_REPAIR_FAILED = 3

DEFAULT_OUT = 'conform-results'


def make_logger(verbose: bool) -> logging.Logger:
    logger = logging.getLogger('conform')
    logger.setLevel(logging.INFO if verbose else logging.WARNING)
    for old in list(logger.handlers):
        logger.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)-8s %(message)s'))
    logger.addHandler(handler)
    return logger


def read_program(path: str) -> Program:
    return parse_program(Path(path).read_text(encoding='utf-8'), path)


def read_tests(path: Optional[str]) -> List[Test]:
    if path is None:
        return []
    location = Path(path)
    files = sorted(location.glob('*.mvl')) if location.is_dir() else [location]
    return [parse_test(file.read_text(encoding='utf-8'), str(file)) for file in files]


def error_lines(program: Program, traces: Sequence[FailingTrace]) -> List[str]:
    lines = []
    for number, trace in enumerate(traces, start=1):
        lines.append(f'line {trace.target.line}: Error {number}: {trace.message}')
        if trace.kind is ObligationKind.POSTCONDITION:
            clause_line = program.node(trace.target.sid).span.line
            lines.append(f'line {clause_line}: This is the postcondition that might not hold.')
    return lines


def settings_from(arguments: argparse.Namespace) -> Settings:
    overrides: Dict[str, Any] = {
        'solver.backend': arguments.backend,
        'seed': arguments.seed,
        'budget.k': getattr(arguments, 'k', None),
        'budget.max_campaigns': getattr(arguments, 'max_campaigns', None),
        'budget.wall_clock_s': getattr(arguments, 'time_budget', None),
        'metrics.mutations': getattr(arguments, 'mutations', None),
    }
    synth = getattr(arguments, 'synth', None)
    if synth in BUILTINS:
        overrides['synth.builtin'] = synth
        overrides['synth.cmd'] = ''
    elif synth is not None:
        overrides['synth.cmd'] = synth
    return load_config(arguments.config, overrides)


def emit(stream: TextIO, arguments: argparse.Namespace, data: Dict[str, Any], text: str) -> None:
    if arguments.json:
        stream.write(json.dumps(data, indent=2, sort_keys=True) + '\n')
    else:
        stream.write(text)


def cmd_verify(arguments: argparse.Namespace, settings: Settings, logger: logging.Logger, stream: TextIO) -> int:
    program = read_program(arguments.file)
    verdict = conforms_prog_spec(program, settings.solver(logger))
    lines = error_lines(program, verdict.failing_traces) or ['0 errors']
    data = {
        'conforming': verdict.holds,
        'errors': [
            {'line': trace.target.line, 'partition': trace.partition_id, 'kind': trace.kind.value, 'message': trace.message}
            for trace in verdict.failing_traces
        ],
    }
    emit(stream, arguments, data, '\n'.join(lines) + '\n')
    return EXIT_OK if verdict.holds else EXIT_NONCONFORMING


def cmd_explain(arguments: argparse.Namespace, settings: Settings, logger: logging.Logger, stream: TextIO) -> int:
    report = extract_hs_intent(read_program(arguments.file), settings.solver(logger))
    emit(stream, arguments, report_as_dict(report), dump_report(report))
    return EXIT_OK if report.conforming else EXIT_NONCONFORMING


def finish(arguments: argparse.Namespace, result: Any, logger: logging.Logger, stream: TextIO) -> int:
    out = write_results(arguments.out, result, arguments.timings, arguments.explain, logger)
    data = {'status': result.status.value, 'campaigns': result.campaigns, 'out': str(out)}
    text = f'status: {result.status.value}\ncampaigns: {result.campaigns}\nresults: {out}\n'
    if result.status is Status.BUDGET_EXHAUSTED:
        text += 'note: the budget ran out before a verified candidate was found\n'
    emit(stream, arguments, data, text)
    return EXIT_OK if result.status is Status.VERIFIED else EXIT_REPAIR_FAILED


def cmd_repair(arguments: argparse.Namespace, settings: Settings, logger: logging.Logger, stream: TextIO) -> int:
    source = Path(arguments.file).read_text(encoding='utf-8')
    result = co_evolve(
        source, settings.synthesizer(logger), settings.solver(logger), settings.budget, Mode(arguments.mode),
        settings.seed, Path(arguments.file).name, logger,
    )
    return finish(arguments, result, logger, stream)


def cmd_align(arguments: argparse.Namespace, settings: Settings, logger: logging.Logger, stream: TextIO) -> int:
    source = Path(arguments.file).read_text(encoding='utf-8')
    result = automated_assurance(
        source, read_tests(arguments.tests), settings.synthesizer(logger), settings.solver(logger), settings.budget,
        Mode(arguments.mode), settings.seed, Path(arguments.file).name, logger,
    )
    return finish(arguments, result, logger, stream)


def cmd_score(arguments: argparse.Namespace, settings: Settings, logger: logging.Logger, stream: TextIO) -> int:
    program = read_program(arguments.file)
    tests = read_tests(arguments.tests)
    if not tests:
        raise ConformError('scoring needs at least one test')

    data: Dict[str, Any] = {}
    sections = []
    for name in dict.fromkeys(test.callee for test in tests):
        if not program.has_method(name):
            raise ConformError(f'the tests call "{name}", which "{arguments.file}" does not declare')
        mine = [test for test in tests if test.callee == name]
        result = completeness(program.method(name), mine, settings.metrics_mutations, settings.seed, settings.domain, logger)
        data[name] = {
            'score': float(result.score),
            'killed': result.killed,
            'total_mutations': result.total_mutations,
            'per_mutation': [
                {'test': item.test, 'oracle': item.oracle, 'operator': item.operator, 'killed': item.killed}
                for item in result.per_mutation
            ],
        }
        sections.append(f'method {name}\n{format_completeness(result)}')
    emit(stream, arguments, data, '\n'.join(sections))
    return EXIT_OK


def cmd_summarize(arguments: argparse.Namespace, settings: Settings, logger: logging.Logger, stream: TextIO) -> int:
    program = read_program(arguments.file)
    solver = settings.solver(logger)
    if not conforms_prog_spec(program, solver).holds:
        sys.stderr.write(f'"{arguments.file}" does not verify, run "conform verify" for the errors\n')
        return EXIT_NONCONFORMING
    prompt = build_summary_prompt(program, solver)
    emit(stream, arguments, {'prompt': prompt}, prompt)
    return EXIT_OK


def cmd_dump(arguments: argparse.Namespace, settings: Settings, logger: logging.Logger, stream: TextIO) -> int:
    program = read_program(arguments.file)
    sections = {method.name: dump_blocks(passify(method, program)) for method in program.methods if method.body is not None}
    emit(stream, arguments, sections, ''.join(f'method {name}\n{text}' for name, text in sections.items()))
    return EXIT_OK


COMMANDS = {
    'verify': cmd_verify,
    'explain': cmd_explain,
    'repair': cmd_repair,
    'align': cmd_align,
    'score': cmd_score,
    'summarize': cmd_summarize,
    'dump': cmd_dump,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='FILE', help='key = value configuration file')
    common.add_argument('--backend', choices=['bounded', 'smt'], help='solver backend (default: bounded)')
    common.add_argument('--seed', type=int, help='seed for every random choice (default: 0)')
    common.add_argument('--json', action='store_true', help='machine-readable output')
    common.add_argument('--verbose', action='store_true', help='log progress to stderr')
    common.add_argument('--out', metavar='DIR', default=DEFAULT_OUT, help='results directory (default: %(default)s)')

    repair = argparse.ArgumentParser(add_help=False)
    repair.add_argument('--k', type=int, help='patches requested per campaign (default: 5)')
    repair.add_argument('--max-campaigns', type=int, help='co-evolution campaigns (default: 5)')
    repair.add_argument('--time-budget', type=float, metavar='SEC', help='wall clock budget (default: 1200)')
    repair.add_argument('--synth', metavar='CMD', help='"enumerative" or a synthesizer command line')
    repair.add_argument('--first', dest='mode', action='store_const', const=Mode.FIRST.value, help='stop at the first verified candidate (default)')
    repair.add_argument('--all', dest='mode', action='store_const', const=Mode.ALL.value, help='collect every verified candidate')
    repair.add_argument('--explain', action='store_true', help='dump the intent report of every campaign')
    repair.add_argument('--timings', action='store_true', help='write campaign timings to the logs')
    repair.set_defaults(mode=Mode.FIRST.value)

    parser = argparse.ArgumentParser('conform', description='Verify, repair and align programs with their specifications and tests.')
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('verify', parents=[common], help='check a program against its specification').add_argument('file')
    commands.add_parser('explain', parents=[common], help='print the hard and soft intent').add_argument('file')
    commands.add_parser('repair', parents=[common, repair], help='co-evolve program and specification').add_argument('file')
    align = commands.add_parser('align', parents=[common, repair], help='repair and then align with tests')
    align.add_argument('file')
    align.add_argument('--tests', metavar='PATH', help='a test file or a directory of them')
    score = commands.add_parser('score', parents=[common], help='completeness of the postconditions')
    score.add_argument('file')
    score.add_argument('--tests', metavar='PATH', required=True, help='a test file or a directory of them')
    score.add_argument('--mutations', type=int, help='mutations per test (default: 20)')
    commands.add_parser('summarize', parents=[common], help='print the summary prompt of a verified program').add_argument('file')
    commands.add_parser('dump', parents=[common], help='print the passive form of every method').add_argument('file')
    return parser


def main(argv: Optional[Sequence[str]] = None, stream: TextIO = sys.stdout) -> int:
    arguments = build_parser().parse_args(argv)
    logger = make_logger(arguments.verbose)
    try:
        settings = settings_from(arguments)
        return COMMANDS[arguments.command](arguments, settings, logger, stream)
    except ConformError as error:
        sys.stderr.write(f'conform: {error}\n')
        return EXIT_ERROR
    except OSError as error:
        sys.stderr.write(f'conform: {error}\n')
        return EXIT_ERROR
    except KeyboardInterrupt:
        sys.stderr.write('conform: interrupted\n')
        return EXIT_ERROR
