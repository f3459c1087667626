import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from emptylog import EmptyLogger, LoggerProtocol

from conform.conformance import callee_of, consistent
from conform.domain import BoundedDomain
from conform.errors import EvaluationError, InsufficientDistinctMutations, ShapeError
from conform.evaluator import Value, evaluate, value_of
from conform.intent import extract_hs_intent
from conform.printer import print_expr, print_program
from conform.prompts import build_summary_prompt as fill_summary_template
from conform.solver import Solver
from conform.synthesis import annotated_sids
from conform.nodes import Binary, Var, Method, Program, Sort, Test, literal


N_MUTATIONS = 20
MAX_REROLLS = 10
MAX_CHAIN = 4

Operator = Callable[[int, int, BoundedDomain], int]

OPERATORS: Dict[str, Operator] = {
    'plus_one': lambda value, length, domain: value + 1,
    'minus_one': lambda value, length, domain: value - 1,
    'negate': lambda value, length, domain: -value,
    'length': lambda value, length, domain: length,
    'zero': lambda value, length, domain: 0,
    'sentinel': lambda value, length, domain: domain.int_hi + 1,
}


@dataclass(frozen=True)
class Mutation:
    test: str
    oracle: str
    operator: str
    killed: bool


@dataclass(frozen=True)
class CompletenessResult:
    killed: int
    total_mutations: int
    per_mutation: Tuple[Mutation, ...]

    def __post_init__(self) -> None:
        if self.total_mutations <= 0:
            raise ValueError('A completeness score needs at least one mutation.')

    @property
    def score(self) -> Fraction:
        return Fraction(self.killed, self.total_mutations)


def bound_env(callee: Method, test: Test) -> Dict[str, Value]:
    env: Dict[str, Value] = {}
    for param, argument in zip(callee.params, test.args):
        value = test.value_of(argument.name) if isinstance(argument, Var) else argument
        env[param.name] = value_of(value, {})
    return env


def observed_value(test: Test, domain: BoundedDomain) -> int:
    """The output the test expects: the right side of `result == e`, or else the first value every oracle accepts."""
    inputs = {name: value_of(value, {}) for name, value in test.inputs}
    for formula in test.oracle:
        if isinstance(formula, Binary) and formula.op == '==' and formula.left == Var(test.result):
            value = value_of(formula.right, inputs)
            if isinstance(value, int) and not isinstance(value, bool):
                return value
    for value in domain.ints():
        env = dict(inputs, **{test.result: value})
        try:
            if all(evaluate(formula, env) for formula in test.oracle):
                return value
        except EvaluationError:
            continue
    raise ShapeError(f'the oracle of the test "{test.name}" accepts no output in {domain}')


def array_length(env: Dict[str, Value]) -> int:
    for value in env.values():
        if isinstance(value, tuple):
            return len(value)
    return 0


class Mutator:
    """Seeded output mutants of one test: chains of simple operators, then a plain offset scan."""

    def __init__(self, observed: int, length: int, domain: BoundedDomain, rng: random.Random) -> None:
        self.observed = observed
        self.length = length
        self.domain = domain
        self.rng = rng
        self.limit = 2 * max(abs(domain.int_lo), abs(domain.int_hi)) + domain.max_array_len + 1
        self.taken: Set[int] = {observed}

    def fits(self, value: int) -> bool:
        return abs(value) <= self.limit and value not in self.taken

    def roll(self) -> Optional[Tuple[int, str]]:
        for _ in range(MAX_REROLLS):
            names = [self.rng.choice(sorted(OPERATORS)) for _ in range(self.rng.randint(1, MAX_CHAIN))]
            value = self.observed
            for name in names:
                value = OPERATORS[name](value, self.length, self.domain)
            if self.fits(value):
                return value, '+'.join(names)
        return None

    def scan(self) -> Optional[Tuple[int, str]]:
        for distance in range(1, self.limit + abs(self.observed) + 1):
            for value in (self.observed + distance, self.observed - distance):
                if self.fits(value):
                    return value, 'offset'
        return None

    def mutants(self, count: int) -> List[Tuple[int, str]]:
        result = []
        for _ in range(count):
            mutant = self.roll() or self.scan()
            if mutant is None:
                raise InsufficientDistinctMutations(f'only {len(result)} distinct outputs differ from {self.observed} within {self.limit} of zero, {count} are needed')
            self.taken.add(mutant[0])
            result.append(mutant)
        return result


def completeness(
    method: Method,
    tests: Sequence[Test],
    n_mutations: int = N_MUTATIONS,
    seed: int = 0,
    domain: BoundedDomain = BoundedDomain(),
    logger: LoggerProtocol = EmptyLogger(),
) -> CompletenessResult:
    """Share of output mutants of the tests that the specification of `method` rejects."""
    if n_mutations < 1:
        raise ValueError(f'At least one mutation per test is needed, got {n_mutations}.')
    if not tests:
        raise ValueError('At least one test is needed to score a specification.')

    per_mutation: List[Mutation] = []
    for index, test in enumerate(tests):
        callee = callee_of(Program((method,)), test)
        if callee.returns[0].sort is not Sort.INT:
            raise ShapeError(f'outputs of "{callee.name}" are not integers and cannot be mutated')
        observed = observed_value(test, domain)
        rng = random.Random(seed * 1000003 + index)
        mutator = Mutator(observed, array_length(bound_env(callee, test)), domain, rng)
        for value, operator in mutator.mutants(n_mutations):
            result = literal(value)
            killed = not consistent(callee, test, result)
            per_mutation.append(Mutation(test.name, f'{test.result} == {print_expr(result)}', operator, killed))

    killed = sum(1 for mutation in per_mutation if mutation.killed)
    logger.info(f'The specification of "{method.name}" rejects {killed} of {len(per_mutation)} mutated outputs.')
    return CompletenessResult(killed, len(per_mutation), tuple(per_mutation))


def format_completeness(result: CompletenessResult) -> str:
    score = result.score
    lines = [
        f'score: {float(score):.2f} ({score.numerator}/{score.denominator})',
        f'killed: {result.killed}/{result.total_mutations}',
        f'operators: {", ".join(sorted(OPERATORS))}, offset',
        '',
    ]
    width = max(len(mutation.oracle) for mutation in result.per_mutation)
    for mutation in result.per_mutation:
        verdict = 'killed' if mutation.killed else 'survived'
        lines.append(f'{mutation.test}  {mutation.oracle.ljust(width)}  {verdict:8}  {mutation.operator}')
    return '\n'.join(lines) + '\n'


def build_summary_prompt(program: Program, solver: Optional[Solver] = None) -> str:
    """The summary prompt filled with the program, its hard intent marked as trusted."""
    if not program.methods:
        return fill_summary_template('')
    report = extract_hs_intent(program, solver or Solver())
    return fill_summary_template(print_program(program, annotated_sids(report)))
