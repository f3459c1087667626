from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from conform.errors import EvaluationError, ShapeError
from conform.evaluator import Value, evaluate, value_of
from conform.formulas import substitute
from conform.intent import order_failing, verify
from conform.parser import parse_program
from conform.passify import MAX_PATHS
from conform.printer import print_program
from conform.solver import Solver
from conform.vcgen import FailingTrace, method_partitions, trace_of, vc_gen
from conform.nodes import (
    Expr, Var, Binary, ArrayLit, BoolLit, Call, TRUE, Sort, Clause, ClauseKind, Block, Assign, Param, Method, Program,
    Spec, Test, USER_TRUSTED, free_vars,
)


class Relation(Enum):
    PROG_SPEC = 'prog_spec'
    PROG_TEST = 'prog_test'
    SPEC_TEST = 'spec_test'


@dataclass(frozen=True)
class ConformanceVerdict:
    relation: Relation
    holds: bool
    failing_traces: Tuple[FailingTrace, ...] = ()

    def __post_init__(self) -> None:
        if self.holds == bool(self.failing_traces):
            raise ValueError('A conformance verdict holds exactly when it has no failing traces.')


def verdict_for(relation: Relation, program: Program, methods: Optional[Sequence[str]], solver: Solver, max_paths: int) -> ConformanceVerdict:
    if methods is None:
        partitions = vc_gen(program, max_paths)
    else:
        partitions = []
        for name in methods:
            partitions.extend(method_partitions(program.method(name), program, max_paths))
    traces = tuple(trace_of(outcome.partition) for outcome in order_failing(verify(partitions, solver)))
    return ConformanceVerdict(relation, not traces, traces)


def conforms_prog_spec(program: Program, solver: Optional[Solver] = None, max_paths: int = MAX_PATHS) -> ConformanceVerdict:
    return verdict_for(Relation.PROG_SPEC, program, None, solver or Solver(), max_paths)


def trusted(kind: ClauseKind, formula: Expr) -> Clause:
    return Clause(0, kind, formula, USER_TRUSTED)


def test_to_spec(test: Test) -> Spec:
    """The test as a specification over its own names: inputs pinned by requires, the oracle as ensures."""
    requires = tuple(trusted(ClauseKind.REQUIRES, Binary('==', Var(name), value)) for name, value in test.inputs)
    ensures = tuple(trusted(ClauseKind.ENSURES, formula) for formula in test.oracle) or (trusted(ClauseKind.ENSURES, TRUE),)
    return Spec(requires, ensures)


def callee_of(program: Program, test: Test) -> Method:
    if not program.has_method(test.callee):
        raise ShapeError(f'the test "{test.name}" calls "{test.callee}", which the program does not declare')
    callee = program.method(test.callee)
    if len(callee.returns) != 1 or len(callee.params) != len(test.args):
        raise ShapeError(f'the test "{test.name}" does not match the signature of "{test.callee}"')
    return callee


def callee_spec(test: Test, callee: Method) -> Spec:
    """`test_to_spec` moved onto the parameter and result names of the called method."""
    renaming: Dict[str, Expr] = {test.result: Var(callee.returns[0].name)}
    requires: List[Clause] = []
    for param, argument in zip(callee.params, test.args):
        value = argument
        if isinstance(argument, Var):
            value = test.value_of(argument.name)
            renaming.setdefault(argument.name, Var(param.name))
        requires.append(trusted(ClauseKind.REQUIRES, Binary('==', Var(param.name), value)))
    for name, value in test.inputs:
        renaming.setdefault(name, value)

    spec = test_to_spec(test)
    ensures = tuple(replace(clause, formula=substitute(clause.formula, renaming)) for clause in spec.ensures)
    return Spec(tuple(requires), ensures)


def reparsed(program: Program) -> Program:
    """Printing and parsing again gives fresh statement ids and real line numbers."""
    return parse_program(print_program(program), program.source_name)


def with_spec(program: Program, name: str, spec: Spec) -> Program:
    methods = tuple(
        replace(method, requires=spec.requires, ensures=spec.ensures) if method.name == name else method
        for method in program.methods
    )
    return reparsed(replace(program, methods=methods))


def conforms_prog_test(program: Program, test: Test, solver: Optional[Solver] = None, max_paths: int = MAX_PATHS) -> ConformanceVerdict:
    callee = callee_of(program, test)
    direct = with_spec(program, callee.name, callee_spec(test, callee))
    return verdict_for(Relation.PROG_TEST, direct, (callee.name,), solver or Solver(), max_paths)


def spec_to_program(method: Method) -> Program:
    return Program((stub_of(method),), '<spec>')


def stub_of(method: Method) -> Method:
    return replace(method, body=None)


def input_sort(value: Expr) -> Sort:
    if isinstance(value, ArrayLit):
        return Sort.ARRAY
    if isinstance(value, BoolLit):
        return Sort.BOOL
    return Sort.INT


def test_method(test: Test, callee: Method) -> Method:
    """The test as a trusted method: its inputs become parameters, its oracle the postcondition."""
    spec = test_to_spec(test)
    params = tuple(Param(name, input_sort(value)) for name, value in test.inputs)
    returns = (Param(test.result, callee.returns[0].sort),)
    call = Assign(0, test.result, Call(test.callee, test.args), USER_TRUSTED)
    return Method(test.name, params, returns, spec.requires, spec.ensures, Block((call,)))


def alignment_program(program: Program, tests: Sequence[Test]) -> Program:
    """Stubs of every called method followed by one trusted method per test."""
    stubs: Dict[str, Method] = {}
    methods: List[Method] = []
    for test in tests:
        callee = callee_of(program, test)
        stubs.setdefault(callee.name, stub_of(callee))
        methods.append(test_method(test, callee))
    names = set(stubs)
    for method in methods:
        if method.name in names:
            raise ShapeError(f'the test "{method.name}" has the name of a method of the program')
        names.add(method.name)
    return reparsed(Program(tuple(stubs.values()) + tuple(methods), '<alignment>'))


def conforms_spec_test(method: Method, test: Test, solver: Optional[Solver] = None, max_paths: int = MAX_PATHS) -> ConformanceVerdict:
    program = alignment_program(Program((method,)), (test,))
    return verdict_for(Relation.SPEC_TEST, program, (test.name,), solver or Solver(), max_paths)


def consistent(method: Method, test: Test, result: Expr) -> bool:
    """Whether the test inputs with `result` as output satisfy the specification of `method`."""
    callee = callee_of(Program((method,)), test)
    env: Dict[str, Value] = {}
    for param, argument in zip(callee.params, test.args):
        value = test.value_of(argument.name) if isinstance(argument, Var) else argument
        env[param.name] = value_of(value, {})
    env[callee.returns[0].name] = value_of(result, {})
    for clause in callee.requires + callee.ensures:
        if any(name not in env for name in free_vars(clause.formula)):
            raise ShapeError(f'the clause on line {clause.span.line} mentions names the test cannot bind')
        try:
            if evaluate(clause.formula, env) is not True:
                return False
        except EvaluationError:
            return False
    return True
