from conform.parser import parse_program as parse_program, parse_test as parse_test
from conform.printer import print_program as print_program
from conform.vcgen import vc_gen as vc_gen
from conform.solver import Solver as Solver, SolverConfig as SolverConfig, Backend as Backend, check_validity as check_validity
from conform.domain import BoundedDomain as BoundedDomain
from conform.intent import extract_hs_intent as extract_hs_intent
from conform.synthesis import build_request as build_request, synthesize as synthesize
from conform.plugins import make_synthesizer as make_synthesizer
from conform.conformance import (
    conforms_prog_spec as conforms_prog_spec,
    conforms_prog_test as conforms_prog_test,
    conforms_spec_test as conforms_spec_test,
)
from conform.coevolution import Budget as Budget, Mode as Mode, co_evolve as co_evolve, automated_assurance as automated_assurance
from conform.metrics import completeness as completeness, build_summary_prompt as build_summary_prompt
from conform.guard import Guard as Guard
from conform.errors import ConformError as ConformError
