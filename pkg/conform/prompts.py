from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from conform.synthesis import SynthRequest  # pragma: no cover


SYSTEM_PROMPT = '''# ROLE

You repair programs written in a small verification language with methods, requires and ensures clauses,
loops with invariants, assertions and bounded quantifiers. The verifier reports obligations that it cannot prove.

# TASK

Fix one of the reported verification errors. The program may be wrong, the specification may be wrong, or both.
You receive the file name, the failing trace, the program, the error, the facts known to hold along the trace,
domain hints and the facts that should be looked at first.

# OUTPUT

Answer with one or more modifications in exactly this form:

# modification 1
<file>...</file>
<original>...</original>
<patched>...</patched>

<file> holds the file name. <original> holds lines copied verbatim from the program, blank lines included.
<patched> holds their replacement. Keep the indentation. End every line you change or add with `// pr {:trusted}`.
Modifications must not overlap.

# RULES

Statements and clauses marked {:trusted} are known to be correct. Do not change them, do not delete them and do not
remove the attribute. Lines ending with `// pr {:trusted}` were written by earlier repairs and are frozen as well.
You may add new assertions or clauses next to frozen lines.
Every array access must stay in bounds and every divisor must be non-zero, in the specification too.
'''

REPAIR_TEMPLATE = '''<filename>{filename}</filename>

<program>
{program}</program>

<program-error>
{trace}
</program-error>

<error> The error is `{error}` (failing assert `{assertion}`) for the statement `{statement}`.
</error>

<trace-assertion>
{trace_assertions}
</trace-assertion>

<context>
An assertion only checks a property at its point, it does not narrow the states that reach later statements.
{context}
</context>
<error-priority>
{priority}
</error-priority>

Explain why `{assertion}` fails for `{statement}`, then give a patch that makes the program verify.
'''

SUMMARY_SYSTEM_PROMPT = '''You write requirements. Summarize the given program so that another developer can implement it again
from the summary alone. Stay at the level of requirements, not code.
'''

SUMMARY_TEMPLATE = '''Below is a verified program. Lines with {{:trusted}} hold statements a developer checked and marked as important.

Write a summary of the program as requirements that let another developer produce a program of the same behavior
and quality. Keep it high level and put it in triple backticks (```).

{program}'''


def build_prompt(request: 'SynthRequest') -> str:
    return REPAIR_TEMPLATE.format(
        filename=request.filename,
        program=request.annotated_program,
        trace=request.error_trace,
        error=request.error,
        assertion=request.failing_assertion,
        statement=request.failing_statement,
        trace_assertions='\n'.join(request.trace_assertions),
        context=request.context,
        priority='\n'.join(request.priority),
    )


def build_summary_prompt(annotated_program: str) -> str:
    return SUMMARY_TEMPLATE.format(program=annotated_program)
