from pathlib import Path
from typing import List, Sequence, Union

from emptylog import EmptyLogger, LoggerProtocol

from conform.coevolution import AssuranceResult, CampaignRecord, Candidate, CoEvolutionResult, Triple
from conform.printer import clause_text
from conform.wire import format_patch


def lineage_campaigns(candidate: Candidate) -> List[int]:
    return sorted({int(step.split('.')[0]) for step in candidate.lineage})


def transcript(candidate: Candidate) -> str:
    parts = []
    for step, patch in zip(candidate.lineage, candidate.patches):
        parts.append(f'# campaign {step.split(".")[0]}: {patch.description or "patch " + step}\n{format_patch(patch)}')
    return '\n'.join(parts)


def record_text(records: Sequence[CampaignRecord], timings: bool, explain: bool) -> str:
    lines: List[str] = []
    for record in records:
        lines.extend(record.lines(timings))
        if explain:
            lines.append('  intent:')
            lines.extend(f'    {line}' for line in record.explanation.splitlines())
    return '\n'.join(lines) + '\n' if lines else ''


def triple_text(triple: Triple) -> str:
    lines = []
    for name, spec in triple.specs:
        lines.append(f'method {name}')
        lines.extend(f'  {clause_text(clause)}' for clause in spec.requires + spec.ensures)
    lines.append(f'tests: {", ".join(test.name for test in triple.tests) or "none"}')
    return '\n'.join(lines) + '\n'


def write_results(
    out: Union[str, Path],
    result: Union[CoEvolutionResult, AssuranceResult],
    timings: bool = False,
    explain: bool = False,
    logger: LoggerProtocol = EmptyLogger(),
) -> Path:
    """Writes one directory per verified candidate, a summary and the log of every campaign."""
    root = Path(out)
    root.mkdir(parents=True, exist_ok=True)

    if isinstance(result, AssuranceResult):
        entries = [(triple.candidate, triple) for triple in result.triples]
    else:
        entries = [(candidate, None) for candidate in result.verified]

    summary = [
        f'status: {result.status.value}',
        f'campaigns: {result.campaigns}',
        f'verified: {len(entries)}',
    ]
    for number, (candidate, _) in enumerate(entries, start=1):
        summary.append(f'candidate-{number}: {candidate.name} ({" ".join(candidate.lineage) or "input"})')
    (root / 'summary.txt').write_text('\n'.join(summary) + '\n', encoding='utf-8')
    (root / 'run.log').write_text(record_text(result.records, timings, explain), encoding='utf-8')

    for number, (candidate, triple) in enumerate(entries, start=1):
        directory = root / f'candidate-{number}'
        directory.mkdir(exist_ok=True)
        (directory / 'program.mvl').write_text(candidate.source, encoding='utf-8')
        (directory / 'transcript.txt').write_text(transcript(candidate), encoding='utf-8')
        campaigns = set(lineage_campaigns(candidate))
        own = [record for record in result.records if record.campaign in campaigns]
        (directory / 'run.log').write_text(record_text(own, timings, explain), encoding='utf-8')
        if triple is not None:
            (directory / 'spec.txt').write_text(triple_text(triple), encoding='utf-8')

    logger.info(f'The results of {len(entries)} candidates were written to "{root}".')
    return root
