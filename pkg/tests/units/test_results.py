from emptylog import MemoryLogger

from conform.coevolution import Budget, automated_assurance, co_evolve
from conform.results import write_results
from conform.wire import Hunk, Patch


ABS = 'method Abs(x: int) returns (r: int) ensures r >= 0 { if x < 0 { r := -x; } else { r := x; } }'
ABS_BROKEN = 'method Abs(x: int) returns (r: int) ensures r >= 0 { if x < 0 { r := x; } else { r := x; } }'

FIX = Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := -x;')


class ScriptedSynthesizer:
    name = 'scripted'

    def __init__(self, *hunks):
        self.hunks = hunks

    def propose(self, request):
        return [Patch((hunk,), self.name, request.campaign) for hunk in self.hunks]


def test_repaired_candidate_is_written(tmp_path):
    logger = MemoryLogger()
    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX))

    root = write_results(tmp_path / 'out', result, logger=logger)
    candidate = root / 'candidate-1'

    assert (root / 'summary.txt').read_text() == 'status: verified\ncampaigns: 1\nverified: 1\ncandidate-1: c1 (1.1)\n'
    assert (candidate / 'program.mvl').read_text() == result.verified[0].source
    assert (candidate / 'transcript.txt').read_text().startswith('# campaign 1: patch 1.1\n# modification 1\n<file>program.mvl</file>\n')
    assert (candidate / 'run.log').read_text().startswith('campaign 1: candidate c0\n')
    assert (root / 'run.log').read_text() == (candidate / 'run.log').read_text()
    assert not (candidate / 'spec.txt').exists()
    assert logger.data.info[0].message == f'The results of 1 candidates were written to "{root}".'


def test_conforming_input_is_its_own_candidate(tmp_path):
    root = write_results(tmp_path, co_evolve(ABS, ScriptedSynthesizer()))

    assert (root / 'summary.txt').read_text() == 'status: verified\ncampaigns: 0\nverified: 1\ncandidate-1: c0 (input)\n'
    assert (root / 'run.log').read_text() == ''
    assert (root / 'candidate-1' / 'transcript.txt').read_text() == ''


def test_nothing_verified(tmp_path):
    root = write_results(tmp_path, co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX), budget=Budget(max_campaigns=0)))

    assert (root / 'summary.txt').read_text() == 'status: budget_exhausted\ncampaigns: 0\nverified: 0\n'
    assert not (root / 'candidate-1').exists()


def test_explanations_and_timings(tmp_path):
    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX))

    log = (write_results(tmp_path, result, timings=True, explain=True) / 'run.log').read_text()

    assert '  intent:\n    partitions: 2 (conforming 1, nonconforming 1, unknown 0)\n' in log
    assert '  elapsed: ' in log


def test_assurance_writes_specifications(tmp_path):
    result = automated_assurance(ABS_BROKEN, [], ScriptedSynthesizer(FIX))

    root = write_results(tmp_path, result)

    assert (root / 'candidate-1' / 'spec.txt').read_text() == 'method Abs\n  ensures r >= 0\ntests: none\n'
