import pytest
import full_match

from conform.config import Settings, load_config, parse_config
from conform.domain import BoundedDomain
from conform.enumerative import EnumerativeSynthesizer
from conform.errors import ConfigError
from conform.plugins import SubprocessSynthesizer
from conform.solver import Backend


def test_parse_config():
    text = '# budget\nbudget.k = 3\nseed = 7  # fixed\n\nsolver.cmd = z3 -in -T:5\nbudget.wall_clock_s = 30\n'

    assert parse_config(text) == {'budget_k': 3, 'seed': 7, 'solver_cmd': 'z3 -in -T:5', 'budget_wall_clock_s': 30.0}
    assert isinstance(parse_config('budget.wall_clock_s = 30')['budget_wall_clock_s'], float)


@pytest.mark.parametrize(
    ['text', 'message'],
    [
        ('seed 7', 'conform.cfg, line 1: expected "key = value", got "seed 7"'),
        ('\ncolour = red', 'conform.cfg, line 2: unknown setting "colour"'),
        ('budget.k = many', 'conform.cfg, line 1: "many" is not a valid value for "budget.k"'),
        ('domain.int_lo = 1.5', 'conform.cfg, line 1: "1.5" is not a valid value for "domain.int_lo"'),
    ],
)
def test_wrong_lines(text, message):
    with pytest.raises(ConfigError, match=full_match(message)):
        parse_config(text, 'conform.cfg')


@pytest.mark.parametrize(
    ['key', 'field'],
    [
        ('budget.k', 'budget_k'),
        ('solver-timeout-ms', 'solver_timeout_ms'),
        ('seed', 'seed'),
    ],
)
def test_field_names(key, field):
    assert Settings.field_of(key) == field


def test_merge_skips_missing_values():
    settings = Settings().merge({'budget.k': 2, 'seed': None})

    assert settings.budget_k == 2
    assert settings.seed == 0


def test_merge_refuses_unknown_keys():
    with pytest.raises(ConfigError, match=full_match('unknown setting "colour"')):
        Settings().merge({'colour': 'red'})


@pytest.mark.parametrize(
    ['arguments', 'message'],
    [
        ({'solver_backend': 'magic'}, 'unknown solver backend "magic"'),
        ({'synth_builtin': 'magic'}, 'unknown builtin synthesizer "magic"'),
    ],
)
def test_wrong_choices(arguments, message):
    with pytest.raises(ConfigError, match=full_match(message)):
        Settings(**arguments)


def test_derived_objects():
    settings = Settings(domain_int_lo=-2, domain_int_hi=3, budget_k=4, solver_backend='smt')

    assert settings.domain == BoundedDomain(-2, 3, 3)
    assert settings.budget.k == 4
    assert settings.solver_config.backend is Backend.SMT
    assert settings.solver_config.domain == settings.domain
    assert settings.solver().config == settings.solver_config


def test_invalid_domain_and_budget_become_config_errors():
    with pytest.raises(ConfigError, match=full_match('The lower bound 5 of the domain is above the upper bound 1.')):
        Settings(domain_int_lo=5, domain_int_hi=1).domain

    with pytest.raises(ConfigError, match=full_match('At least one patch per campaign is needed, got k=0.')):
        Settings(budget_k=0).budget


def test_synthesizer_choice():
    assert isinstance(Settings().synthesizer(), EnumerativeSynthesizer)
    assert isinstance(Settings(synth_cmd='some-tool').synthesizer(), SubprocessSynthesizer)


def test_enumerative_synthesizer_follows_the_solver_settings():
    settings = Settings(solver_backend='smt', solver_timeout_ms=700, domain_int_lo=-2, domain_int_hi=3)

    synthesizer = settings.synthesizer()

    assert synthesizer.solver.config == settings.solver_config
    assert synthesizer.solver.config.backend is Backend.SMT


def test_load_config_layers(tmp_path):
    path = tmp_path / 'conform.cfg'
    path.write_text('budget.k = 3\nseed = 7\n')

    settings = load_config(path, {'seed': 9, 'budget.max_campaigns': None})

    assert settings.budget_k == 3
    assert settings.seed == 9
    assert settings.budget_max_campaigns == 5


def test_load_config_without_a_file():
    assert load_config() == Settings()
    assert load_config(overrides={'metrics.mutations': 5}).metrics_mutations == 5


def test_missing_config_file(tmp_path):
    path = tmp_path / 'missing.cfg'

    with pytest.raises(ConfigError, match=full_match(f'cannot read the configuration file "{path}"')):
        load_config(path)


def test_file_errors_name_the_file(tmp_path):
    path = tmp_path / 'conform.cfg'
    path.write_text('seed = 1\nbudget.k\n')

    with pytest.raises(ConfigError, match=full_match(f'{path}, line 2: expected "key = value", got "budget.k"')):
        load_config(path)
