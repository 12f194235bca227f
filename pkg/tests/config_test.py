import pytest

from seqdisc.config import RunConfig, read_config_file
from seqdisc.exceptions import OutOfRange


def write_config(tmpdir, text):
    path = tmpdir.join('run.conf')
    path.write(text)
    return str(path)


def test_defaults():
    config = RunConfig.resolve('optimize')
    assert (config.s, config.eta1, config.scheme) == (0.25, 0.5, 'min-failure')
    assert config.output_format == 'json'
    assert not config.explicit_strategy


def test_tables_default_to_csv():
    assert RunConfig.resolve('sweep').output_format == 'csv'
    assert RunConfig.resolve('figure').output_format == 'csv'
    assert RunConfig.resolve('sweep', {'format': 'json'}).output_format == 'json'


def test_flags_override_the_config_file(tmpdir):
    path = write_config(tmpdir, """
        # equal priors, just past the critical overlap
        s = 0.2
        eta1 = 0.4   # trailing comments are fine
        scheme = success-only
        dump-unitaries = yes
    """)
    config = RunConfig.resolve('optimize', {'s': 0.3, 'eta1': None}, path)
    assert config.s == 0.3
    assert config.eta1 == 0.4
    assert config.scheme == 'success-only'
    assert config.dump_unitaries is True


def test_flag_names_accept_dashes():
    config = RunConfig.resolve('simulate', {'spool-dir': '/tmp/spool'})
    assert config.spool_dir == '/tmp/spool'


def test_explicit_strategy_needs_all_three_parameters():
    assert not RunConfig.resolve('optimize', {'t': 0.5, 'q1b': 0.5}).explicit_strategy
    config = RunConfig.resolve('optimize', {'t': 0.5, 'q1b': 0.5, 'q1c': 0.5})
    assert config.explicit_strategy


@pytest.mark.parametrize('flags', [
    {'colour': 'blue'},
    {'s': 'abc'},
    {'scheme': 'greedy'},
    {'single': 'maybe'},
    {'s': 1.0},
    {'eta1': 0.0},
    {'c': 2.0},
    {'resolution': 1},
    {'trials': 0},
    {'seed': 2 ** 64},
    {'start': 0.5, 'stop': 0.2},
    {'stop': float('inf')},
])
def test_bad_options_are_out_of_range(flags):
    with pytest.raises(OutOfRange):
        RunConfig.resolve('sweep', flags)


def test_config_file_lines_need_an_equals_sign(tmpdir):
    path = write_config(tmpdir, "s 0.2\n")
    with pytest.raises(OutOfRange):
        read_config_file(path)


def test_missing_config_file():
    with pytest.raises(OSError):
        RunConfig.resolve('optimize', config_path='/nonexistent/run.conf')
