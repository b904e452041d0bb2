import errno
import os
import shutil
import stat

import pytest

from mufasa.errors import ConfigError
from mufasa.fsops import (
    canonical_json,
    config_hash,
    mkdir_p,
    read_config,
    read_jsonl,
    write_jsonl,
)

from test.common import tmpdir, cd


def setup_module(module):
    try:
        shutil.rmtree(tmpdir)
    except FileNotFoundError:
        pass
    tmpdir.mkdir()


def teardown_module(module):
    try:
        shutil.rmtree(tmpdir)
    except Exception as e:
        print(e)


def test_mkdir_p():
    path = tmpdir / 'a' / 'b'
    mkdir_p(path)
    mkdir_p(path)
    assert path.is_dir()


def test_read_config_missing_default(capsys):
    with cd(tmpdir):
        assert read_config() == {}
    assert 'not found' in capsys.readouterr().out


def test_read_config_missing_explicit():
    with pytest.raises(ConfigError, match='nope.yaml') as exc:
        read_config(tmpdir / 'nope.yaml')
    assert exc.value.__cause__.errno == errno.ENOENT


def test_read_config_malformed():
    path = tmpdir / 'broken.yaml'
    path.write_text('seed: [1, 2\n')
    with pytest.raises(ConfigError, match='Malformed configuration file'):
        read_config(path)


def test_read_config_not_a_mapping():
    path = tmpdir / 'list.yaml'
    path.write_text('- seed\n- d\n')
    with pytest.raises(ConfigError, match='must hold a mapping'):
        read_config(path)


def test_read_config_empty_file():
    path = tmpdir / 'empty.yaml'
    path.touch()
    assert read_config(path) == {}


def test_read_config_unreadable():
    path = tmpdir / 'locked.yaml'
    path.write_text('seed: 1\n')
    os.chmod(path, 0)
    try:
        if os.access(path, os.R_OK):
            pytest.skip('running with elevated permissions')
        with pytest.raises(ConfigError):
            read_config(path)
    finally:
        os.chmod(path, stat.S_IWUSR | stat.S_IREAD)
    assert read_config(path) == {'seed': 1}


def test_read_config_yaml_duplicate_key():
    path = tmpdir / 'config.yaml'
    path.write_text('seed: 1\nseed: 2\n')
    warn_msg = "Duplicate key 'seed' in .*config.yaml: "
    warn_msg += "value '2' replaces '1'"
    with pytest.warns(UserWarning, match=warn_msg):
        config = read_config(path)
    assert config['seed'] == 2


def test_config_hash_ignores_key_order():
    first = {'a': 1, 'b': {'c': [1, 2], 'd': None}}
    second = {'b': {'d': None, 'c': [1, 2]}, 'a': 1}
    assert canonical_json(first) == canonical_json(second)
    assert config_hash(first) == config_hash(second)
    assert len(config_hash(first)) == 64
    assert config_hash(first) != config_hash({'a': 2, 'b': first['b']})


def test_jsonl_files():
    path = tmpdir / 'sub' / 'records.jsonl'
    records = [{'metric': 'HR', 'k': 10, 'value': 0.5}, {'k': None}]
    write_jsonl(str(path), records)
    assert len(path.read_text().splitlines()) == 2
    assert read_jsonl(path) == records
