"""mufasa.fsops
   ============

   File system helpers: directories, the YAML run configuration and
   line-delimited JSON records.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

# Standard library
import errno
import hashlib
import json
import os
import warnings

# Extensions
import yaml

# Local
from mufasa.errors import ConfigError

DEFAULT_CONFIG_FNAME = 'config.yaml'


def mkdir_p(path):
    """Create ``path`` and any missing parents; existing directories are
    fine."""
    os.makedirs(path, exist_ok=True)


class DuplicateKeyWarnLoader(yaml.SafeLoader):
    """Safe loader that warns about repeated mapping keys.

    PyYAML silently keeps the last value of a repeated key. The last value
    still wins here, but the user is told which setting was shadowed.
    """

    def construct_mapping(self, node, deep=False):
        seen = {}
        for key_node, value_node in node.value:
            key = self.construct_object(key_node, deep=deep)
            value = self.construct_object(value_node, deep=deep)
            if key in seen:
                warnings.warn(
                    f"Duplicate key '{key}' in {self.name}: value "
                    f"'{value}' replaces '{seen[key]}'"
                )
            seen[key] = value

        return super().construct_mapping(node, deep)


def read_config(config_fname=None):
    """Return the settings of a YAML configuration file as a dict.

    Without ``config_fname`` the default ``config.yaml`` is read, and a
    missing default file only prints a warning. Any other unreadable or
    malformed file raises ``ConfigError``.
    """
    explicit = bool(config_fname)
    config_fname = config_fname or DEFAULT_CONFIG_FNAME

    try:
        with open(config_fname, 'r') as config_file:
            config = yaml.load(config_file, Loader=DuplicateKeyWarnLoader)
    except IOError as exc:
        if explicit or exc.errno != errno.ENOENT:
            raise ConfigError(
                f'Cannot read configuration file {config_fname}: '
                f'{exc.strerror}'
            ) from exc
        print(f'mufasa: warning: Configuration file {config_fname} not '
              'found!')
        return {}
    except yaml.YAMLError as exc:
        raise ConfigError(
            f'Malformed configuration file {config_fname}: {exc}'
        ) from exc

    # An empty document loads as None
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError(
            f'Configuration file {config_fname} must hold a mapping, got '
            f'{type(config).__name__}'
        )
    return config


def canonical_json(obj):
    """Stable JSON text: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def config_hash(config):
    """SHA-256 hex digest of the canonical JSON of ``config``."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def write_jsonl(path, records):
    """Write records to a line-delimited JSON file, one object per line."""
    directory = os.path.dirname(path)
    if directory:
        mkdir_p(directory)
    with open(path, 'w') as stream:
        for record in records:
            stream.write(json.dumps(record) + '\n')


def read_jsonl(path):
    with open(path) as stream:
        return [json.loads(line) for line in stream if line.strip()]
