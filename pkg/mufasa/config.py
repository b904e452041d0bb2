"""mufasa.config
   ==============

   Run configuration: defaults, schema validation, command line overrides
   and typed views for each component.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

import copy

import jsonschema

from mufasa.cforacle import CFConfig
from mufasa.errors import ConfigError
from mufasa.evaluate import EvalSettings
from mufasa.fsops import config_hash, read_config
from mufasa.mfl import MFLConfig
from mufasa.models import index as model_index
from mufasa.optimizers import index as optimizer_index
from mufasa.sal import AGGREGATORS, SALConfig
from mufasa.split import LEAVE_ONE_OUT, ZERO_SHOT, SplitSpec
from mufasa.synthetic import SyntheticConfig

PROTOCOLS = (LEAVE_ONE_OUT, ZERO_SHOT, 'both')
METRIC_PATTERN = r'^(HR|NDCG|R)@[1-9][0-9]*$'

DEFAULTS = {
    'seed': 0,
    'd': 32,
    'variant': 'full',
    'output': 'output',
    'batch_size': 64,
    'learning_rate': 0.01,
    'optimizer': 'adam',
    'data': {
        'items': None,
        'interactions': None,
        'min_item_interactions': 0,
        'synthetic': {
            'num_genres': 8,
            'items_per_genre': 50,
            'num_users': 2000,
            'run_min': 4,
            'run_max': 12,
            'length_min': 40,
            'length_max': 200,
            'modality_noise': 0.3,
            'title_noise': 0.1,
            'style_count': 4,
            'style_scale': 1.0,
            'degraded_title_fraction': 0.05,
            'preference_concentration': 0.5,
            'taste_strength': 20.0,
        },
        'cf': {
            'epochs': 20,
            'learning_rate': 0.05,
            'negatives': 4,
            'regularization': 1e-4,
            'batch_size': 1024,
        },
    },
    'mfl': {
        'alpha': [0.5, 0.25, 0.15, 0.1],
        'tau_title': 0.07,
        'tau_fus': 0.07,
        'sigma': 0.05,
        'negatives_K': None,
        'pair_budget': None,
        'exact_pairs_limit': 32,
        'min_title_tokens': 3,
    },
    'sal': {
        'P': 8,
        'k': 2,
        'tau': 0.07,
        'aggregator': 'linear',
        'window_inclusive': False,
        'window_threshold': 30,
        'window_long': 8,
        'window_short': 4,
    },
    'train': {
        'stage1_epochs': 20,
        'stage2_epochs': 20,
        'freeze_mfl': True,
        'max_context': 64,
    },
    'eval': {
        'protocol': LEAVE_ONE_OUT,
        'hr_ks': [10, 20],
        'recall_ks': [5, 10, 20, 50, 100],
        'holdout_users': 200,
        'targets_per_user': 3,
        'max_history': None,
        'cold_start_k': 10,
    },
    'ablate': {
        'variants': ['full', 'no_mfl', 'no_sal', 'full_attention'],
        'seeds': [0, 1, 2],
        'history_lengths': [None],
        'protocol': 'both',
        'metric': 'R@20',
    },
    'bench': {
        'lengths': [40, 80, 160, 320],
        'P': 8,
        'W': 8,
        'k': 2,
        'd': 32,
        'repeats': 3,
    },
    'gradcheck': {
        'd': 6,
        'L': 10,
        'N': 4,
        'tau': 0.2,
        'h': 1e-5,
        'tol': 1e-4,
    },
}


def _obj(properties):
    return {
        'type': 'object',
        'properties': properties,
        'additionalProperties': False,
    }


_POS_INT = {'type': 'integer', 'minimum': 1}
_NONNEG_INT = {'type': 'integer', 'minimum': 0}
_POS_NUM = {'type': 'number', 'exclusiveMinimum': 0}
_NONNEG_NUM = {'type': 'number', 'minimum': 0}
_OPT_POS_INT = {'type': ['integer', 'null'], 'minimum': 1}
_OPT_PATH = {'type': ['string', 'null']}
_KS = {'type': 'array', 'items': _POS_INT, 'minItems': 1}

SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    **_obj({
        'seed': _NONNEG_INT,
        'd': _POS_INT,
        'variant': {'enum': sorted(model_index)},
        'output': {'type': 'string'},
        'batch_size': {'type': 'integer', 'minimum': 2},
        'learning_rate': _POS_NUM,
        'optimizer': {'enum': sorted(optimizer_index)},
        'data': _obj({
            'items': _OPT_PATH,
            'interactions': _OPT_PATH,
            'min_item_interactions': _NONNEG_INT,
            'synthetic': _obj({
                'num_genres': {'type': 'integer', 'minimum': 2},
                'items_per_genre': _POS_INT,
                'num_users': _NONNEG_INT,
                'run_min': _POS_INT,
                'run_max': _POS_INT,
                'length_min': {'type': 'integer', 'minimum': 2},
                'length_max': {'type': 'integer', 'minimum': 2},
                'modality_noise': _NONNEG_NUM,
                'title_noise': _NONNEG_NUM,
                'style_count': _POS_INT,
                'style_scale': _NONNEG_NUM,
                'degraded_title_fraction': {'type': 'number', 'minimum': 0,
                                            'maximum': 1},
                'preference_concentration': _POS_NUM,
                'taste_strength': _NONNEG_NUM,
            }),
            'cf': _obj({
                'epochs': _NONNEG_INT,
                'learning_rate': _POS_NUM,
                'negatives': _POS_INT,
                'regularization': _NONNEG_NUM,
                'batch_size': _POS_INT,
            }),
        }),
        'mfl': _obj({
            'alpha': {'type': 'array', 'items': _NONNEG_NUM,
                      'minItems': 4, 'maxItems': 4},
            'tau_title': _POS_NUM,
            'tau_fus': _POS_NUM,
            'sigma': _NONNEG_NUM,
            'negatives_K': _OPT_POS_INT,
            'pair_budget': _OPT_POS_INT,
            'exact_pairs_limit': _POS_INT,
            'min_title_tokens': _NONNEG_INT,
        }),
        'sal': _obj({
            'P': _POS_INT,
            'k': _POS_INT,
            'tau': _POS_NUM,
            'aggregator': {'enum': list(AGGREGATORS)},
            'window_inclusive': {'type': 'boolean'},
            'window_threshold': _NONNEG_INT,
            'window_long': _POS_INT,
            'window_short': _POS_INT,
        }),
        'train': _obj({
            'stage1_epochs': _NONNEG_INT,
            'stage2_epochs': _NONNEG_INT,
            'freeze_mfl': {'type': 'boolean'},
            'max_context': _OPT_POS_INT,
        }),
        'eval': _obj({
            'protocol': {'enum': list(PROTOCOLS)},
            'hr_ks': _KS,
            'recall_ks': _KS,
            'holdout_users': _NONNEG_INT,
            'targets_per_user': _POS_INT,
            'max_history': _OPT_POS_INT,
            'cold_start_k': _POS_INT,
        }),
        'ablate': _obj({
            'variants': {'type': 'array', 'minItems': 1,
                         'items': {'enum': sorted(model_index)}},
            'seeds': {'type': 'array', 'items': _NONNEG_INT, 'minItems': 1},
            'history_lengths': {'type': 'array', 'minItems': 1,
                                'items': _OPT_POS_INT},
            'protocol': {'enum': list(PROTOCOLS)},
            'metric': {'type': 'string', 'pattern': METRIC_PATTERN},
        }),
        'bench': _obj({
            'lengths': {'type': 'array', 'items': _POS_INT, 'minItems': 1},
            'P': _POS_INT,
            'W': _POS_INT,
            'k': _POS_INT,
            'd': _POS_INT,
            'repeats': _POS_INT,
        }),
        'gradcheck': _obj({
            'd': _POS_INT,
            'L': {'type': 'integer', 'minimum': 2},
            'N': {'type': 'integer', 'minimum': 2},
            'tau': _POS_NUM,
            'h': _POS_NUM,
            'tol': _POS_NUM,
        }),
    }),
}


def merge(base, override):
    """Recursively overlay ``override`` onto a copy of ``base``."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def set_dotted(config, key, value):
    """Set ``a.b.c`` style keys inside nested dicts."""
    *parents, leaf = key.split('.')
    node = config
    for parent in parents:
        node = node.setdefault(parent, {})
    node[leaf] = value


def validate(config):
    """Check ``config`` against the schema and cross-field rules."""
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.path))
    if errors:
        error = errors[0]
        location = '.'.join(str(p) for p in error.path) or '<root>'
        raise ConfigError(f'Invalid configuration at {location}: '
                          f'{error.message}')

    synthetic = config['data']['synthetic']
    if synthetic['num_genres'] > config['d']:
        raise ConfigError(
            f"data.synthetic.num_genres ({synthetic['num_genres']}) cannot "
            f"exceed d ({config['d']})"
        )
    if synthetic['run_min'] > synthetic['run_max']:
        raise ConfigError('data.synthetic.run_min exceeds run_max')
    if synthetic['length_min'] > synthetic['length_max']:
        raise ConfigError('data.synthetic.length_min exceeds length_max')
    if config['gradcheck']['d'] > 16:
        raise ConfigError('gradcheck.d must be at most 16')
    if bool(config['data']['items']) != bool(config['data']['interactions']):
        raise ConfigError('data.items and data.interactions must be given '
                          'together')

    family, k = config['ablate']['metric'].split('@')
    protocol = config['ablate']['protocol']
    ks = 'recall_ks' if family == 'R' else 'hr_ks'
    needs = ZERO_SHOT if family == 'R' else LEAVE_ONE_OUT
    if protocol not in (needs, 'both'):
        raise ConfigError(
            f"ablate.metric {config['ablate']['metric']} is not reported by "
            f"the {protocol} protocol"
        )
    if int(k) not in config['eval'][ks]:
        raise ConfigError(
            f"ablate.metric {config['ablate']['metric']} needs k={k} in "
            f"eval.{ks}"
        )


class RunConfig(object):
    """A validated run configuration.

    Parameters
    ----------
    config : dict, optional
        User settings, overlaid on ``DEFAULTS``.
    overrides : dict, optional
        Dotted keys (``'data.items'``) applied after ``config``; None
        values are ignored.
    """

    def __init__(self, config=None, overrides=None):
        merged = merge(DEFAULTS, config or {})
        for key, value in (overrides or {}).items():
            if value is not None:
                set_dotted(merged, key, value)
        validate(merged)
        self.data = merged

    @classmethod
    def from_file(cls, config_path=None, overrides=None):
        return cls(read_config(config_path), overrides)

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self):
        return self.data['seed']

    @property
    def d(self):
        return self.data['d']

    @property
    def variant(self):
        return self.data['variant']

    @property
    def output(self):
        return self.data['output']

    def hash(self):
        """Hash of every setting except where results are written."""
        return config_hash({key: value for key, value in self.data.items()
                            if key != 'output'})

    def with_overrides(self, **overrides):
        """A new validated config with dotted-key overrides applied."""
        return RunConfig(self.data, overrides)

    def mfl_config(self):
        return MFLConfig(**self.data['mfl'])

    def sal_config(self):
        return SALConfig(**self.data['sal'])

    def synthetic_config(self):
        return SyntheticConfig(d=self.d, seed=self.seed,
                               **self.data['data']['synthetic'])

    def cf_config(self):
        return CFConfig(rank=self.d, seed=self.seed,
                        **self.data['data']['cf'])

    def split_specs(self):
        eval_config = self.data['eval']
        protocol = eval_config['protocol']
        modes = [LEAVE_ONE_OUT, ZERO_SHOT] if protocol == 'both' \
            else [protocol]
        return [SplitSpec(mode=mode,
                          holdout_users=eval_config['holdout_users'],
                          targets_per_user=eval_config['targets_per_user'],
                          seed=self.seed)
                for mode in modes]

    def eval_settings(self, parameter_count=None):
        eval_config = self.data['eval']
        fingerprint = {
            'variant': self.variant,
            'config_hash': self.hash(),
        }
        if parameter_count is not None:
            fingerprint['parameters'] = parameter_count
        return EvalSettings(hr_ks=tuple(eval_config['hr_ks']),
                            recall_ks=tuple(eval_config['recall_ks']),
                            max_history=eval_config['max_history'],
                            cold_start_k=eval_config['cold_start_k'],
                            fingerprint=fingerprint)


def cli_config(config_path=None, seed=None, output=None, data_items=None,
               data_interactions=None, variant=None):
    """Read the configuration file and apply command line overrides."""
    return RunConfig.from_file(config_path, {
        'seed': seed,
        'output': output,
        'data.items': data_items,
        'data.interactions': data_interactions,
        'variant': variant,
    })
