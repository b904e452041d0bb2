from contextlib import contextmanager
import copy
import os
from pathlib import Path

import numpy as np
import yaml

from mufasa.catalog import Catalog, ItemRecord, UserRecord
from mufasa.config import RunConfig

testdir = Path().cwd() / Path('test')
tmpdir = testdir / 'tmp'
outdir = tmpdir / 'output'

config_path = tmpdir / 'config.yaml'

print('tmpdir: {}'.format(tmpdir))

# Small enough for a complete pipeline in a few seconds
config = {
    'seed': 0,
    'd': 8,
    'output': str(outdir),
    'batch_size': 16,
    'learning_rate': 0.01,
    'data': {
        'synthetic': {
            'num_genres': 4,
            'items_per_genre': 6,
            'num_users': 30,
            'run_min': 2,
            'run_max': 4,
            'length_min': 10,
            'length_max': 20,
        },
        'cf': {
            'epochs': 2,
            'batch_size': 64,
        },
    },
    'sal': {
        'P': 4,
    },
    'train': {
        'stage1_epochs': 1,
        'stage2_epochs': 1,
        'max_context': 16,
    },
    'eval': {
        'protocol': 'both',
        'hr_ks': [10, 20],
        'recall_ks': [5, 10, 20],
        'holdout_users': 5,
    },
    'ablate': {
        'variants': ['full', 'no_sal'],
        'seeds': [0],
    },
    'bench': {
        'lengths': [20, 40],
        'd': 8,
        'repeats': 1,
    },
    'gradcheck': {
        'd': 4,
        'L': 6,
        'N': 3,
    },
}


@contextmanager
def cd(directory):
    """
    Context manager to change into a directory and
    change back to original directory when complete
    """
    old_dir = Path.cwd()
    os.chdir(directory)
    try:
        yield
    finally:
        os.chdir(old_dir)


def write_config(config, path=config_path):
    with path.open('w') as file:
        file.write(yaml.dump(config, default_flow_style=False,
                   sort_keys=False))


def run_config(**overrides):
    return RunConfig(copy.deepcopy(config), overrides)


def make_item(index, d=4, M=4, genre=None, title=True, tokens=5, seed=None):
    """Random item with id ``i<index>``"""
    rng = np.random.default_rng(index if seed is None else seed)
    return ItemRecord(
        item_id=f'i{index:03d}',
        modalities=rng.normal(size=(M, d)),
        title_emb=rng.normal(size=d) if title else None,
        cf_emb=rng.normal(size=d),
        title_token_count=tokens,
        genre_label=genre,
    )


def make_catalog(n_items=10, d=4, M=4, genres=None):
    return Catalog([make_item(i, d, M,
                              genre=None if genres is None else i % genres)
                    for i in range(n_items)])


def make_users(catalog, n_users=6, length=8, seed=0):
    rng = np.random.default_rng(seed)
    ids = catalog.ids
    return [UserRecord(f'u{u:03d}',
                       [ids[i] for i in rng.integers(len(ids), size=length)])
            for u in range(n_users)]
