"""mufasa.dataset
   ==============

   Assemble the catalog and interaction sequences a run works on, either
   from files or from the synthetic generator.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass
import os
from typing import List

from mufasa.catalog import (
    Catalog,
    UserRecord,
    filter_min_interactions,
    load_catalog,
    load_interactions,
    save_catalog,
    save_interactions,
)
from mufasa.cforacle import attach_cf, cf_oracle
from mufasa.split import ZERO_SHOT, cf_training_users, split
from mufasa.synthetic import generate_synthetic

ITEMS_FNAME = 'items.jsonl'
INTERACTIONS_FNAME = 'interactions.jsonl'


@dataclass
class Dataset:
    catalog: Catalog
    users: List[UserRecord]


def holdout_ids(users, config):
    """Users any configured zero-shot split keeps out of training."""
    ids = set()
    for spec in config.split_specs():
        if spec.mode == ZERO_SHOT:
            ids |= {case.user_id for case in split(users, spec).test}
    return ids


def generate_dataset(config):
    """Synthetic catalog and users with CF embeddings fitted on the
    interactions every configured split allows for training."""
    catalog, users = generate_synthetic(config.synthetic_config())
    catalog, users = filter_min_interactions(
        catalog, users, config['data']['min_item_interactions']
    )
    visible = cf_training_users(users, holdout_ids(users, config))
    attach_cf(catalog, cf_oracle(visible, catalog, config.cf_config()))
    return Dataset(catalog, users)


def load_dataset(config):
    """Files named by the configuration, or a freshly generated corpus."""
    data_config = config['data']
    if not data_config['items']:
        return generate_dataset(config)
    catalog = load_catalog(data_config['items'])
    users = load_interactions(data_config['interactions'], catalog)
    catalog, users = filter_min_interactions(
        catalog, users, data_config['min_item_interactions']
    )
    return Dataset(catalog, users)


def save_dataset(dataset, output_path):
    items_path = os.path.join(output_path, ITEMS_FNAME)
    interactions_path = os.path.join(output_path, INTERACTIONS_FNAME)
    save_catalog(dataset.catalog, items_path)
    save_interactions(dataset.users, interactions_path)
    return items_path, interactions_path
