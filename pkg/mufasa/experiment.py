"""mufasa.experiment
   =================

   Two-stage training of one model variant, and its checkpoints.

   Stage 1 trains the fusion network on the joint fusion objective. Stage 2
   trains the user side (and optionally the fusion network) on the in-batch
   user/item contrastive loss over random history cuts.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

# Standard Library
from collections import defaultdict
from functools import wraps
import json
import os
import time
import zipfile

# Extensions
import numpy as np

# Local
from mufasa.errors import CheckpointError, ConfigError, NonFiniteLossError
from mufasa.fsops import mkdir_p, write_jsonl
from mufasa.mfl import (
    MFLBatch,
    filter_title_quality,
    finite_component,
    mfl_objective,
)
from mufasa.models import index as model_index
from mufasa.optimizers import index as optimizer_index
from mufasa.sal import sal_contrastive_loss
from mufasa.tensor import Tape, backward, lift, stack

# Random stream of the training loop, apart from the initialisation streams
TRAIN_STREAM = 3

CHECKPOINT_FNAME = 'checkpoint.npz'
LOSS_CURVE_FNAME = 'loss_curve.jsonl'
META_KEY = '__meta__'

# Fixed archive timestamp so identical weights give identical files
ZIP_DATE = (1980, 1, 1, 0, 0, 0)


def timeit(time_name):
    """Decorator to time a function and store the elapsed time in seconds
    to the timings dictionary in the class"""
    def decorator(func):
        @wraps(func)
        def wrapper(self, *args, **kwargs):
            start_time = time.perf_counter()
            result = func(self, *args, **kwargs)
            elapsed_time = time.perf_counter() - start_time
            self.timings[time_name] = elapsed_time
            return result
        return wrapper
    return decorator


def init_model(variant, d, M, config):
    try:
        model_cls = model_index[variant]
    except KeyError:
        raise ConfigError(
            f"Unknown variant '{variant}', expected one of "
            f"{', '.join(sorted(model_index))}"
        ) from None
    return model_cls(d, M, config.mfl_config(), config.sal_config(),
                     seed=config.seed)


def init_optimizer(config, params):
    return optimizer_index[config['optimizer']](params,
                                                config['learning_rate'])


def descend(optimizer, loss, component):
    """Back-propagate ``loss`` and step, failing when a gradient or an
    updated parameter is not finite."""
    backward(loss)
    for param in optimizer.params:
        if param.grad is not None and not np.all(np.isfinite(param.grad)):
            raise NonFiniteLossError(
                component, detail=f'gradient of {param.name}'
            )
    optimizer.step()
    for param in optimizer.params:
        if not np.all(np.isfinite(param.data)):
            raise NonFiniteLossError(
                component, detail=f'update of {param.name}'
            )


def _batches(order, size):
    for start in range(0, len(order), size):
        yield order[start:start + size]


class Experiment(object):
    """Trains one variant on the training sequences of a split.

    Parameters
    ----------
    config : RunConfig
    catalog : Catalog
    train_users : list of UserRecord
    variant : str, optional
        Defaults to the configured variant.
    """

    def __init__(self, config, catalog, train_users, variant=None):
        self.config = config
        self.catalog = catalog
        self.train_users = [user for user in train_users if len(user) >= 2]
        self.variant = config.variant if variant is None else variant
        self.model = init_model(self.variant, config.d, catalog.M, config)
        self.rng = np.random.default_rng([config.seed, TRAIN_STREAM])
        self.loss_records = []
        self.timings = {}

        self.features = catalog.features()
        self.titles = catalog.titles()
        self.cf = catalog.cf()
        admitted = filter_title_quality(
            catalog, config['mfl']['min_title_tokens']
        )
        self.admitted = np.array([item.item_id in admitted
                                  for item in catalog])

    def record(self, stage, epoch, component, value):
        self.loss_records.append({
            'stage': stage,
            'epoch': epoch,
            'component': component,
            'value': float(value),
        })

    def train(self):
        self.train_mfl()
        self.train_sal()
        return self.model

    @timeit('stage1_seconds')
    def train_mfl(self):
        """Stage 1: minimise the fusion objective over shuffled item
        batches."""
        epochs = self.config['train']['stage1_epochs']
        if self.model.mfl is None or epochs == 0:
            return
        mfl_config = self.config.mfl_config()
        optimizer = init_optimizer(self.config, self.model.mfl_parameters())
        batch_size = self.config['batch_size']

        for epoch in range(epochs):
            sums, counts = defaultdict(float), defaultdict(int)
            for batch in _batches(self.rng.permutation(len(self.catalog)),
                                  batch_size):
                optimizer.zero_grads()
                with Tape():
                    total, components = mfl_objective(
                        self.model.mfl,
                        MFLBatch(self.features[batch], self.titles[batch],
                                 self.cf[batch], self.admitted[batch]),
                        mfl_config, self.rng
                    )
                descend(optimizer, total, 'total')
                components['total'] = total.item()
                for name, value in components.items():
                    sums[name] += value
                    counts[name] += 1
            for name in sums:
                self.record('mfl', epoch, name, sums[name] / counts[name])

    def _sample_cut(self, positions, max_context):
        cut = int(self.rng.integers(1, len(positions)))
        start = 0 if max_context is None else max(0, cut - max_context)
        return positions[start:cut], positions[cut]

    @timeit('stage2_seconds')
    def train_sal(self):
        """Stage 2: in-batch user/item contrast on random history cuts."""
        train_config = self.config['train']
        epochs = train_config['stage2_epochs']
        if epochs == 0 or len(self.train_users) < 2:
            return
        finetune = (self.model.mfl is not None
                    and not train_config['freeze_mfl'])
        params = self.model.user_parameters()
        if finetune:
            params = params + self.model.mfl_parameters()
        optimizer = init_optimizer(self.config, params)
        tau = self.config['sal']['tau']
        max_context = train_config['max_context']
        batch_size = self.config['batch_size']
        sequences = [self.catalog.positions(user.items)
                     for user in self.train_users]

        items = None
        if not finetune:
            items = self.model.fuse_items(self.features).numpy()

        for epoch in range(epochs):
            total, count = 0.0, 0
            for batch in _batches(self.rng.permutation(len(sequences)),
                                  batch_size):
                if len(batch) < 2:
                    continue
                cuts = [self._sample_cut(sequences[i], max_context)
                        for i in batch]
                optimizer.zero_grads()
                with Tape():
                    with finite_component('fusion'):
                        fused = (self.model.fuse_items(self.features)
                                 if finetune else lift(items))
                    with finite_component('attention'):
                        users = stack([
                            self.model.user_embedding(fused[context])
                            for context, _ in cuts
                        ])
                        targets = self.model.project_items(
                            fused[np.array([target for _, target in cuts])]
                        )
                    with finite_component('contrastive'):
                        loss = sal_contrastive_loss(users, targets, tau)
                descend(optimizer, loss, 'contrastive')
                total += loss.item()
                count += 1
            if count:
                self.record('sal', epoch, 'contrastive', total / count)

    def write_loss_curve(self, output_path):
        path = os.path.join(output_path, LOSS_CURVE_FNAME)
        write_jsonl(path, self.loss_records)
        return path

    def meta(self):
        return {
            'variant': self.variant,
            'd': self.config.d,
            'M': self.catalog.M,
            'seed': self.config.seed,
            'config_hash': self.config.hash(),
        }


def save_checkpoint(model, path, meta):
    """Write parameters and metadata to an ``.npz`` archive."""
    directory = os.path.dirname(path)
    if directory:
        mkdir_p(directory)
    arrays = dict(sorted(model.state_dict().items()))
    arrays[META_KEY] = np.array(json.dumps(meta, sort_keys=True))
    with zipfile.ZipFile(path, 'w', compression=zipfile.ZIP_STORED) as archive:
        for name, array in arrays.items():
            info = zipfile.ZipInfo(name + '.npy', date_time=ZIP_DATE)
            with archive.open(info, 'w') as stream:
                np.lib.format.write_array(stream, np.asarray(array),
                                          allow_pickle=False)
    return path


def read_checkpoint(path):
    """Return ``(state, meta)`` of a checkpoint file."""
    try:
        with np.load(path, allow_pickle=False) as archive:
            state = {name: archive[name] for name in archive.files
                     if name != META_KEY}
            meta = json.loads(str(archive[META_KEY]))
    except FileNotFoundError:
        raise CheckpointError(f'Checkpoint not found: {path}') from None
    except (KeyError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f'Unreadable checkpoint {path}: {exc}') \
            from None
    return state, meta


def load_checkpoint(path, config):
    """Rebuild the model stored in a checkpoint."""
    state, meta = read_checkpoint(path)
    model = init_model(meta['variant'], meta['d'], meta['M'],
                       config.with_overrides(seed=meta['seed']))
    model.load_state_dict(state)
    return model, meta
