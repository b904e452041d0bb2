# coding: utf-8

import os
import sys

from mufasa import cli
from mufasa.ablation import make_splits, training_users
from mufasa.config import cli_config
from mufasa.dataset import load_dataset
from mufasa.experiment import CHECKPOINT_FNAME, Experiment, save_checkpoint
from mufasa.metadata import record_run
from mufasa.metrics import format_table
import mufasa.subcommands.args as args

title = 'train'
parameters = {'description': 'Train the fusion layer, then the sparse '
                             'attention layer, and save a checkpoint'}

arguments = args.common


def final_losses(records):
    """Last recorded value of every (stage, component)."""
    last = {}
    for record in records:
        last[(record['stage'], record['component'])] = (record['epoch'],
                                                        record['value'])
    return [[stage, component, epoch, value]
            for (stage, component), (epoch, value) in last.items()]


def runcmd(config_path, seed=None, output=None, data_items=None,
           data_interactions=None, variant=None):
    config = cli_config(config_path, seed, output, data_items,
                        data_interactions, variant)

    dataset = load_dataset(config)
    splits = make_splits(config, dataset.users)
    expt = Experiment(config, dataset.catalog, training_users(splits))
    print(f'mufasa: training {expt.variant} on {len(expt.train_users)} '
          f'users, {len(dataset.catalog)} items')
    expt.train()

    checkpoint = save_checkpoint(
        expt.model, os.path.join(config.output, CHECKPOINT_FNAME),
        expt.meta()
    )
    expt.write_loss_curve(config.output)

    rows = final_losses(expt.loss_records)
    if rows:
        print(format_table(['stage', 'component', 'epoch', 'loss'], rows))
    print(f'mufasa: wrote {checkpoint}')
    record_run(config.output, title, config, expt.timings)


runscript = cli.subcommand_script(sys.modules[__name__])
