# coding: utf-8

import os
import sys

from mufasa import cli
from mufasa.catalog import corpus_stats
from mufasa.config import cli_config
from mufasa.dataset import generate_dataset, save_dataset
from mufasa.fsops import write_jsonl
from mufasa.metadata import record_run
from mufasa.metrics import format_table
import mufasa.subcommands.args as args

title = 'gen-data'
parameters = {'description': 'Generate a synthetic catalog and interaction '
                             'sequences with planted interest blocks'}

arguments = [args.config, args.seed, args.out]

STATS_FNAME = 'stats.jsonl'


def stats_table(stats):
    return format_table(
        ['Users', 'Items', 'Interactions', 'Avg', 'Sps'],
        [[stats['users'], stats['items'], stats['interactions'],
          float(stats['avg']), f"{100.0 * stats['sparsity']:.2f}%"]]
    )


def runcmd(config_path, seed=None, output=None):
    config = cli_config(config_path, seed=seed, output=output)

    dataset = generate_dataset(config)
    items_path, interactions_path = save_dataset(dataset, config.output)
    stats = corpus_stats(dataset.catalog, dataset.users)
    write_jsonl(os.path.join(config.output, STATS_FNAME), [stats])

    print(stats_table(stats))
    print(f'mufasa: wrote {items_path} and {interactions_path}')
    record_run(config.output, title, config)


runscript = cli.subcommand_script(sys.modules[__name__])
