# coding: utf-8

import os
import sys

from mufasa import cli
from mufasa.ablation import evaluate_all, make_splits
from mufasa.config import cli_config
from mufasa.dataset import load_dataset
from mufasa.experiment import CHECKPOINT_FNAME, load_checkpoint
from mufasa.fsops import write_jsonl
from mufasa.metadata import record_run
from mufasa.metrics import report_table
import mufasa.subcommands.args as args

title = 'eval'
parameters = {'description': 'Evaluate a checkpoint with the leave-one-out '
                             'and zero-shot protocols'}

arguments = args.common + [args.checkpoint]

METRICS_FNAME = 'metrics.jsonl'


def runcmd(config_path, seed=None, output=None, data_items=None,
           data_interactions=None, variant=None, checkpoint=None):
    config = cli_config(config_path, seed, output, data_items,
                        data_interactions, variant)
    if checkpoint is None:
        checkpoint = os.path.join(config.output, CHECKPOINT_FNAME)

    model, meta = load_checkpoint(checkpoint, config)
    # Splits and fingerprint follow the run that produced the checkpoint
    config = config.with_overrides(seed=meta['seed'], variant=meta['variant'])

    dataset = load_dataset(config)
    reports = evaluate_all(model, dataset.catalog,
                           make_splits(config, dataset.users), config)

    records = []
    for protocol, report in reports.items():
        print(f'mufasa: {protocol} ({report.users} users, variant '
              f"{meta['variant']}, {model.parameter_count()} parameters)")
        print(report_table(report))
        records.extend(dict(record, protocol=protocol)
                       for record in report.to_records())
    write_jsonl(os.path.join(config.output, METRICS_FNAME), records)
    record_run(config.output, title, config)
    return reports


runscript = cli.subcommand_script(sys.modules[__name__])
