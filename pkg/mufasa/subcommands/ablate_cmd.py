# coding: utf-8

import os
import sys

from mufasa import cli
from mufasa.ablation import run_sweep, summarize, sweep_table
from mufasa.config import cli_config
from mufasa.fsops import write_jsonl
from mufasa.metadata import record_run
import mufasa.subcommands.args as args

title = 'ablate'
parameters = {'description': 'Compare the full model with its ablation '
                             'variants over several seeds'}

arguments = args.common

ABLATION_FNAME = 'ablation.jsonl'
SUMMARY_FNAME = 'ablation_summary.jsonl'


def runcmd(config_path, seed=None, output=None, data_items=None,
           data_interactions=None, variant=None):
    # The variant list comes from the ablate section
    config = cli_config(config_path, seed, output, data_items,
                        data_interactions, variant)
    metric = config['ablate']['metric']

    rows = run_sweep(config)
    summary = summarize(rows, metric)

    write_jsonl(os.path.join(config.output, ABLATION_FNAME),
                [row.to_record() for row in rows])
    write_jsonl(os.path.join(config.output, SUMMARY_FNAME), summary)
    print(sweep_table(summary, metric))
    record_run(config.output, title, config)
    return rows


runscript = cli.subcommand_script(sys.modules[__name__])
