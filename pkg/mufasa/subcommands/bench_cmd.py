# coding: utf-8

import os
import sys

from mufasa import cli
from mufasa.bench import run_bench
from mufasa.config import cli_config
from mufasa.fsops import write_jsonl
from mufasa.metadata import record_run
from mufasa.metrics import format_table
import mufasa.subcommands.args as args

title = 'bench'
parameters = {'description': 'Count attention score pairs and time dense '
                             'versus sparse attention over history lengths'}

arguments = [args.config, args.seed, args.out]

BENCH_FNAME = 'bench.jsonl'


def runcmd(config_path, seed=None, output=None):
    config = cli_config(config_path, seed=seed, output=output)
    settings = config['bench']

    rows = run_bench(settings['lengths'], P=settings['P'], W=settings['W'],
                     k=settings['k'], d=settings['d'],
                     repeats=settings['repeats'], seed=config.seed)

    write_jsonl(os.path.join(config.output, BENCH_FNAME),
                [row.to_record() for row in rows])
    print(format_table(
        ['L', 'full pairs', 'sparse pairs', 'formula', 'ratio',
         'full s', 'sparse s'],
        [[r.L, r.full_pairs, r.sparse_pairs, r.formula_pairs, r.ratio,
          f'{r.full_seconds:.2e}', f'{r.sparse_seconds:.2e}'] for r in rows]
    ))
    record_run(config.output, title, config)
    return rows


runscript = cli.subcommand_script(sys.modules[__name__])
