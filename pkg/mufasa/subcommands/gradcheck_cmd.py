# coding: utf-8

import os
import sys

from mufasa import cli
from mufasa.config import cli_config
from mufasa.errors import GradcheckFailure
from mufasa.fsops import write_jsonl
from mufasa.gradcheck import run_gradcheck
from mufasa.metadata import record_run
from mufasa.metrics import format_table
import mufasa.subcommands.args as args

title = 'gradcheck'
parameters = {'description': 'Compare analytic gradients of every loss, '
                             'attention head and the gate with central '
                             'finite differences'}

arguments = [args.config, args.seed, args.out, args.corrupt]

GRADCHECK_FNAME = 'gradcheck.jsonl'


def runcmd(config_path, seed=None, output=None, corrupt=None):
    config = cli_config(config_path, seed=seed, output=output)
    settings = config['gradcheck']

    results = run_gradcheck(d=settings['d'], L=settings['L'],
                            N=settings['N'], seed=config.seed,
                            tau=settings['tau'], h=settings['h'],
                            tol=settings['tol'], corrupt=corrupt)

    write_jsonl(os.path.join(config.output, GRADCHECK_FNAME),
                [result.to_record() for result in results])
    print(format_table(
        ['component', 'max rel. err', 'worst parameter', 'status'],
        [[r.component, f'{r.max_rel_err:.3e}', r.worst_param,
          'pass' if r.passed else 'FAIL'] for r in results]
    ))
    record_run(config.output, title, config)

    failed = [r.component for r in results if not r.passed]
    if failed:
        raise GradcheckFailure('Gradient check failed for '
                               + ', '.join(failed))
    return results


runscript = cli.subcommand_script(sys.modules[__name__])
