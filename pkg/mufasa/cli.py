"""mufasa.cli
   ==========

   Command line interface: one subcommand per ``*_cmd`` module of
   ``mufasa.subcommands``.

   :license: Apache License, Version 2.0, see LICENSE for details
"""

import argparse
import importlib
import pkgutil
import sys
import warnings

import mufasa
from mufasa.errors import MufasaError
import mufasa.subcommands

# Warnings are shown without the source line that raised them
_formatwarning = warnings.formatwarning
warnings.formatwarning = (
    lambda message, category, filename, lineno, line=None:
        _formatwarning(message, category, filename, lineno, line='')
)


def parse():
    """Entry point of the ``mufasa`` script."""
    parser = generate_parser()

    if len(sys.argv) < 2:
        parser.print_help()
        return

    args = vars(parser.parse_args())
    run_guarded(args.pop('run_cmd'), **args)


def subcommand_modules():
    """Import every ``*_cmd`` module of the subcommands package."""
    prefix = mufasa.subcommands.__name__ + '.'
    names = [name for _, name, _ in
             pkgutil.iter_modules(mufasa.subcommands.__path__, prefix=prefix)
             if name.endswith('_cmd')]
    return [importlib.import_module(name) for name in names]


def add_arguments(parser, module):
    for arg in module.arguments:
        parser.add_argument(*arg['flags'], **arg['parameters'])


def generate_parser():
    """Return the top level parser with a subparser per subcommand."""
    parser = argparse.ArgumentParser(prog='mufasa')
    parser.add_argument('--version', action='version',
                        version=f'mufasa {mufasa.__version__}')

    subparsers = parser.add_subparsers()
    for module in subcommand_modules():
        cmd_parser = subparsers.add_parser(module.title, **module.parameters)
        cmd_parser.set_defaults(run_cmd=module.runcmd)
        add_arguments(cmd_parser, module)

    return parser


def run_guarded(run_cmd, **kwargs):
    """Run a subcommand, turning mufasa errors into a message on stderr and
    the exit code of their category."""
    try:
        return run_cmd(**kwargs)
    except MufasaError as exc:
        sys.stderr.write(f'mufasa: error [{exc.category}]: {exc}\n')
        sys.exit(exc.exit_code)


def subcommand_script(module):
    """Entry point running a single subcommand module."""
    def runscript():
        parser = argparse.ArgumentParser(**module.parameters)
        add_arguments(parser, module)
        run_guarded(module.runcmd, **vars(parser.parse_args()))
    return runscript
