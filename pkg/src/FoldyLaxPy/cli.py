"""
Command-line interface: `foldylax <task> [flags]` or `python -m FoldyLaxPy <task> [flags]`.
Values from `--config <file>` are overridden by flags. On failure a single line
`error type=<Exception> message="<text>"` goes to stderr and the exit code is 1.
"""
import argparse
import logging
import sys
from dataclasses import fields

from FoldyLaxPy.RunConfig import TASKS, RunConfig
from FoldyLaxPy.Simulation import Simulation
from FoldyLaxPy.utils import DEBUG, configure_logging

logger = logging.getLogger(__name__)

_CONFIG_KEYS = {f.name for f in fields(RunConfig)}

# Task flags beyond the medium flags, as (flag, help)
_TASK_FLAGS = {
    'wavefield': [('--k', 'wavenumber re,im'), ('--source', 'plane:<dir> or point:<x,..>'),
                  ('--grid', '<nx>x<ny>'), ('--window', 'xmin,xmax,ymin,ymax'),
                  ('--config-index', 'configuration index')],
    'radial-profile': [('--k', 'wavenumber re,im'), ('--source', 'plane:<dir> or point:<x,..>'),
                       ('--configs', 'number of configurations'), ('--bins', 'number of radial bins'),
                       ('--quantity', 'green or intensity'), ('--gamma', 'Laplace variable of the transport solve')],
    'resonance-map': [('--k-window', 'remin,remax,immin,immax'), ('--grid', '<nx>x<ny>'),
                      ('--configs', 'number of configurations')],
    'effective-resonances': [('--ell-max', 'highest angular momentum')],
    'diffusion-modes': [('--k', 'wavenumber'), ('--lscat', 'mean free path'), ('--count', 'number of modes')],
    'boltzmann-mc': [('--k', 'wavenumber'), ('--lscat', 'mean free path'), ('--velocity', 'walker speed'),
                     ('--walkers', 'number of walkers'), ('--t-max', 'last recording time'),
                     ('--t-points', 'number of recording times')],
    'hankel-zeros': [('--nu', 'order of H+_nu')],
}

_TASK_DESCRIPTIONS = {
    'wavefield': 'Intensity map of one configuration.',
    'radial-profile': 'Binned ensemble mean and quartiles of the Green function or intensity.',
    'resonance-map': 'Configuration-averaged density of resonances on a window of the lower k half-plane.',
    'effective-resonances': 'Poles of the effective-medium S-matrix for each angular momentum.',
    'diffusion-modes': ('Decay rates of the diffusion modes of the ball. Modes vanish at the exact effective '
                        'radius R_eff (default method effective_radius); the Robin-condition roots are '
                        'available from Transport.diffusion_modes with method robin.'),
    'boltzmann-mc': 'Survival and mean squared displacement of Monte Carlo walkers.',
    'hankel-zeros': 'Seeds and refined zeros of the outgoing Hankel function H+_nu.',
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--threads', help='worker threads')
    parser.add_argument('--seed', help='64-bit master seed')
    parser.add_argument('--out', help='output path (stdout if omitted)')
    parser.add_argument('--config', dest='config_file', help='flat key = value configuration file')
    parser.add_argument('--debug', action='store_true', default=DEBUG, help='debug logging')


def _add_medium_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--dim', help='dimension 1..4')
    parser.add_argument('--num', help='number of scatterers')
    parser.add_argument('--radius', help='ball radius (unit density if omitted)')
    parser.add_argument('--model', help='max or hardsphere:<alpha>')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='foldylax', description='Multiple scattering by random point scatterers.')
    subparsers = parser.add_subparsers(dest='task', required=True)
    for task in TASKS:
        description = _TASK_DESCRIPTIONS[task]
        subparser = subparsers.add_parser(task, help=description, description=description)
        _add_common_flags(subparser)
        if task != 'hankel-zeros':
            _add_medium_flags(subparser)
        for flag, text in _TASK_FLAGS[task]:
            subparser.add_argument(flag, help=text)
    rerun = subparsers.add_parser('rerun', help='repeat the run echoed in the header of a CSV output')
    rerun.add_argument('header_file')
    _add_common_flags(rerun)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Builds the run configuration: header or file values first, flags on top.
    """
    if args.task == 'rerun':
        base = RunConfig.from_header(args.header_file)
    else:
        base = RunConfig()
    if args.config_file:
        base = RunConfig.from_file(args.config_file, base)
    overrides = {key: value for key, value in vars(args).items()
                 if key in _CONFIG_KEYS and key != 'task' and value is not None}
    if args.task != 'rerun':
        overrides['task'] = args.task
    return base.merged(overrides)


def _error_line(error: Exception) -> str:
    message = str(error).replace('\\', '\\\\').replace('"', '\\"').replace('\n', ' ')
    return f'error type={type(error).__name__} message="{message}"'


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.debug)
    try:
        config = resolve_config(args)
        Simulation(config).run()
    except Exception as e:
        logger.debug("Run failed", exc_info=True)
        print(_error_line(e), file=sys.stderr)
        return 1
    return 0
