"""
Management command sweeping the residual self-interference level
"""
from experiments.management.base import ExperimentCommand

DEFAULT_RSI_GRID = [-110.0, -105.0, -100.0, -95.0, -90.0, -85.0, -80.0]


class Command(ExperimentCommand):
    help = 'Battery fraction and SE per user against the residual self-interference (dB)'
    title = 'RESIDUAL SELF-INTERFERENCE SWEEP'

    def add_experiment_arguments(self, parser):
        parser.add_argument(
            '--rsi-grid',
            type=float,
            nargs='+',
            default=DEFAULT_RSI_GRID,
            help='Residual self-interference levels in dB (default: -110 to -80 in 5 dB steps)'
        )

    def run(self, service, options):
        if any(r >= 0 for r in options['rsi_grid']):
            raise self.config_error('--rsi-grid values must be below 0 dB')
        return service.experiment_rsi_sweep(options['rsi_grid'])
