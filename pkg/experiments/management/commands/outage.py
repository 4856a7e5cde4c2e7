"""
Management command for the outage experiment: share of infeasible drops
against the rate demand
"""
import math

from experiments.management.base import ExperimentCommand

DEFAULT_RATES = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]


class Command(ExperimentCommand):
    help = 'Outage rate of the proposed scheme and each time-switching variant per rate demand'
    title = 'OUTAGE'

    def add_experiment_arguments(self, parser):
        parser.add_argument(
            '--rates',
            type=float,
            nargs='+',
            default=DEFAULT_RATES,
            help='Rate demands in bit/s/Hz, applied to every user (default: 0 to 4 in 0.5 steps)'
        )
        parser.add_argument(
            '--tau-d',
            type=int,
            nargs='+',
            help="Time-switching harvest lengths (default: the scenario's baseline grid)"
        )

    def run(self, service, options):
        if any(not math.isfinite(r) or r < 0 for r in options['rates']):
            raise self.config_error('--rates must be finite and non-negative')
        return service.experiment_outage(options['rates'], tau_d_grid=options['tau_d'])
