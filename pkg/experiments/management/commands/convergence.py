"""
Management command for the convergence experiment: objective per
iteration for several harvesting efficiencies
"""
from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Average objective trace of the alternating optimization for each mu'
    title = 'CONVERGENCE'

    def add_experiment_arguments(self, parser):
        parser.add_argument(
            '--mu',
            type=float,
            nargs='+',
            default=[0.3, 0.5, 0.7],
            help='Energy-harvesting efficiencies (default: 0.3 0.5 0.7)'
        )

    def run(self, service, options):
        if any(not 0.0 <= mu <= 1.0 for mu in options['mu']):
            raise self.config_error('--mu values must lie in [0, 1]')
        return service.experiment_convergence(options['mu'])
