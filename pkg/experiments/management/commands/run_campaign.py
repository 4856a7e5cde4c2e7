"""
Management command to run the proposed scheme (and the time-switching
baseline) over every drop of a scenario
"""
from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Optimize every drop of a scenario and report outage, battery fraction and SE'
    title = 'CAMPAIGN RUN'

    def add_experiment_arguments(self, parser):
        parser.add_argument(
            '--no-baseline',
            action='store_true',
            help='Skip the time-switching baseline'
        )

    def run(self, service, options):
        return service.run_campaign(baseline=not options['no_baseline'])
