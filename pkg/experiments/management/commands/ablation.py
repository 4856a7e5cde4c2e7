"""
Management command comparing the optimizer with and without a user
harvesting its own uplink transmission
"""
from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Paired solves with and without self-recycling on every drop'
    title = 'SELF-RECYCLING ABLATION'

    def run(self, service, options):
        return service.experiment_self_recycling_ablation()
