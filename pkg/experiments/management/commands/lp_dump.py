"""
Management command printing the power-allocation LP of one drop
"""
from pathlib import Path

from cellfree.drop import drop_seed, prepare_drop
from cellfree.exceptions import ParameterError
from cellfree.optimizer import Allocation, build_lp, proposed_instance, ts_instance
from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Dump the first-iteration LP (all-ones filters) of one drop as plain text'
    title = 'LP DUMP'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--drop', type=int, default=0, help='Drop index (default: 0)')
        parser.add_argument(
            '--tau-d',
            type=int,
            help='Dump the time-switching LP with this harvest length instead of the proposed one'
        )

    def handle(self, *args, **options):
        scenario = self.load_scenario(options)
        index = options['drop']
        if index < 0:
            raise self.config_error('--drop must be non-negative')

        drop = prepare_drop(scenario, drop_seed(scenario.seed, index), index)
        try:
            if options['tau_d'] is None:
                instance = proposed_instance(scenario, drop)
            else:
                instance = ts_instance(scenario, drop, options['tau_d'])
        except ParameterError as exc:
            raise self.config_error(f"Invalid experiment parameters: {exc}")

        text = build_lp(instance, Allocation.initial(scenario.M, scenario.K).alpha).dumps()
        if not options['out']:
            self.stdout.write(text, ending='' if text.endswith('\n') else '\n')
            return

        out_dir = Path(options['out'])
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"lp_{instance.label}_drop{index}.txt"
        path.write_text(text if text.endswith('\n') else text + '\n', encoding='utf-8')
        self.stdout.write(self.style.SUCCESS(f"✓ Wrote {path}"))
