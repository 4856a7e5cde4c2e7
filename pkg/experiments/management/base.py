"""
Shared base for the experiment commands: scenario loading, the common
flags and the summary printout.
"""
import json

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from cellfree.exceptions import ParameterError
from experiments.services import DEFAULT_PRESET, CampaignService, load_scenario

CONFIG_ERROR = 1
GATE_FAILURE = 2


class ExperimentCommand(BaseCommand):
    """
    Subclasses implement ``add_experiment_arguments`` and ``run(service, options)``,
    which returns ``(campaign, result)`` from a CampaignService driver.
    """
    title = 'EXPERIMENT'

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            default=DEFAULT_PRESET,
            help=f"Scenario JSON file, or the name of a preset (default: {DEFAULT_PRESET})"
        )
        parser.add_argument('--seed', type=int, help='Override the scenario seed')
        parser.add_argument('--drops', type=int, help='Override the number of random drops')
        parser.add_argument(
            '--workers',
            type=int,
            help='Parallel drop workers (default: CELLFREE_MAX_WORKERS)'
        )
        parser.add_argument('--out', help='Output directory (default: under CELLFREE_OUTPUT_DIR)')
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def config_error(self, message):
        return CommandError(message, returncode=CONFIG_ERROR)

    def load_scenario(self, options):
        try:
            return load_scenario(options['config'], seed=options['seed'], drops=options['drops'])
        except ValidationError as exc:
            raise self.config_error(f"Invalid scenario: {json.dumps(exc.detail, default=str)}")

    def get_service(self, scenario, options):
        if options['workers'] is not None and options['workers'] < 1:
            raise self.config_error('--workers must be at least 1')
        return CampaignService(
            scenario,
            workers=options['workers'],
            out_dir=options['out'],
            command=self.command_line(options),
        )

    def command_line(self, options):
        name = self.__module__.rsplit('.', 1)[-1]
        flags = [
            f"--{key.replace('_', '-')} {value}"
            for key, value in sorted(options.items())
            if key in ('config', 'seed', 'drops') and value is not None
        ]
        return ' '.join([name] + flags)

    def run(self, service, options):
        raise NotImplementedError

    def handle(self, *args, **options):
        scenario = self.load_scenario(options)
        service = self.get_service(scenario, options)

        self.stdout.write("=" * 80)
        self.stdout.write(self.title)
        self.stdout.write("=" * 80)
        self.stdout.write(f"  Scenario: {options['config']} (M={scenario.M}, K={scenario.K})")
        self.stdout.write(f"  Drops: {scenario.drops}, seed {scenario.seed}, {service.workers} workers")
        self.stdout.write()

        try:
            campaign, result = self.run(service, options)
        except (ParameterError, ValidationError) as exc:
            detail = exc.detail if isinstance(exc, ValidationError) else exc
            raise self.config_error(f"Invalid experiment parameters: {detail}")

        self.write_summary(campaign)
        self.check(campaign)

    def check(self, campaign):
        """Raise CommandError when the finished campaign fails a gate."""

    def write_summary(self, campaign):
        summary = campaign.summary or {}
        self.stdout.write(self.style.SUCCESS(f"✓ Campaign {campaign.id} {campaign.status}"))
        for key, value in summary.items():
            if key in ('rows', 'files'):
                continue
            style = self.style_for(value)
            self.stdout.write(f"  {key}: {style(json.dumps(value, default=str))}")
        self.stdout.write(f"  Output: {campaign.output_dir}")
        for name in summary.get('files', []):
            self.stdout.write(f"    {name}")
        self.stdout.write()

    def style_for(self, value):
        if value is True:
            return self.style.SUCCESS
        if value is False:
            return self.style.WARNING
        return lambda x: x
