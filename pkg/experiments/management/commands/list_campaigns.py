"""
Management command to list experiment campaigns
"""
from django.core.management.base import BaseCommand
from experiments.models import Campaign


class Command(BaseCommand):
    help = 'List experiment campaigns and their status'

    def add_arguments(self, parser):
        parser.add_argument(
            '--kind',
            choices=Campaign.Kind.values,
            help='Only list campaigns of this kind'
        )

    def handle(self, *args, **options):
        campaigns = Campaign.objects.all().order_by('-created_at')
        if options['kind']:
            campaigns = campaigns.filter(kind=options['kind'])

        if not campaigns.exists():
            self.stdout.write("No campaigns found.")
            return

        self.stdout.write("=" * 80)
        self.stdout.write("EXPERIMENT CAMPAIGNS")
        self.stdout.write("=" * 80)
        self.stdout.write()

        status_style = {
            'pending': self.style.WARNING,
            'running': self.style.HTTP_INFO,
            'completed': self.style.SUCCESS,
            'failed': self.style.ERROR,
        }

        for campaign in campaigns:
            records = campaign.drop_records.all()
            total = records.count()
            infeasible = records.filter(feasible=False).count()
            style_func = status_style.get(campaign.status, lambda x: x)

            self.stdout.write(f"Campaign ID: {campaign.id}")
            self.stdout.write(f"  Kind: {campaign.get_kind_display()}")
            self.stdout.write(f"  Status: {style_func(campaign.status.upper())}")
            self.stdout.write(f"  Scenario: {campaign.config_hash[:12]} (seed {campaign.seed}, {campaign.drops} drops)")
            self.stdout.write(f"  Created: {campaign.created_at}")
            if campaign.completed_at:
                self.stdout.write(f"  Completed: {campaign.completed_at}")
            if campaign.duration_seconds is not None:
                self.stdout.write(f"  Duration: {campaign.duration_seconds:.1f}s")

            self.stdout.write(f"  Records: {total}")
            self.stdout.write(f"    ✓ Feasible: {total - infeasible}")
            self.stdout.write(f"    ✗ Outage: {infeasible}")
            if campaign.output_dir:
                self.stdout.write(f"  Output: {campaign.output_dir}")

            if campaign.status == Campaign.Status.FAILED:
                self.stdout.write(self.style.ERROR(f"  Error: {campaign.error_message}"))
            elif campaign.status == Campaign.Status.RUNNING:
                self.stdout.write(self.style.WARNING(
                    "  → Interrupted runs are not resumed; rerun the command with the same --config and --seed"
                ))

            self.stdout.write()
