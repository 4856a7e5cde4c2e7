from django.core.exceptions import ValidationError
from django.db import models
from django.utils import timezone
import uuid


class Campaign(models.Model):
    """
    One invocation of an experiment driver: a scenario, a seed and the
    drops simulated under it. Aggregates land in ``summary`` when the
    campaign completes; per-drop outcomes are DropRecord rows.
    """

    class Kind(models.TextChoices):
        RUN = 'run', 'Run'
        CONVERGENCE = 'convergence', 'Convergence'
        RSI_SWEEP = 'rsi_sweep', 'Residual SI sweep'
        OUTAGE = 'outage', 'Outage'
        ABLATION = 'ablation', 'Self-recycling ablation'
        VALIDATE = 'validate', 'Closed-form validation'

    class Status(models.TextChoices):
        PENDING = 'pending', 'Pending'
        RUNNING = 'running', 'Running'
        COMPLETED = 'completed', 'Completed'
        FAILED = 'failed', 'Failed'

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    kind = models.CharField(max_length=20, choices=Kind.choices)
    status = models.CharField(
        max_length=20,
        choices=Status.choices,
        default=Status.PENDING
    )

    scenario = models.JSONField(default=dict, help_text="Validated scenario, as written to the manifest")
    config_hash = models.CharField(max_length=64, help_text="SHA-256 of the canonical scenario JSON")
    seed = models.BigIntegerField(default=0)
    drops = models.IntegerField(default=0)
    workers = models.IntegerField(default=1)
    parameters = models.JSONField(
        default=dict,
        blank=True,
        help_text="Sweep grids and flags of the driver, e.g. {\"mu\": [0.3, 0.5, 0.7]}"
    )
    output_dir = models.CharField(max_length=500, blank=True, default='')

    summary = models.JSONField(
        default=dict,
        blank=True,
        help_text="""
        Aggregates written on completion:
        {
            "rows": [[sweep_var, sweep_value, algorithm, metric, value, stderr], ...],
            "files": [str],
            ...driver-specific keys (crossover, paired comparisons, gate result)
        }
        """
    )
    error_message = models.TextField(blank=True, default='')

    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(null=True, blank=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        verbose_name = "Campaign"
        verbose_name_plural = "Campaigns"
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['kind', 'status'], name='campaign_kind_status_idx'),
            models.Index(fields=['config_hash'], name='campaign_config_hash_idx'),
        ]

    def __str__(self):
        return f"{self.get_kind_display()} {self.id} ({self.status})"

    @property
    def duration_seconds(self):
        if self.started_at and self.completed_at:
            return (self.completed_at - self.started_at).total_seconds()
        return None

    def mark_running(self):
        if self.status != self.Status.PENDING:
            raise ValidationError(f"Cannot start campaign: status is '{self.status}', must be 'pending'")
        self.status = self.Status.RUNNING
        self.started_at = timezone.now()
        self.save(update_fields=['status', 'started_at'])

    def mark_completed(self, summary):
        if self.status != self.Status.RUNNING:
            raise ValidationError(f"Cannot complete campaign: status is '{self.status}', must be 'running'")
        self.status = self.Status.COMPLETED
        self.summary = summary
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'summary', 'completed_at'])

    def mark_failed(self, message):
        self.status = self.Status.FAILED
        self.error_message = message
        self.completed_at = timezone.now()
        self.save(update_fields=['status', 'error_message', 'completed_at'])


class DropRecord(models.Model):
    """Outcome of one algorithm on one drop at one sweep point."""

    campaign = models.ForeignKey(Campaign, on_delete=models.CASCADE, related_name='drop_records')
    drop_index = models.IntegerField()
    algorithm = models.CharField(max_length=50, help_text="proposed, ts_tau<tau_d> or proposed_no_self_recycling")
    sweep_var = models.CharField(max_length=20, blank=True, default='')
    sweep_value = models.FloatField(null=True, blank=True)

    feasible = models.BooleanField(default=False)
    objective = models.FloatField(null=True, blank=True, help_text="Battery energy in joules, null in outage")
    iterations = models.IntegerField(default=0)

    data = models.JSONField(
        default=dict,
        help_text="""
        {
            "per_user_se": [float],
            "battery_fraction": [float],
            "objective_trace": [float],
            "first_objective": float | null,
            "anomaly": str | null,
            "violations": [str]
        }
        """
    )

    class Meta:
        verbose_name = "Drop Record"
        verbose_name_plural = "Drop Records"
        ordering = ['campaign', 'drop_index', 'id']
        indexes = [
            models.Index(fields=['campaign', 'algorithm'], name='droprecord_algorithm_idx'),
            models.Index(fields=['campaign', 'feasible'], name='droprecord_feasible_idx'),
        ]

    def __str__(self):
        state = 'feasible' if self.feasible else 'outage'
        return f"drop {self.drop_index} {self.algorithm} ({state})"

    @property
    def per_user_se(self):
        return self.data.get('per_user_se', [])

    @property
    def battery_fraction(self):
        return self.data.get('battery_fraction', [])
