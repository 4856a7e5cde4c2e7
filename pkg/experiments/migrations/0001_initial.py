# Generated by Django 4.2.26 on 2026-10-18 09:12

from django.db import migrations, models
import django.db.models.deletion
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Campaign',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('kind', models.CharField(choices=[('run', 'Run'), ('convergence', 'Convergence'), ('rsi_sweep', 'Residual SI sweep'), ('outage', 'Outage'), ('ablation', 'Self-recycling ablation'), ('validate', 'Closed-form validation')], max_length=20)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('scenario', models.JSONField(default=dict, help_text='Validated scenario, as written to the manifest')),
                ('config_hash', models.CharField(help_text='SHA-256 of the canonical scenario JSON', max_length=64)),
                ('seed', models.BigIntegerField(default=0)),
                ('drops', models.IntegerField(default=0)),
                ('workers', models.IntegerField(default=1)),
                ('parameters', models.JSONField(blank=True, default=dict, help_text='Sweep grids and flags of the driver, e.g. {"mu": [0.3, 0.5, 0.7]}')),
                ('output_dir', models.CharField(blank=True, default='', max_length=500)),
                ('summary', models.JSONField(blank=True, default=dict, help_text='\n        Aggregates written on completion:\n        {\n            "rows": [[sweep_var, sweep_value, algorithm, metric, value, stderr], ...],\n            "files": [str],\n            ...driver-specific keys (crossover, paired comparisons, gate result)\n        }\n        ')),
                ('error_message', models.TextField(blank=True, default='')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('started_at', models.DateTimeField(blank=True, null=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'verbose_name': 'Campaign',
                'verbose_name_plural': 'Campaigns',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='DropRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('drop_index', models.IntegerField()),
                ('algorithm', models.CharField(help_text='proposed, ts_tau<tau_d> or proposed_no_self_recycling', max_length=50)),
                ('sweep_var', models.CharField(blank=True, default='', max_length=20)),
                ('sweep_value', models.FloatField(blank=True, null=True)),
                ('feasible', models.BooleanField(default=False)),
                ('objective', models.FloatField(blank=True, help_text='Battery energy in joules, null in outage', null=True)),
                ('iterations', models.IntegerField(default=0)),
                ('data', models.JSONField(default=dict, help_text='\n        {\n            "per_user_se": [float],\n            "battery_fraction": [float],\n            "objective_trace": [float],\n            "first_objective": float | null,\n            "anomaly": str | null,\n            "violations": [str]\n        }\n        ')),
                ('campaign', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='drop_records', to='experiments.campaign')),
            ],
            options={
                'verbose_name': 'Drop Record',
                'verbose_name_plural': 'Drop Records',
                'ordering': ['campaign', 'drop_index', 'id'],
            },
        ),
        migrations.AddIndex(
            model_name='campaign',
            index=models.Index(fields=['kind', 'status'], name='campaign_kind_status_idx'),
        ),
        migrations.AddIndex(
            model_name='campaign',
            index=models.Index(fields=['config_hash'], name='campaign_config_hash_idx'),
        ),
        migrations.AddIndex(
            model_name='droprecord',
            index=models.Index(fields=['campaign', 'algorithm'], name='droprecord_algorithm_idx'),
        ),
        migrations.AddIndex(
            model_name='droprecord',
            index=models.Index(fields=['campaign', 'feasible'], name='droprecord_feasible_idx'),
        ),
    ]
