from dataclasses import fields as dataclass_fields
import math

from rest_framework import serializers

from cellfree.exceptions import ParameterError
from cellfree.scenario import OptimizerConfig, PropagationConfig, Scenario, TimeSwitchingConfig
from .models import Campaign, DropRecord

DEFAULT_SCENARIO = Scenario()


class StrictFieldsMixin:
    """Reject keys the serializer does not declare, so typos in scenario files surface."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown field.'] for key in unknown})
        return super().to_internal_value(data)


class RateDemandField(serializers.Field):
    """A single rate for every user or one rate per user (bit/s/Hz)."""

    default_error_messages = {
        'invalid': 'Expected a number or a list of numbers.',
        'empty': 'The list of rate demands is empty.',
        'negative': 'Rate demands must be finite and non-negative.',
    }

    def to_internal_value(self, data):
        is_list = isinstance(data, (list, tuple))
        values = list(data) if is_list else [data]
        if is_list and not values:
            self.fail('empty')
        if any(isinstance(v, bool) for v in values):
            self.fail('invalid')
        try:
            rates = [float(v) for v in values]
        except (TypeError, ValueError):
            self.fail('invalid')
        if any(not math.isfinite(r) or r < 0 for r in rates):
            self.fail('negative')
        return rates if is_list else rates[0]

    def to_representation(self, value):
        return list(value) if isinstance(value, (list, tuple)) else value


class PropagationSerializer(StrictFieldsMixin, serializers.Serializer):
    """Every PropagationConfig constant, each optional with its default."""

    def get_fields(self):
        return {
            f.name: serializers.FloatField(default=f.default)
            for f in dataclass_fields(PropagationConfig)
        }

    def validate(self, attrs):
        try:
            PropagationConfig(**attrs)
        except ParameterError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class OptimizerSerializer(StrictFieldsMixin, serializers.Serializer):
    max_iterations = serializers.IntegerField(min_value=1, default=OptimizerConfig.max_iterations)
    convergence_tol = serializers.FloatField(default=OptimizerConfig.convergence_tol)
    monotonicity_tol = serializers.FloatField(default=OptimizerConfig.monotonicity_tol)
    lp_feasibility_tol = serializers.FloatField(default=OptimizerConfig.lp_feasibility_tol)

    def validate(self, attrs):
        for name in ('convergence_tol', 'monotonicity_tol', 'lp_feasibility_tol'):
            if attrs[name] <= 0:
                raise serializers.ValidationError({name: ['Must be positive.']})
        return attrs


class BaselineSerializer(StrictFieldsMixin, serializers.Serializer):
    tau_d_grid = serializers.ListField(
        child=serializers.IntegerField(min_value=0),
        allow_empty=False,
        default=list(TimeSwitchingConfig.tau_d_grid),
        help_text="Harvest-phase lengths (samples) of the time-switching baseline"
    )


class ScenarioSerializer(StrictFieldsMixin, serializers.Serializer):
    """
    Validates a scenario document. Every key is optional and defaults to the
    indoor deployment shipped as the ``paper_baseline`` preset. ``rsi_db: null``
    switches residual self-interference off; ``baseline: null`` skips the
    time-switching baseline.
    """
    M = serializers.IntegerField(min_value=1, default=DEFAULT_SCENARIO.M)
    K = serializers.IntegerField(min_value=1, default=DEFAULT_SCENARIO.K)
    tau_p = serializers.IntegerField(min_value=1, default=DEFAULT_SCENARIO.tau_p)
    tau_c = serializers.IntegerField(min_value=2, default=DEFAULT_SCENARIO.tau_c)
    rho_p = serializers.FloatField(default=DEFAULT_SCENARIO.rho_p, help_text="Pilot power (W)")
    noise_dbm = serializers.FloatField(default=DEFAULT_SCENARIO.noise_dbm)
    mu = serializers.FloatField(min_value=0.0, max_value=1.0, default=DEFAULT_SCENARIO.mu)
    rsi_db = serializers.FloatField(allow_null=True, default=DEFAULT_SCENARIO.rsi_db)
    e_max = serializers.FloatField(min_value=0.0, default=DEFAULT_SCENARIO.e_max, help_text="Battery budget per user (J)")
    p_max = serializers.FloatField(default=DEFAULT_SCENARIO.p_max, help_text="Transmit power budget per AP (W)")
    r_th = RateDemandField(default=DEFAULT_SCENARIO.r_th)
    side_length_m = serializers.FloatField(default=DEFAULT_SCENARIO.side_length_m)
    height_diff_m = serializers.FloatField(min_value=0.0, default=DEFAULT_SCENARIO.height_diff_m)
    drops = serializers.IntegerField(min_value=1, default=DEFAULT_SCENARIO.drops)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 63 - 1, default=DEFAULT_SCENARIO.seed)
    propagation = PropagationSerializer(required=False)
    optimizer = OptimizerSerializer(required=False)
    baseline = BaselineSerializer(required=False, allow_null=True)

    def validate_rsi_db(self, value):
        if value is not None and value >= 0:
            raise serializers.ValidationError("Residual self-interference must be below 0 dB.")
        return value

    def validate_rho_p(self, value):
        if value <= 0:
            raise serializers.ValidationError("Pilot power must be positive.")
        return value

    def validate_p_max(self, value):
        if value <= 0:
            raise serializers.ValidationError("AP power budget must be positive.")
        return value

    def validate(self, attrs):
        try:
            build_scenario(attrs)
        except ParameterError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def create(self, validated_data):
        return build_scenario(validated_data)


def build_scenario(attrs):
    """Scenario from validated serializer data."""
    attrs = dict(attrs)
    propagation = PropagationConfig(**attrs.pop('propagation', {}))
    optimizer = OptimizerConfig(**attrs.pop('optimizer', {}))
    if 'baseline' not in attrs:
        baseline = TimeSwitchingConfig()
    else:
        baseline_attrs = attrs.pop('baseline')
        baseline = None if baseline_attrs is None else TimeSwitchingConfig(**baseline_attrs)
    if attrs.get('rsi_db', 0.0) is None:
        attrs['rsi_db'] = -math.inf
    if isinstance(attrs.get('r_th'), list):
        attrs['r_th'] = tuple(attrs['r_th'])
    return Scenario(propagation=propagation, optimizer=optimizer, baseline=baseline, **attrs)


class DropRecordSerializer(serializers.ModelSerializer):
    per_user_se = serializers.ReadOnlyField()
    battery_fraction = serializers.ReadOnlyField()

    class Meta:
        model = DropRecord
        fields = [
            'id', 'drop_index', 'algorithm', 'sweep_var', 'sweep_value',
            'feasible', 'objective', 'iterations',
            'per_user_se', 'battery_fraction', 'data',
        ]
        read_only_fields = fields


class CampaignSerializer(serializers.ModelSerializer):
    duration_seconds = serializers.ReadOnlyField()
    drop_record_count = serializers.SerializerMethodField()

    class Meta:
        model = Campaign
        fields = [
            'id', 'kind', 'status', 'seed', 'drops', 'workers', 'config_hash',
            'parameters', 'output_dir', 'error_message', 'drop_record_count',
            'created_at', 'started_at', 'completed_at', 'duration_seconds',
        ]
        read_only_fields = fields

    def get_drop_record_count(self, obj):
        return obj.drop_records.count()


class CampaignDetailSerializer(CampaignSerializer):
    class Meta(CampaignSerializer.Meta):
        fields = CampaignSerializer.Meta.fields + ['scenario', 'summary']
        read_only_fields = fields
