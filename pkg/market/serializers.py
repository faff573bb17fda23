from rest_framework import serializers

from .choice import DynamicInstance, Instance
from .constrained import family_from_json
from .exceptions import MarketError
from .experiments import ExperimentConfig
from .generator import GenConfig
from .policy import PolicyKind, PolicySpec
from .simulation import MODES


def _float_list(**kwargs):
    return serializers.ListField(child=serializers.FloatField(), **kwargs)


def _index_list(**kwargs):
    return serializers.ListField(child=serializers.IntegerField(min_value=0), **kwargs)


class InstanceSerializer(serializers.Serializer):
    r = _float_list(min_length=1)
    v = _float_list(min_length=1)
    alpha = serializers.FloatField()

    def validate_alpha(self, value):
        if not 0.0 < value <= 1.0:
            raise serializers.ValidationError("alpha must lie in (0, 1].")
        return value

    def validate(self, attrs):
        if len(attrs["r"]) != len(attrs["v"]):
            raise serializers.ValidationError({"v": "r and v must have the same length."})
        if any(value <= 0 for value in attrs["r"]):
            raise serializers.ValidationError({"r": "All revenues must be positive."})
        if any(value <= 0 for value in attrs["v"]):
            raise serializers.ValidationError({"v": "All preference weights must be positive."})
        return attrs

    def to_instance(self, alpha: float | None = None) -> Instance:
        """Build the instance, with an optional alpha override."""
        data = self.validated_data
        return Instance(r=data["r"], v=data["v"], alpha=data["alpha"] if alpha is None else alpha)


class DynamicInstanceSerializer(InstanceSerializer):
    T = serializers.IntegerField(min_value=1)
    c = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if len(attrs["c"]) != len(attrs["r"]):
            raise serializers.ValidationError({"c": "c must hold one inventory per product."})
        return attrs

    def to_instance(self, alpha: float | None = None) -> DynamicInstance:
        base = super().to_instance(alpha=alpha)
        return DynamicInstance(base=base, T=self.validated_data["T"], c=self.validated_data["c"])


class ConstraintFamilyField(serializers.Field):
    """Constraint family such as "all", {"max_card": 3} or {"categories": [...]}."""

    def __init__(self, n: int | None = None, **kwargs):
        self.n = n
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        try:
            return family_from_json(data, n=self.n)
        except MarketError as exc:
            raise serializers.ValidationError(exc.detail) from exc

    def to_representation(self, value):
        return value.to_json()


class GenConfigSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1, default=40)
    T = serializers.IntegerField(min_value=1)
    P0 = serializers.FloatField()
    gamma = serializers.FloatField()
    alpha = serializers.FloatField()
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate(self, attrs):
        errors = {}
        if not 0.0 < attrs["P0"] < 1.0:
            errors["P0"] = "P0 must lie strictly between 0 and 1."
        if attrs["gamma"] <= 0:
            errors["gamma"] = "gamma must be positive."
        if not 0.0 < attrs["alpha"] <= 1.0:
            errors["alpha"] = "alpha must lie in (0, 1]."
        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def to_config(self) -> GenConfig:
        return GenConfig(**self.validated_data)


class ExperimentConfigSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1, required=False)
    T = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1, required=False)
    P0 = _float_list(min_length=1, required=False)
    gamma = _float_list(min_length=1, required=False)
    alpha = _float_list(min_length=1, required=False)
    replicates = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    eps = serializers.FloatField(required=False)
    eps2 = serializers.FloatField(required=False)
    mode = serializers.ChoiceField(choices=MODES, required=False)
    label = serializers.CharField(allow_blank=True, max_length=120, required=False)

    def validate_P0(self, value):
        if any(not 0.0 < p < 1.0 for p in value):
            raise serializers.ValidationError("Every P0 must lie strictly between 0 and 1.")
        return value

    def validate_gamma(self, value):
        if any(g <= 0 for g in value):
            raise serializers.ValidationError("Every gamma must be positive.")
        return value

    def validate_alpha(self, value):
        if any(not 0.0 < a <= 1.0 for a in value):
            raise serializers.ValidationError("Every alpha must lie in (0, 1].")
        return value

    def validate_eps(self, value):
        if not 0.0 < value < 0.5:
            raise serializers.ValidationError("eps must lie in (0, 0.5).")
        return value

    def validate_eps2(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("eps2 must lie in (0, 1).")
        return value

    def to_config(self, paper_scale: bool = False, **overrides) -> ExperimentConfig:
        """Lists become tuples; None overrides (unset CLI flags) keep the file value."""
        values = {key: tuple(value) if isinstance(value, list) else value for key, value in self.validated_data.items()}
        values.update({key: value for key, value in overrides.items() if value is not None})
        if paper_scale:
            return ExperimentConfig.paper_scale(**values)
        return ExperimentConfig(**values)


class SalesVectorSerializer(serializers.Serializer):
    x0 = serializers.FloatField()
    x = _float_list()


class StaticSolutionSerializer(serializers.Serializer):
    revenue = serializers.FloatField()
    threshold_r = serializers.FloatField()
    threshold_v = serializers.FloatField()
    support = _index_list()
    weights = _float_list()
    xs = SalesVectorSerializer()


class DeterministicSolutionSerializer(serializers.Serializer):
    assortment = _index_list()
    revenue = serializers.FloatField()


class SupportSolutionSerializer(serializers.Serializer):
    revenue = serializers.FloatField()
    support = _index_list()
    xs = SalesVectorSerializer()


class ConstrainedSolutionSerializer(serializers.Serializer):
    feasible = serializers.BooleanField()
    revenue = serializers.FloatField()
    r_hat = serializers.FloatField(allow_null=True)
    v_hat = serializers.FloatField(allow_null=True)
    support = _index_list()
    oracle_calls = serializers.IntegerField()
    xs = SalesVectorSerializer()


class DistributionSerializer(serializers.Serializer):
    entries = serializers.SerializerMethodField()

    def get_entries(self, obj):
        return [{"assortment": list(assortment), "probability": probability} for assortment, probability in obj.entries]


class UpperBoundSolutionSerializer(serializers.Serializer):
    objective = serializers.FloatField()
    epsilon = serializers.FloatField()
    method = serializers.CharField()
    support = _index_list()
    stats = serializers.DictField()
    xs = SalesVectorSerializer()


class PolicySpecSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=[kind.value for kind in PolicyKind])
    targets = _float_list(min_length=1)
    support = _index_list()
    upper_bound = serializers.FloatField()
    cap = serializers.IntegerField(min_value=1, allow_null=True, required=False)
    g_min = serializers.FloatField(allow_null=True, required=False)
    expected_sales = _float_list(allow_null=True, required=False)
    eps2 = serializers.FloatField(allow_null=True, required=False)
    bisection_iterations = serializers.DictField(child=serializers.IntegerField(min_value=0), required=False)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        data["kind"] = PolicyKind(instance.kind).value
        return data

    def validate(self, attrs):
        n = len(attrs["targets"])
        if any(i >= n for i in attrs["support"]):
            raise serializers.ValidationError({"support": "Support index outside the product range."})
        if any(value < 0 for value in attrs["targets"]):
            raise serializers.ValidationError({"targets": "Targets must be nonnegative."})
        if attrs["kind"] == PolicyKind.CAPPED.value and attrs.get("cap") is None:
            raise serializers.ValidationError({"cap": "A capped policy needs a cap."})
        return attrs

    def to_spec(self) -> PolicySpec:
        """JSON object keys arrive as strings; bisection counts are keyed by product index."""
        data = dict(self.validated_data)
        iterations = data.pop("bisection_iterations", {}) or {}
        return PolicySpec(
            bisection_iterations={int(key): value for key, value in iterations.items()},
            support=tuple(data.pop("support")),
            **data,
        )


class SimulationReportSerializer(serializers.Serializer):
    policy = serializers.CharField()
    mode = serializers.CharField()
    replicates = serializers.IntegerField()
    seed = serializers.IntegerField()
    mean_revenue = serializers.FloatField()
    revenue_se = serializers.FloatField()
    mean_sales = _float_list()
    sales_variance = _float_list()
    minmax_ratio = serializers.FloatField(allow_null=True)
    ratio_se = serializers.FloatField()
    upper_bound = serializers.FloatField(allow_null=True)
    normalized_revenue = serializers.FloatField(allow_null=True)
    normalized_se = serializers.FloatField(allow_null=True)
    upper_bound_audit = serializers.BooleanField(allow_null=True)
    mean_resolves = serializers.FloatField()


class RandomizationGapSerializer(serializers.Serializer):
    revenue = serializers.FloatField()
    revenue_det = serializers.FloatField()
    ratio = serializers.FloatField()
    lower_bound = serializers.FloatField()
    upper_bound = serializers.FloatField()
    within_upper_bound = serializers.BooleanField()
    reaches_lower_bound = serializers.BooleanField()
