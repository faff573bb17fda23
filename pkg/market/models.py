from django.core.exceptions import ValidationError
from django.db import models


class ExperimentRun(models.Model):
    class Status(models.TextChoices):
        COMPLETED = "completed", "Completed"
        PARTIAL = "partial", "Completed with failed cells"
        FAILED = "failed", "Failed"

    label = models.CharField(max_length=120, blank=True)
    config = models.JSONField(default=dict, blank=True)
    seed = models.BigIntegerField(default=0)
    status = models.CharField(max_length=16, choices=Status.choices, default=Status.COMPLETED)
    failed_cells = models.PositiveIntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ["-created_at", "-id"]

    def __str__(self) -> str:
        return f"{self.label or 'experiment'} ({self.created_at:%Y-%m-%d %H:%M})"


class ExperimentCell(models.Model):
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name="cells")
    T = models.PositiveIntegerField()
    P0 = models.FloatField()
    gamma = models.FloatField()
    alpha = models.FloatField()
    c_bar = models.PositiveIntegerField(null=True, blank=True)
    K = models.PositiveIntegerField(null=True, blank=True)
    upper_bound = models.FloatField(null=True, blank=True)
    pol_revenue = models.FloatField(null=True, blank=True)
    hr1_revenue = models.FloatField(null=True, blank=True)
    hr2_revenue = models.FloatField(null=True, blank=True)
    pol_ratio = models.FloatField(null=True, blank=True)
    hr1_ratio = models.FloatField(null=True, blank=True)
    hr2_ratio = models.FloatField(null=True, blank=True)
    audits_passed = models.BooleanField(default=True)
    error = models.TextField(blank=True)
    metadata = models.JSONField(default=dict, blank=True)

    class Meta:
        ordering = ["run_id", "T", "P0", "gamma", "alpha", "id"]

    def clean(self) -> None:
        errors = {}
        if not 0.0 < self.P0 < 1.0:
            errors["P0"] = "P0 must lie strictly between 0 and 1."
        if not 0.0 < self.alpha <= 1.0:
            errors["alpha"] = "alpha must lie in (0, 1]."
        if errors:
            raise ValidationError(errors)

    def __str__(self) -> str:
        return f"({self.T},{self.P0:g},{self.gamma:g},{self.alpha:g})"
