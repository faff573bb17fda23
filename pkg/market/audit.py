import dataclasses
import logging

from django.db import transaction
from django.utils import timezone

from .models import ExperimentCell, ExperimentRun

logger = logging.getLogger(__name__)


def _float_or_none(value):
    return None if value is None else float(value)


@transaction.atomic
def record_experiment(result, label: str = "") -> ExperimentRun:
    """Persist a finished experiment run and one row per cell."""
    config = dataclasses.asdict(result.config)
    failures = len(result.failures)
    if failures == len(result.cells):
        status = ExperimentRun.Status.FAILED
    elif failures:
        status = ExperimentRun.Status.PARTIAL
    else:
        status = ExperimentRun.Status.COMPLETED
    run = ExperimentRun.objects.create(
        label=label or result.config.label,
        config=config,
        seed=result.config.seed,
        status=status,
        failed_cells=failures,
        finished_at=timezone.now(),
    )
    cells = []
    for cell in result.cells:
        values = {}
        for name in ("pol", "hr1", "hr2"):
            report = cell.reports.get(name)
            values[f"{name}_revenue"] = _float_or_none(report.normalized_revenue) if report else None
            values[f"{name}_ratio"] = _float_or_none(report.minmax_ratio) if report else None
        cells.append(ExperimentCell(
            run=run,
            T=cell.T,
            P0=cell.P0,
            gamma=cell.gamma,
            alpha=cell.alpha,
            c_bar=cell.c_bar,
            K=cell.K,
            upper_bound=_float_or_none(cell.upper_bound),
            audits_passed=all(cell.audits.values()) if cell.audits else not cell.failed,
            error=cell.error or "",
            metadata={"method": cell.method, "audits": cell.audits},
            **values,
        ))
    ExperimentCell.objects.bulk_create(cells)
    logger.debug("Recorded experiment run %s with %d cells", run.pk, len(cells))
    return run
