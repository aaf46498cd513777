from typing import Generator
from typing import Optional
from typing import Tuple

from django.db import models
from django.db.models import Avg
from django.utils import timezone

from .data import Case


class ExperimentRun(models.Model):
    class Status(models.TextChoices):
        INITED = "Inited"
        STARTED = "Started"
        FINISHED = "Finished"

    name = models.CharField(max_length=100)
    dataset = models.CharField(max_length=1024)
    case = models.CharField(
        max_length=3,
        choices=[(c.value, c.value) for c in Case],
        blank=True,
        default="",
        help_text="Outcome construction, blank keeps the dataset outcome",
    )
    config = models.TextField(editable=False, default="")
    output_dir = models.CharField(max_length=1024, editable=False, default="")
    master_seed = models.BigIntegerField(default=0)
    splits = models.IntegerField(default=10)
    status = models.CharField(
        max_length=10,
        editable=False,
        choices=Status.choices,
        default=Status.INITED,
    )
    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(blank=True, null=True, editable=False)
    finished_at = models.DateTimeField(blank=True, null=True, editable=False)
    failed = models.BooleanField(default=False, editable=False)
    message = models.CharField(max_length=1000, editable=False, default="")

    class Meta:
        indexes = [
            models.Index(fields=["dataset"], name="lrd_run_dataset_idx"),
            models.Index(fields=["status"], name="lrd_run_status_idx"),
        ]

    def __repr__(self) -> str:
        return f"<ExperimentRun id={self.id}, {self.name} case {self.case}>"

    def __str__(self) -> str:
        return repr(self)

    def start(self) -> None:
        self.status = self.Status.STARTED
        self.started_at = timezone.now()
        self.save()

    def finish(self) -> None:
        self.status = self.Status.FINISHED
        self.finished_at = timezone.now()
        self.save()

    def set_error(self, message: str) -> None:
        self.failed = True
        self.message = message[:1000]
        self.save()

    @property
    def finished_splits(self) -> models.QuerySet:
        return self.split_results.filter(failed=False)

    @property
    def done_splits(self) -> int:
        return self.split_results.count()

    def _mean(self, field: str) -> Optional[float]:
        return self.finished_splits.aggregate(value=Avg(field))["value"]

    @property
    def mean_disparity(self) -> Optional[float]:
        return self._mean("disparity")

    @property
    def mean_accuracy(self) -> Optional[float]:
        return self._mean("accuracy")

    @property
    def current_progressing_stage(self) -> str:
        for name, state in self.get_stages():
            if state in ("doing", "failed"):
                return name
        return "done"

    def get_stages(self) -> Generator[Tuple[str, str], None, None]:
        found_current = False
        status = self.Status
        if not self.failed:
            for name, start_status in [
                ("waiting_start", status.INITED),
                ("running_splits", status.STARTED),
            ]:
                if self.status == start_status:
                    found_current = True
                    yield name, "doing"
                elif found_current:
                    yield name, "todo"
                else:
                    yield name, "done"
        else:
            started = self.started_at is not None
            yield "waiting_start", "done" if started else "failed"
            yield "running_splits", "failed" if started else "todo"


class SplitResult(models.Model):
    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name="split_results",
    )
    split = models.IntegerField()
    m_obs = models.IntegerField(blank=True, null=True)
    disparity = models.FloatField(blank=True, null=True)
    accuracy = models.FloatField(blank=True, null=True)
    loss_a = models.FloatField(blank=True, null=True)
    loss_b = models.FloatField(blank=True, null=True)
    loss_c = models.FloatField(blank=True, null=True)
    loss_d = models.FloatField(blank=True, null=True)
    cm = models.FloatField(blank=True, null=True)
    logit_shift = models.FloatField(blank=True, null=True)
    failed = models.BooleanField(default=False)
    message = models.CharField(max_length=1000, default="")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        constraints = [
            models.UniqueConstraint(fields=["run", "split"], name="unique_run_split"),
        ]
        ordering = ["run", "split"]

    def __repr__(self) -> str:
        return f"<SplitResult run={self.run_id} split={self.split}>"

    def __str__(self) -> str:
        return repr(self)
