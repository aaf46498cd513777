# Generated by Django 4.2.7 on 2026-10-17 08:12
import django.db.models.deletion
from django.db import migrations
from django.db import models


class Migration(migrations.Migration):
    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("name", models.CharField(max_length=100)),
                ("dataset", models.CharField(max_length=1024)),
                (
                    "case",
                    models.CharField(
                        choices=[
                            ("I", "I"),
                            ("II", "II"),
                            ("III", "III"),
                            ("IV", "IV"),
                            ("V", "V"),
                        ],
                        blank=True,
                        default="",
                        help_text="Outcome construction, blank keeps the dataset outcome",
                        max_length=3,
                    ),
                ),
                ("config", models.TextField(default="", editable=False)),
                (
                    "output_dir",
                    models.CharField(default="", editable=False, max_length=1024),
                ),
                ("master_seed", models.BigIntegerField(default=0)),
                ("splits", models.IntegerField(default=10)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("Inited", "Inited"),
                            ("Started", "Started"),
                            ("Finished", "Finished"),
                        ],
                        default="Inited",
                        editable=False,
                        max_length=10,
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                (
                    "started_at",
                    models.DateTimeField(blank=True, editable=False, null=True),
                ),
                (
                    "finished_at",
                    models.DateTimeField(blank=True, editable=False, null=True),
                ),
                ("failed", models.BooleanField(default=False, editable=False)),
                (
                    "message",
                    models.CharField(default="", editable=False, max_length=1000),
                ),
            ],
            options={
                "indexes": [
                    models.Index(fields=["dataset"], name="lrd_run_dataset_idx"),
                    models.Index(fields=["status"], name="lrd_run_status_idx"),
                ],
            },
        ),
        migrations.CreateModel(
            name="SplitResult",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("split", models.IntegerField()),
                ("m_obs", models.IntegerField(blank=True, null=True)),
                ("disparity", models.FloatField(blank=True, null=True)),
                ("accuracy", models.FloatField(blank=True, null=True)),
                ("loss_a", models.FloatField(blank=True, null=True)),
                ("loss_b", models.FloatField(blank=True, null=True)),
                ("loss_c", models.FloatField(blank=True, null=True)),
                ("loss_d", models.FloatField(blank=True, null=True)),
                ("cm", models.FloatField(blank=True, null=True)),
                ("logit_shift", models.FloatField(blank=True, null=True)),
                ("failed", models.BooleanField(default=False)),
                ("message", models.CharField(default="", max_length=1000)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="split_results",
                        to="lrd.experimentrun",
                    ),
                ),
            ],
            options={
                "ordering": ["run", "split"],
            },
        ),
        migrations.AddConstraint(
            model_name="splitresult",
            constraint=models.UniqueConstraint(
                fields=("run", "split"),
                name="unique_run_split",
            ),
        ),
    ]
