from rest_framework import serializers

from .models import ExperimentRun
from .models import SplitResult


class SplitResultSerializer(serializers.ModelSerializer):
    class Meta:
        model = SplitResult
        fields = [
            "id",
            "run",
            "split",
            "m_obs",
            "disparity",
            "accuracy",
            "loss_a",
            "loss_b",
            "loss_c",
            "loss_d",
            "cm",
            "logit_shift",
            "failed",
            "message",
            "created_at",
        ]


class ExperimentRunSerializer(serializers.HyperlinkedModelSerializer):
    class Meta:
        model = ExperimentRun
        fields = [
            "id",
            "name",
            "dataset",
            "case",
            "status",
            "master_seed",
            "splits",
            "done_splits",
            "mean_disparity",
            "mean_accuracy",
            "current_progressing_stage",
            "output_dir",
            "config",
            "created_at",
            "started_at",
            "finished_at",
            "failed",
            "message",
        ]
