from typing import Optional

from django_filters import rest_framework as filters
from rest_framework import mixins
from rest_framework import viewsets
from rest_framework.decorators import action
from rest_framework.response import Response

from .models import ExperimentRun
from .models import SplitResult
from .serializers import ExperimentRunSerializer
from .serializers import SplitResultSerializer


class ExperimentRunViewSet(
    mixins.RetrieveModelMixin,
    mixins.ListModelMixin,
    viewsets.GenericViewSet,
):
    queryset = ExperimentRun.objects.all().order_by("-id")
    serializer_class = ExperimentRunSerializer
    filter_backends = (filters.DjangoFilterBackend,)
    filterset_fields = ("dataset", "case", "status", "failed")

    @action(detail=True, name="Split Results")
    def splits(self, request, pk: Optional[int] = None):
        run = self.get_object()
        serializer = SplitResultSerializer(run.split_results.all(), many=True)
        return Response(serializer.data)

    @action(detail=True, name="Lifecycle Stages")
    def stages(self, request, pk: Optional[int] = None):
        run = self.get_object()
        return Response(dict(run.get_stages()))


class SplitResultViewSet(
    mixins.RetrieveModelMixin,
    mixins.ListModelMixin,
    viewsets.GenericViewSet,
):
    queryset = SplitResult.objects.all().order_by("run", "split")
    serializer_class = SplitResultSerializer
    filter_backends = (filters.DjangoFilterBackend,)
    filterset_fields = ("run", "split", "failed")
