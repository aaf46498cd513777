from django.contrib import admin

from .models import ExperimentRun
from .models import SplitResult


class SplitResultInline(admin.TabularInline):
    model = SplitResult
    extra = 0
    readonly_fields = ("split", "m_obs", "disparity", "accuracy", "cm", "failed", "message")


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ("id", "name", "dataset", "case", "status", "failed", "created_at")
    list_filter = ("dataset", "case", "status", "failed")
    inlines = [SplitResultInline]
