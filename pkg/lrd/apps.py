from django.apps import AppConfig


class LrdConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "lrd"
    verbose_name = "representational disparity experiments"
