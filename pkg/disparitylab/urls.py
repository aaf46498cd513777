"""disparitylab URL Configuration

The `urlpatterns` list routes URLs to views. For more information please see:
    https://docs.djangoproject.com/en/4.2/topics/http/urls/
"""
from django.contrib import admin
from django.urls import include
from django.urls import path
from rest_framework import routers

from lrd import views

router = routers.DefaultRouter()
router.register(r"run", views.ExperimentRunViewSet)
router.register(r"split", views.SplitResultViewSet)

urlpatterns = [
    path("admin/", admin.site.urls),
    path("", include(router.urls)),
]
