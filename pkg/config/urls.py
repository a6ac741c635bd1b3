"""
URL configuration: the admin site lists saved benchmark runs.
"""
from django.contrib import admin
from django.urls import path
from django.views.generic import RedirectView

urlpatterns = [
    path('', RedirectView.as_view(url='/admin/tcq/benchmarkrun/', permanent=False), name='index'),
    path('admin/', admin.site.urls),
]
