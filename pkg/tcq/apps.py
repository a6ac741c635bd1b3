from django.apps import AppConfig


class TcqConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'tcq'
    verbose_name = 'Trellis Coded Quantization'
