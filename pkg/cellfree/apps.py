from django.apps import AppConfig


class CellfreeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'cellfree'
    verbose_name = 'Cell-free numerics'
