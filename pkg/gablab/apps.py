from django.apps import AppConfig


class GablabConfig(AppConfig):
    name = 'gablab'
    verbose_name = 'Gabor duality laboratory'
