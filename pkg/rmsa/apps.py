from django.apps import AppConfig


class RmsaConfig(AppConfig):
    name = "rmsa"
    verbose_name = "Routing, modulation and spectrum assignment"
