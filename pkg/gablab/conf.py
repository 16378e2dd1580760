"""
Settings for the gablab app are all namespaced in the GABLAB setting.
For example your project's `settings.py` file might look like this:

GABLAB = {
    'MAX_ORDER': 1024,
    'RANK_TOL': 1e-11,
}

Values that are not overridden fall back to the defaults below, and the
defaults are also used when gablab runs outside a configured Django project.
"""
from django.conf import settings

DEFAULTS = {
    'MAX_ORDER': 4096,
    'EXHAUSTIVE_MAX_ORDER': 64,
    'RANK_TOL': 1e-10,
    'DEFAULT_TOL': 1e-9,
    'ORTHONORMAL_TOL': 1e-12,
    'JACOBI_TOL': 1e-13,
    'JACOBI_MAX_SWEEPS': 100,
    'EIGEN_SOLVER': 'jacobi',
    'THETA_GRID': [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
}


class GablabSettings:
    """
    A settings object that allows gablab settings to be accessed as
    properties, e.g. `gablab_settings.MAX_ORDER`.

    User settings are read on every access so that `override_settings`
    in tests takes effect immediately.
    """

    def __init__(self, defaults=None):
        self.defaults = defaults or DEFAULTS

    @property
    def user_settings(self):
        if not settings.configured:
            return {}
        return getattr(settings, 'GABLAB', {})

    def __getattr__(self, attr):
        if attr not in self.defaults:
            raise AttributeError(f"Invalid gablab setting: '{attr}'")
        return self.user_settings.get(attr, self.defaults[attr])


gablab_settings = GablabSettings(DEFAULTS)
