from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-gablab-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    #Third party apps
    'rest_framework',

    #Local apps
    'gablab',
]

# No persistence beyond flat files
DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Django REST Framework (serializers only, no views are routed)
REST_FRAMEWORK = {
    'COERCE_DECIMAL_TO_STRING': False,
    'UNAUTHENTICATED_USER': None,
}


# Gablab

def _theta_grid(value):
    return [float(v) for v in value.split(',') if v.strip()]


GABLAB = {
    # Eigendecompositions are O(N^3), keep groups at desk scale
    'MAX_ORDER': config('GABLAB_MAX_ORDER', default=4096, cast=int),
    'EXHAUSTIVE_MAX_ORDER': config('GABLAB_EXHAUSTIVE_MAX_ORDER', default=64, cast=int),

    # Tolerances
    'RANK_TOL': config('GABLAB_RANK_TOL', default=1e-10, cast=float),
    'DEFAULT_TOL': config('GABLAB_DEFAULT_TOL', default=1e-9, cast=float),
    'ORTHONORMAL_TOL': config('GABLAB_ORTHONORMAL_TOL', default=1e-12, cast=float),

    # Cyclic Jacobi eigensolver
    'JACOBI_TOL': config('GABLAB_JACOBI_TOL', default=1e-13, cast=float),
    'JACOBI_MAX_SWEEPS': config('GABLAB_JACOBI_MAX_SWEEPS', default=100, cast=int),
    # 'jacobi' or 'lapack' (numpy.linalg.eigh)
    'EIGEN_SOLVER': config('GABLAB_EIGEN_SOLVER', default='jacobi'),

    # Regularization grid for the completeness sweep
    'THETA_GRID': config(
        'GABLAB_THETA_GRID',
        default='1,1e-1,1e-2,1e-3,1e-4,1e-5,1e-6',
        cast=_theta_grid,
    ),
}


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'gablab': {
            'handlers': ['console'],
            'level': config('GABLAB_LOG_LEVEL', default='WARNING'),
            'propagate': False,
        },
    },
}
