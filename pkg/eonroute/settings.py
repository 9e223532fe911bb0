"""
Django settings for the eonroute simulator.

There is no web frontend or database here: Django hosts the management
commands (run, sweep, topology), the dramatiq broker used by sweeps and
the test runner. Everything that varies per machine comes from the
environment (or the file pointed at by ENV_PATH).
"""

from pathlib import Path

import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# ----- Environment Setup -----

env = environ.Env()
env.read_env(env.str("ENV_PATH", default=".env"))

SECRET_KEY = env.str("SECRET_KEY", "simulations-do-not-sign-anything")
ENVIRONMENT = env.str("ENVIRONMENT", "development")
DEBUG = env.bool("DEBUG", True)
LOG_LEVEL = env.str("LOG_LEVEL", "INFO")

# Unattended error reporting, mostly useful for long sweeps on remote boxes:
dsn = env.str("SENTRY_DSN", None)
if not DEBUG and dsn:
    import sentry_sdk
    from sentry_sdk.integrations.django import DjangoIntegration
    from sentry_sdk.integrations.dramatiq import DramatiqIntegration

    sentry_sdk.init(
        dsn=dsn,
        environment=ENVIRONMENT,
        integrations=[DjangoIntegration(), DramatiqIntegration()],
        traces_sample_rate=env.float("SENTRY_SAMPLE_RATE", 0.0),
    )

# Sweeps: how many runs execute at once, and how long a single one may take.
SWEEP_WORKERS = env.int("SWEEP_WORKERS", 2)
SWEEP_TIME_LIMIT_MS = env.int("SWEEP_TIME_LIMIT_MS", 6 * 60 * 60 * 1000)

# Extra directory with `<name>.conf` preset bundles, searched after the built-in ones.
RMSA_PRESETS_DIR = env.str("RMSA_PRESETS_DIR", None)

# Long acceptance reproductions (minutes each) only run when asked for.
RUN_SLOW_TESTS = env.bool("RUN_SLOW_TESTS", False)

# Without Redis, sweeps run on an in-memory broker inside the sweep process.
# With it, external `manage.py rundramatiq` workers can pick up sweep entries too.
REDIS_URL = env.str("REDIS_URL", None)

# --- STUFF BELOW THIS POINT SHOULD NOT BE CONFIGURABLE PER ENVIRONMENT. ---

# fmt: off
INSTALLED_APPS = [
    "django_dramatiq",

    "rmsa",
]
# fmt: on

if REDIS_URL:
    DRAMATIQ_BROKER = {
        "BROKER": "dramatiq.brokers.redis.RedisBroker",
        "OPTIONS": {"url": REDIS_URL, "namespace": "eonroute-dramatiq-broker"},
        "MIDDLEWARE": [
            "dramatiq.middleware.AgeLimit",
            "dramatiq.middleware.TimeLimit",
            "dramatiq.middleware.Callbacks",
            "dramatiq.middleware.Retries",
        ],
    }
else:
    DRAMATIQ_BROKER = {
        "BROKER": "dramatiq.brokers.stub.StubBroker",
        "OPTIONS": {},
        "MIDDLEWARE": [
            "dramatiq.middleware.TimeLimit",
            "dramatiq.middleware.Callbacks",
            "dramatiq.middleware.Retries",
        ],
    }

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "{asctime} {levelname} {name}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "root": {"handlers": ["console"], "level": "WARNING"},
    "loggers": {
        "rmsa": {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False},
        "dramatiq": {"handlers": ["console"], "level": "WARNING", "propagate": False},
    },
}

TEST_RUNNER = "rmsa.tests.runner.SimulationTestRunner"

USE_I18N = False
USE_TZ = True
TIME_ZONE = "Etc/UTC"

# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
