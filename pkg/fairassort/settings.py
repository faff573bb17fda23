"""
Django settings for the fairassort project.

Generated by 'django-admin startproject' using Django 5.0.14 and trimmed to
what a batch-computation project needs: no URLs, templates or middleware.

For more information on this file, see
https://docs.djangoproject.com/en/5.0/topics/settings/
"""

import os
import secrets
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured


def env_bool(name, default=False):
    return os.getenv(name, str(default)).lower() in ("1", "true", "yes")


def env_list(name, default):
    value = os.getenv(name)
    if not value:
        return default
    return [item.strip() for item in value.split(",") if item.strip()]


def env_int(name, default):
    value = os.getenv(name)
    if not value:
        return default
    try:
        return int(value)
    except ValueError as exc:
        raise ImproperlyConfigured(f"{name} must be an integer, got {value!r}") from exc


def env_float(name, default):
    value = os.getenv(name)
    if not value:
        return default
    try:
        return float(value)
    except ValueError as exc:
        raise ImproperlyConfigured(f"{name} must be a number, got {value!r}") from exc


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY")

DEBUG = env_bool("DJANGO_DEBUG", default=True)

if not SECRET_KEY:
    if DEBUG:
        SECRET_KEY = secrets.token_urlsafe(50)
    else:
        raise ImproperlyConfigured("DJANGO_SECRET_KEY must be set")

ALLOWED_HOSTS = env_list("DJANGO_ALLOWED_HOSTS", ["127.0.0.1", "localhost"])


# Application definition

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'rest_framework',
    'market.apps.MarketConfig',
]


# Database
# https://docs.djangoproject.com/en/5.0/ref/settings/#databases
# Only `experiment --record` touches the database.

DB_NAME = os.getenv("DB_NAME")
if DB_NAME:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.postgresql",
            "NAME": DB_NAME,
            "USER": os.getenv("DB_USER", "fairassort"),
            "PASSWORD": os.getenv("DB_PASSWORD", ""),
            "HOST": os.getenv("DB_HOST", "localhost"),
            "PORT": os.getenv("DB_PORT", "5432"),
        }
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "db.sqlite3",
        }
    }


# Internationalization
# https://docs.djangoproject.com/en/5.0/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Solver and simulation knobs

FAIR_ASSORT_THREADS = env_int("FAIR_ASSORT_THREADS", 1)
FAIR_ASSORT_FEASIBILITY_TOL = env_float("FAIR_ASSORT_FEASIBILITY_TOL", 1e-9)
FAIR_ASSORT_BRUTEFORCE_MAX_N = env_int("FAIR_ASSORT_BRUTEFORCE_MAX_N", 16)
FAIR_ASSORT_EXACT_MAX_N = env_int("FAIR_ASSORT_EXACT_MAX_N", 12)
FAIR_ASSORT_LP_MAX_ITERATIONS = env_int("FAIR_ASSORT_LP_MAX_ITERATIONS", 5000)

if FAIR_ASSORT_THREADS < 1:
    raise ImproperlyConfigured("FAIR_ASSORT_THREADS must be at least 1")


LOG_LEVEL = os.getenv("FAIR_ASSORT_LOG_LEVEL", "WARNING").upper()
LOG_FILE = os.getenv("DJANGO_LOG_FILE", "")
_error_handler = {
    "level": "ERROR",
    "class": "logging.StreamHandler",
    "formatter": "plain",
}
if LOG_FILE:
    log_dir = os.path.dirname(LOG_FILE) or "."
    try:
        os.makedirs(log_dir, exist_ok=True)
        with open(LOG_FILE, "a"):
            pass
        _error_handler = {
            "level": "ERROR",
            "class": "logging.FileHandler",
            "filename": LOG_FILE,
            "formatter": "plain",
            "delay": True,
        }
    except OSError:
        # Fallback to console if file is not writable (e.g., CI)
        pass

# StreamHandler writes to stderr; stdout is reserved for JSON/CSV output.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
        "errors": _error_handler,
    },
    "loggers": {
        "market": {
            "handlers": ["console"] + (["errors"] if LOG_FILE else []),
            "level": LOG_LEVEL,
            "propagate": False,
        },
    },
}
