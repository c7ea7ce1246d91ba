import logging.config

from l0reg.config import Config


def build_logging(level=None, log_file=None):
    level = level or Config.LOG_LEVEL
    log_file = log_file or Config.LOG_FILE
    handlers = {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    }
    if log_file:
        handlers['file'] = {
            'level': 'DEBUG',
            'class': 'logging.FileHandler',
            'filename': log_file,
            'formatter': 'verbose',
        }
    return {
        'version': 1,
        'disable_existing_loggers': False,
        'handlers': handlers,
        'formatters': {
            'verbose': {
                'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
                'style': '{',
            },
        },
        'loggers': {
            'l0reg': {
                'handlers': list(handlers),
                'level': level,
                'propagate': False,
            },
        },
    }


LOGGING = build_logging()


def configure_logging(level=None, log_file=None):
    logging.config.dictConfig(build_logging(level, log_file))
