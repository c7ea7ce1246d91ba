import os
from dotenv import load_dotenv

load_dotenv()


def _float(name, default):
    return float(os.environ.get(name) or default)


def _int(name, default):
    return int(os.environ.get(name) or default)


class Config:
    LOG_LEVEL = os.environ.get('L0REG_LOG_LEVEL') or 'WARNING'
    LOG_FILE = os.environ.get('L0REG_LOG_FILE') or None

    ZERO_ABS = _float('L0REG_ZERO_ABS', 1e-10)
    ZERO_REL = _float('L0REG_ZERO_REL', 1e-12)
    RANK_TOL = _float('L0REG_RANK_TOL', 1e-10)

    MAX_DIMENSION = _int('L0REG_MAX_DIMENSION', 20)
    MAX_PATTERNS = _int('L0REG_MAX_PATTERNS', 2 ** 20)
    PARALLEL_WIDTH = _int('L0REG_PARALLEL_WIDTH', 1)

    PROBE_SLACK = _float('L0REG_PROBE_SLACK', 1e-9)
    PROBE_SAMPLES = _int('L0REG_PROBE_SAMPLES', 1000)
