"""
Configuration defaults for Keyframer.

Values here are module constants; the few that may be overridden from the
environment are read through the functions below at call time.
"""
import os

from .errors import ValidationError

DEFAULT_OP_CAP = 8
DEFAULT_MAX_KEYFRAMES = 4
DEFAULT_TOP_K = 5
DEFAULT_MAXBINS = 10

DEFAULT_STAGE_DURATION = 600.0
DEFAULT_EASING = "linear"

OP_CAP_ENV = "GEMINI2_OP_CAP"
DB_PATH_ENV = "KEYFRAMER_DB_PATH"

# Default library database path (can be overridden)
DEFAULT_DB_PATH = os.path.join(os.path.expanduser('~'), '.keyframer', 'animations.db')


def op_cap(environ=None):
    """
    Return the maximum number of edit operations the enumerator accepts.

    Args:
        environ (dict, optional): Environment to read; defaults to os.environ

    Returns:
        int: The configured cap
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(OP_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_OP_CAP
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{OP_CAP_ENV} must be an integer, got {raw!r}", path=OP_CAP_ENV)
    if value < 1:
        raise ValidationError(f"{OP_CAP_ENV} must be positive, got {value}", path=OP_CAP_ENV)
    return value


def db_path(environ=None):
    """Return the animation library database path."""
    environ = os.environ if environ is None else environ
    return environ.get(DB_PATH_ENV) or DEFAULT_DB_PATH
