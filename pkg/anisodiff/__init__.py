from logging import getLogger, NullHandler

log = getLogger('anisodiff')
log.addHandler(NullHandler())

from .config import Config  # NOQA
conf = Config()
