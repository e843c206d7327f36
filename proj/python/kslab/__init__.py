from ._kslab import *  # noqa: F401,F403
from ._kslab import __version__  # noqa: F401
