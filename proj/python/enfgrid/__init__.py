from ._enfgrid import *  # noqa: F401,F403
from ._enfgrid import __doc__  # noqa: F401
