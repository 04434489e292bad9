"""Python access to the hyperlab core."""

from ._hyperlab import *  # noqa: F401,F403
from ._hyperlab import __doc__  # noqa: F401
