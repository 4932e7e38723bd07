"""Dual-criticality job scheduling on a degrading processor."""

from ._mcsched import *  # noqa: F401,F403
from ._mcsched import __doc__  # noqa: F401
