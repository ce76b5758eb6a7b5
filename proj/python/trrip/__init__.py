"""Trace-driven cache hierarchy simulator with temperature-guided replacement."""

from ._trrip import *  # noqa: F401,F403
from ._trrip import __version__  # noqa: F401
