"""Minimum-energy target control of linear discrete-time networks.

The compiled extension carries the full API; this package re-exports it.
"""

from netctrl._core import *  # noqa: F401,F403
from netctrl import _core as core  # noqa: F401

__all__ = [name for name in dir(core) if not name.startswith("_")]
__version__ = "0.1.0"
