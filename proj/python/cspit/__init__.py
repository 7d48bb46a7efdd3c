"""Characteristic-time cache models and CS-PIT event simulation.

The heavy lifting lives in the compiled extension; this package simply
re-exports it.
"""

from cspit._core import *  # noqa: F401,F403
from cspit._core import __doc__  # noqa: F401

__version__ = "0.1.0"
