"""Argyris finite elements for clamped Kirchhoff plates in contact with an obstacle."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
