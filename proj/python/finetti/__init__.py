"""Finite test spaces, informationally complete frames and de Finetti recovery."""

from ._finetti import *  # noqa: F401,F403
from ._finetti import __doc__  # noqa: F401
