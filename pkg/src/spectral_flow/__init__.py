"""Spectral amplitude flows on a Dirichlet sine basis, with Weyl-law tools."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .eigenbasis import *  # noqa: F401,F403
from .overlap import *  # noqa: F401,F403
from .flow import *  # noqa: F401,F403
from .diagnostics import *  # noqa: F401,F403
from .weylgeom import *  # noqa: F401,F403
