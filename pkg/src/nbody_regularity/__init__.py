"""Blow-up geometry of collision subspaces and weighted Sobolev checks for
Schrodinger eigenfunctions with Coulomb and inverse-square potentials."""
from . import errors
from .blowup import *  # noqa: F401,F403
from .charts import *  # noqa: F401,F403
from .config import *  # noqa: F401,F403
from .distance import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .lattice import *  # noqa: F401,F403
from .potential import *  # noqa: F401,F403
from .subspace import *  # noqa: F401,F403
from .verify import *  # noqa: F401,F403

__version__ = "0.1.0"
