"""Analysis toolkit for two-user computation broadcast.

Submodules: ``gf`` (prime-field linear algebra), ``distributions`` (exact
pmfs, entropies, converse bound), ``lcb`` (optimal linear schemes),
``matching`` (permutation grids), ``binning`` (Monte-Carlo protocols),
``oracle`` (single-letter brute force), ``instances`` (JSON I/O) and ``cli``.
"""

from .distributions import BoundsReport, GeneralCBInstance, converse_bound, entropy_profile, from_linear
from .errors import CBError
from .gf import FieldMatrix, PrimeField
from .lcb import LinearCBInstance, LinearScheme, build_scheme, verify_scheme
from .matching import MatchingInstance, Permutation, bounds, classify

__version__ = "0.1.0"

__all__ = [
    "BoundsReport",
    "CBError",
    "FieldMatrix",
    "GeneralCBInstance",
    "LinearCBInstance",
    "LinearScheme",
    "MatchingInstance",
    "Permutation",
    "PrimeField",
    "bounds",
    "build_scheme",
    "classify",
    "converse_bound",
    "entropy_profile",
    "from_linear",
    "verify_scheme",
]
