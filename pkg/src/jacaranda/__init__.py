"""Exact computations on colored binary tree substitutions.

Core objects: bit-packed tree prefixes, length-2 marked substitutions with a
4-letter grammar, and the Jacaranda rule (0 -> 0(1,0), 1 -> 1(1,0), grammar
BBAB) whose fixed point with root 0 is the Jacaranda tree.  On top of those:
line-structure verification, inverse (source) maps, exact patch-complexity
tables with growth-bound checks, finite-depth stabilizer refutations, and
entropy estimators for the shift action and its binary skew product.
"""

from jacaranda.core import (
    JACARANDA,
    Dyadic,
    TreePrefix,
    TreeSubstitution,
    distance,
    fixed_point,
    read_tree,
    tree_from_bytes,
    tree_to_bytes,
    write_tree,
)
from jacaranda.kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "JACARANDA",
    "Dyadic",
    "TreePrefix",
    "TreeSubstitution",
    "distance",
    "fixed_point",
    "read_tree",
    "tree_from_bytes",
    "tree_to_bytes",
    "write_tree",
    "KERNEL_BACKEND",
    "__version__",
]
