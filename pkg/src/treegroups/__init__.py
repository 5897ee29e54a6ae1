"""Exact computations with self-similar groups acting on regular rooted trees.

The package builds finite truncations of wreath-recursive groups (GGS groups,
the Grigorchuk group, iterated wreath products and user-defined recursions),
computes their congruence quotients with a deterministic Schreier-Sims engine,
and evaluates the invariants of the associated section dynamics exactly:
the r_n/s_n sequences, Shannon entropies of cone partitions, Bowen's
f-invariant, Hausdorff dimension, Markov-property checks and constructive
process isomorphisms.  All arithmetic is exact (big integers, rationals and
rational combinations of logarithms of primes); floats appear only at display
time.
"""

__version__ = "0.1.0"

from .logquantity import LogQuantity
from .tree_core import Portrait
from .perm_engine import StabChain, build_group
from .group_defs import GroupSpec, PatternSet, ggs_spec, grigorchuk_spec, wreath_spec

__all__ = [
    "LogQuantity",
    "Portrait",
    "StabChain",
    "build_group",
    "GroupSpec",
    "PatternSet",
    "ggs_spec",
    "grigorchuk_spec",
    "wreath_spec",
    "__version__",
]
