"""Real roots of AE3, the automorphic Calogero potential on the upper half-plane,
and the rank-2 Dunkl commutator coefficients."""

from .arith import SqrtOneTable, correction_constants, eval_C, eval_S, eval_S_star
from .errors import (
    CacheFileError,
    IntegerOverflow,
    InvariantViolation,
    KMCError,
    MemoryBudgetExceeded,
    PoleProximity,
    TableTooSmall,
    TailNotCertified,
)
from .geometry import GL2ZElement, HalfPlanePoint, MinkowskiPoint, reduce_to_fundamental
from .potential import Level, PotentialEstimate, PotentialSeries, TruncationScheme, u_truncated
from .roots import CartanRoot, QuadForm, ReflectionTriple, WeylOrbit, enumerate_level

__version__ = "0.1.0"
