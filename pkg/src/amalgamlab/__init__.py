"""Normal forms, metrics and experiments for a cyclic amalgam of two mapping tori."""

__version__ = "0.1.0"

from .amalgam import (
    AmalgamGroup,
    AmalgamNF,
    HypothesisError,
    bgss_rewrite,
    default_amalgam,
    equal_in_M,
    h_membership,
)
from .metric import DistanceOracle, ball, distance, gromov_product
from .torus import Automorphism, TorusGroup, default_free_torus
from .words import Alphabet, FreeGroup, SurfaceGroup

__all__ = [
    "Alphabet", "AmalgamGroup", "AmalgamNF", "Automorphism", "DistanceOracle", "FreeGroup",
    "HypothesisError", "SurfaceGroup", "TorusGroup", "ball", "bgss_rewrite", "default_amalgam",
    "default_free_torus", "distance", "equal_in_M", "gromov_product", "h_membership",
]
