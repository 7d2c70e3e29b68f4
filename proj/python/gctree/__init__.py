"""Geometric coding trees and boundary periodic points of rational maps."""

from ._core import (
    CodingTree,
    GctreeError,
    RationalMap,
    __version__,
    chordal_distance,
    config_problems,
    normalize_config,
    periodic_orbits,
    run,
    verify_manifest,
)

__all__ = [
    "CodingTree",
    "GctreeError",
    "RationalMap",
    "__version__",
    "chordal_distance",
    "config_problems",
    "normalize_config",
    "periodic_orbits",
    "run",
    "verify_manifest",
]
