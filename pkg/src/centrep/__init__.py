"""Exact witnesses for nontrivial central actions on the cohomology of nilpotent Lie algebras."""

from .exterior import Multivector, NilpotentOperator
from .instances import Instance, InstanceSpec, random_instance, targeted_instance
from .lie import LieAlgebra, build_instance_algebra, central_action, cohomology
from .linalg import Matrix, Subspace
from .structure import CanonicalDecomposition, canonical_decomposition
from .witness import CASE_TAGS, WitnessCertificate, construct_witness, verify_certificate

__version__ = "0.1.0"

__all__ = [
    "CASE_TAGS",
    "CanonicalDecomposition",
    "Instance",
    "InstanceSpec",
    "LieAlgebra",
    "Matrix",
    "Multivector",
    "NilpotentOperator",
    "Subspace",
    "WitnessCertificate",
    "build_instance_algebra",
    "canonical_decomposition",
    "central_action",
    "cohomology",
    "construct_witness",
    "random_instance",
    "targeted_instance",
    "verify_certificate",
]
