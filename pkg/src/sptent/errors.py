"""Exception hierarchy.

Two families matter for the CLI exit-code contract: configuration problems
(bad input, exit 2) and numerical invariant violations (corrupted or
inconsistent data detected at runtime, exit 3).
"""

from __future__ import annotations


class SptError(Exception):
    """Base class for all package errors."""


class ConfigError(SptError):
    """Malformed or inconsistent configuration / input structure."""


class RegionError(ConfigError):
    """Region sets violate the A/B/C geometry rules."""


class CapExceeded(ConfigError):
    """Requested state exceeds the dense amplitude cap."""


class GroupMismatch(ConfigError):
    """Operands belong to different groups."""


class DimensionMismatch(ConfigError):
    """Matrix or vector dimensions are incompatible."""


class InvariantViolation(SptError):
    """A numerical invariant failed beyond tolerance."""


class ClosureViolation(InvariantViolation):
    """V(g)V(h) is not proportional to V(gh): not a projective rep."""


class NonIntegerDimension(InvariantViolation):
    """|G| / |Rad(beta)| is not a perfect square: corrupted cocycle."""


class IntertwinerViolation(InvariantViolation):
    """Site isometry does not intertwine the physical and virtual reps."""


class LambdaNotInvariant(InvariantViolation):
    """Bond Schmidt vector is not invariant under the virtual rep."""


class NonPositiveSchmidt(InvariantViolation):
    """Bond Schmidt coefficients must be strictly positive."""


class MixedBlocks(InvariantViolation):
    """Block entropy requires every ensemble block to be pure."""


class IncompleteTable(InvariantViolation):
    """String-order table is missing entries."""


class NonPhysicalReconstruction(InvariantViolation):
    """Reconstructed block has a negative eigenvalue beyond tolerance."""


class NoSuchCharge(InvariantViolation):
    """Requested charge does not occur in the decomposition."""


class ClassMismatch(InvariantViolation):
    """Representation pair is not of conjugate cohomology classes."""


class NotChargeEigenstate(InvariantViolation):
    """Input state does not carry a definite joint charge."""


class ProtocolViolation(InvariantViolation):
    """An LOCC protocol self-check failed."""
