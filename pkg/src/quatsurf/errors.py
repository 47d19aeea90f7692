"""Exception hierarchy for quatsurf.

All library-raised errors derive from :class:`QuatSurfError` so callers (and
the CLI) can map failures to exit codes without matching on message text.
"""

from __future__ import annotations


class QuatSurfError(Exception):
    """Base class for all quatsurf errors."""


class DomainError(QuatSurfError):
    """An input value lies outside the operation's domain.

    Examples: non-unit quaternion where a rotation is requested, a point on
    the boundary hyperplane of the hyperbolic metric, an unknown catalog
    family, a chart that is not closed where a degree is requested.
    """


class SingularityError(QuatSurfError):
    """A required inverse does not exist (zero quaternion, singular matrix,
    degenerate tangent plane)."""


class InconsistencyError(QuatSurfError):
    """A quantity that must satisfy a consistency condition does not
    (unsolvable two-sided linear system, incompatible sphere data)."""


class NotImmersedError(QuatSurfError):
    """A sampled surface violates the immersion floor |df| >= eps."""


class NotConformalError(QuatSurfError):
    """A sampled surface violates the conformality tolerance."""


class InputError(QuatSurfError):
    """Malformed user input: files, CLI arguments, grid descriptors."""
