from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .trace import RunTrace


class PDMMError(Exception):
    pass


class InputError(PDMMError, ValueError):
    """Invalid input data or parameters."""


class GraphConnectivityError(InputError):
    pass


class DomainError(InputError):
    """A point lies outside the domain of a mirror map."""


class UnsupportedGeometryError(InputError):
    pass


class ParameterError(InputError):
    pass


class UnboundedProblemError(InputError):
    pass


class SolverError(PDMMError, RuntimeError):
    """Numerical failure. ``trace`` holds the partial run when raised by ``run``."""

    trace: RunTrace | None = None


class EigenSolverError(SolverError):
    pass


class ProxSolverError(SolverError):
    pass


class CertificateError(SolverError):
    pass
