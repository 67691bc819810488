"""Exception types shared across the simulator."""


class CredosimError(Exception):
    """Base class for all credosim errors."""


class ConfigurationError(CredosimError):
    """Invalid experiment wiring: unknown agent ids, bad team layout, bad files."""


class ValidationError(CredosimError):
    """A value violates a type invariant (e.g. credo weights off the simplex)."""


class DomainError(CredosimError):
    """Parameters outside the mathematical domain of an operation (e.g. b <= c)."""
