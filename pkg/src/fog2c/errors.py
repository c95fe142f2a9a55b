"""Exception hierarchy shared by every fog2c module."""


class FogError(Exception):
    """Base class for all library errors."""


class DomainError(FogError, ValueError):
    """An argument lies outside the domain of a cost function."""


class InfeasibleError(FogError):
    """No configuration satisfies the latency constraint."""


class UnreachableError(FogError):
    """No route exists between two nodes."""


class ConfigError(FogError):
    """A scenario config (or a strategy/topology pairing) is invalid.

    ``errors`` holds every problem found, each with its key path.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
