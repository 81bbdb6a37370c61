"""Exception types shared across the package."""


class DinechatError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DinechatError):
    """Invalid or missing configuration."""


class TraceParseError(DinechatError):
    """A workload trace file could not be parsed."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class NotFoundError(DinechatError):
    """A referenced resource (trace, session, experiment) does not exist."""


class OutOfRangeError(DinechatError):
    """Requested timesteps fall outside the recorded trace."""

    def __init__(self, missing, valid_range):
        self.missing = sorted(missing)
        self.valid_range = valid_range
        lo, hi = valid_range
        super().__init__(
            f"timesteps {self.missing} not in trace (valid range {lo}-{hi})"
        )


class BudgetError(DinechatError):
    """A token budget cannot be satisfied."""

    def __init__(self, message, *, estimated=None, reply_budget=None, limit=None):
        self.estimated = estimated
        self.reply_budget = reply_budget
        self.limit = limit
        super().__init__(message)


class RateLimitedError(DinechatError):
    """The per-minute token budget is exhausted; retry after `wait_seconds`."""

    def __init__(self, wait_seconds):
        self.wait_seconds = wait_seconds
        super().__init__(f"rate budget exhausted, retry in {wait_seconds:.3f}s")


class CredentialError(DinechatError):
    """Missing or rejected API credential."""


class GatewayError(DinechatError):
    """The completion backend failed after retries."""

    def __init__(self, message, attempts=None):
        self.attempts = attempts or []
        super().__init__(message)


class ChainOfThoughtError(DinechatError):
    """Stage-1 of a two-stage prompt did not return a parseable timestep list."""
