"""Exception hierarchy shared across the package."""


class EntroreadError(Exception):
    """Base class for all package errors."""


class CorpusError(EntroreadError):
    """Malformed or inconsistent reading-measure data."""


class DistributionFormatError(EntroreadError):
    """Bad FULLDIST/SUMMARY file: wrong magic, truncation, or normalization."""


class DomainError(EntroreadError):
    """Numeric input outside an operation's domain (bad distribution, k <= 1, ...)."""


class InfiniteSurprisalError(DomainError):
    """The realized outcome has probability zero under the distribution."""


class ContractError(EntroreadError):
    """An operation was called in a way its contract forbids."""


class ConfigError(EntroreadError):
    """Invalid configuration: unknown experiment id, missing alpha, bad weights."""


class ProvenanceMismatchError(EntroreadError):
    """Two per-item vectors do not cover the same rows; pairing them is unsound."""
