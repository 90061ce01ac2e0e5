"""Exception hierarchy shared across the service."""


class SentinelError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SentinelError):
    """Input document/bytes do not parse as the expected file format."""


class ContractError(SentinelError):
    """Parsed input violates a structural invariant (duplicates, empty lists, ...)."""


class InvalidRecord(SentinelError):
    """A record that failed validation was passed where a valid one is required."""


class SchemaMismatch(SentinelError):
    """Model and schema (or vector and model) disagree on arity, labels or version."""


class IntegrityError(SentinelError):
    """A model artifact violates an internal invariant (bad tree, bad distribution)."""


class DegenerateData(SentinelError):
    """Training data is unusable (reserved; single-class data warns instead)."""


class EmptyData(SentinelError):
    """Training data is empty."""


class TooManyFeatures(SentinelError):
    """Exact Shapley enumeration requested above the feature-count guard."""


class EmptyBackground(SentinelError):
    """Attribution requested with an empty background set."""


class SingularFit(SentinelError):
    """Unregularized surrogate regression hit a rank-deficient design matrix."""


class ConfigError(SentinelError):
    """A present-but-invalid configuration value."""


class ProviderError(SentinelError):
    """Base class for LLM provider failures. Context is always redacted."""


class AuthError(ProviderError):
    """Provider rejected credentials (401/403). Never retried."""


class RateLimited(ProviderError):
    """Provider kept returning 429/5xx until the retry budget ran out."""


class ProviderTimeout(ProviderError):
    """Provider did not answer within the configured timeout budget."""


class MalformedResponse(ProviderError):
    """Provider reply could not be parsed into an explanation."""


class StreamClosed(SentinelError):
    """Message stream has no more messages (normal replay termination)."""


class FileError(SentinelError):
    """Replay input file missing or unreadable."""


class HeaderMismatch(SentinelError):
    """Replay CSV header does not line up with the schema feature names."""


class StorageFull(SentinelError):
    """Event log could not append; ingest must halt (durability over availability)."""


class BadFilter(SentinelError):
    """Event query filter is out of contract (e.g. limit too large)."""


class NotFound(SentinelError):
    """Referenced entity (event id) does not exist."""


class NotReady(SentinelError):
    """Operation needs a deployed schema/model that is not there yet."""


class AttributionPending(SentinelError):
    """Explanation requested before the event's attribution arrived."""
