"""Exception hierarchy shared across the pipeline stages."""

from __future__ import annotations


class DiscodeckError(Exception):
    """Base class for every error raised by this package."""


# ingest
class EmptyDocument(DiscodeckError):
    """No section with at least one paragraph survived parsing."""


class MalformedHeading(DiscodeckError):
    """A heading line could not be turned into a section."""


class ManifestSchemaError(DiscodeckError):
    """The asset manifest does not conform to the expected schema."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


class MissingMedia(DiscodeckError):
    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__("missing media files: " + ", ".join(self.missing))


# discourse
class DegenerateSample(DiscodeckError):
    """Correlation requested over a sample with zero variance."""


# deck
class Overflow(DiscodeckError):
    """Slide text does not fit any layout that can hold its visuals."""


class DecodeError(DiscodeckError):
    pass


# render
class MediaEmbedError(DiscodeckError):
    pass


# gateway
class GatewayError(DiscodeckError):
    pass


class TransportError(GatewayError):
    """Network-level failure talking to the model endpoint."""


class GatewayExhausted(TransportError):
    """Transport kept failing after all backoff retries."""


class ReplayMiss(GatewayError):
    def __init__(self, digest: str, agent: str = ""):
        self.digest = digest
        self.agent = agent
        super().__init__(f"no recorded response for digest {digest} ({agent or 'unknown agent'})")


class SchemaFailure(GatewayError):
    """Agent output still invalid after every repair attempt."""

    def __init__(self, agent: str, errors: list[str], attempts: int):
        self.agent = agent
        self.errors = list(errors)
        self.attempts = attempts
        summary = "; ".join(self.errors[:3])
        super().__init__(f"{agent}: invalid output after {attempts} attempts: {summary}")


class CorruptTranscript(GatewayError):
    pass


# cli
class UnknownKind(DiscodeckError):
    pass
