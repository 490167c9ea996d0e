"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class NarrafactError(Exception):
    """Base class for every error raised by this package."""


class MalformedInput(NarrafactError):
    """An input file or payload does not match its declared format."""


class IoError(NarrafactError):
    """Reading or writing an artifact failed at the filesystem level."""


class InvalidParams(NarrafactError):
    """A parameter violates a documented precondition."""


class InvalidInput(NarrafactError):
    """A runtime input (chunk, draft, ...) violates a precondition."""


class EmptyInput(NarrafactError):
    """Text input was empty where non-empty text is required."""


class ProviderExhausted(NarrafactError):
    """A scripted response queue ran dry."""


class RemoteError(NarrafactError):
    """A remote model call failed after all retries."""


class ReplayMismatch(NarrafactError):
    """A replayed request does not match the recorded transcript."""


class EmptyResponse(NarrafactError):
    """The model returned an empty response where content is required."""


class NoFacts(NarrafactError):
    """Fact decomposition produced zero atomic facts for a whole summary."""


class DegenerateSeries(NarrafactError):
    """A score series is too small or constant for correlation statistics."""


class SentenceCountMismatch(NarrafactError):
    """A perturbed summary does not preserve the reference sentence count."""


class ContextOverflow(NarrafactError):
    """Evidence text exceeds the refinement context budget even after truncation."""


class IllegalTransition(NarrafactError):
    """A run action is not legal in the run's current stage."""


class NotReady(NarrafactError):
    """An export was requested before the producing stage completed."""


class UnknownRun(NarrafactError):
    """No persisted run exists for the given id."""


class RunBusy(NarrafactError):
    """Another mutation is already in flight for this run."""
