"""Exception taxonomy shared across the package.

Everything raised on purpose derives from ScopilotError so the CLI can map
domain failures to exit code 1 and leave genuine bugs to traceback.
"""


class ScopilotError(Exception):
    """Base class for expected, user-reportable failures."""


class ShapeError(ScopilotError):
    """Numeric shapes disagree (matmul inner dims, embedding dims, ...)."""


class ContractError(ScopilotError):
    """An API was called outside its stated precondition."""


class ValidationError(ScopilotError):
    """Input data failed validation (empty title, unknown section, ...)."""


class ParseFailure(ScopilotError):
    """A source document does not satisfy the supported LaTeX/BibTeX subset."""


class IntegrationError(ScopilotError):
    """Corpus integration hit an inconsistency (e.g. unknown bib key)."""


class GenerationError(ScopilotError):
    """Synthetic corpus generation cannot satisfy its parameters."""


class ContextOverflowError(ScopilotError):
    """A token sequence exceeds the model's maximum context length."""

    def __init__(self, length: int, limit: int):
        super().__init__(f"sequence length {length} exceeds context limit {limit}")
        self.length = length
        self.limit = limit


class DegenerateBatchError(ScopilotError):
    """A loss was requested over zero countable positions."""


class NonFiniteError(ScopilotError):
    """A non-finite value was detected where finiteness is required."""


class CandidateError(ScopilotError):
    """A citation accept named a reference outside the pending candidates."""


class StaleIndexError(ScopilotError):
    """A retrieval index does not match the checkpoint/metadata it should."""


class EvaluationError(ScopilotError):
    """An evaluation was requested over an empty or inconsistent input."""


class TransportError(ScopilotError):
    """A remote call failed after the configured number of retries."""

    def __init__(self, message: str, retries: int):
        super().__init__(f"{message} (after {retries} retries)")
        self.retries = retries


class JudgeParseError(ScopilotError):
    """A judge response did not contain a well-formed score block."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class UsageError(ScopilotError):
    """A request named an unknown format/option (maps to exit code 2)."""
