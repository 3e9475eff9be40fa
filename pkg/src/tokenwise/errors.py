"""Domain error types.

Every error the library raises on bad *inputs* (as opposed to programmer
mistakes, which stay plain ValueError/TypeError) derives from TokenwiseError.
The ``kind`` attribute feeds the CLI's machine-readable ``ERR:<kind>:`` line.
"""


class TokenwiseError(Exception):
    """Base class for recoverable domain errors."""

    kind = "error"


class VocabularyError(TokenwiseError):
    """Alphabet or token list violates a vocabulary invariant."""

    kind = "vocabulary"


class EncodingError(TokenwiseError):
    """Text or token ids outside the vocabulary's domain."""

    kind = "invalid-encoding"


class UndefinedConditionalError(TokenwiseError):
    """Conditioning event has probability zero or is not a valid encoding."""

    kind = "undefined-conditional"


class UnseenContextError(TokenwiseError):
    """Count model has no observations for a context and no smoothing."""

    kind = "unseen-context"


class DegenerateDistributionError(TokenwiseError):
    """Every continuation with positive mass is forbidden."""

    kind = "degenerate-distribution"


class EnumerationLimitError(TokenwiseError):
    """Brute-force enumeration would exceed the configured leaf budget."""

    kind = "enumeration-limit"


class FileFormatError(TokenwiseError):
    """A JSON artifact (vocabulary or chain file) fails validation."""

    kind = "file-format"
