"""Exception hierarchy for the extractor."""


class ExtractorError(Exception):
    """Base class for all extractor failures."""


class ExtractorConfigError(ExtractorError):
    """A parameter or model name is unusable (unknown model, bad layer)."""


class ExtractorDataError(ExtractorError):
    """The input text cannot be represented under the current settings."""
