"""Common exception base for the package."""


class AICardsError(Exception):
    """Base class for every error raised by aicards code."""
