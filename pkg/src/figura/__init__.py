"""figura: metaphor generation engine and conversational service."""

__version__ = "0.1.0"
