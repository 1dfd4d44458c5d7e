"""Definition simplification with replayable equivalence certificates."""

__version__ = "0.1.0"
