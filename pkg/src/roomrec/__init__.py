"""Room recognition from inaudible chirp echoes."""

__version__ = "0.1.0"
