"""Near-optimal design space exploration for renewable fuel import chains."""

__version__ = "0.1.0"
