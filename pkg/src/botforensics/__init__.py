"""Bot versus human cohort forensics for tweet corpora."""

__version__ = "0.1.0"
