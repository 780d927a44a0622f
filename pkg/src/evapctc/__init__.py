"""Final-state black-hole evaporation channels and self-referential circuits."""

__version__ = "0.1.0"
