"""Bot-or-human classification of social accounts from the structure of their follow networks."""

__version__ = "0.1.0"
