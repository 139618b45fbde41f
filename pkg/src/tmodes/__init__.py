"""Two bosonic modes coupled through a random-telegraph phase."""

__version__ = "0.1.0"
