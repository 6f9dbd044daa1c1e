"""bowlab: combinatorics and characteristic classes of bow varieties."""

__version__ = "0.1.0"
