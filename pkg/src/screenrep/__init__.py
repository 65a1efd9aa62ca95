"""Female-representation features from screenplay dialogue and their principal components."""

__version__ = "0.1.0"
