"""Matrix product state classifiers with entanglement and information-flow diagnostics."""

__version__ = "0.1.0"
