"""Surface-code logical error rates under heterogeneous and defective qubit noise."""

__version__ = "0.1.0"
