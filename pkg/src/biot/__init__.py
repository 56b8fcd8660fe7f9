"""Three-field Biot consolidation: monolithic, global-in-time and POD-accelerated solvers."""

__version__ = "0.1.0"
