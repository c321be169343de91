"""Critical loads for quasiconvexity of cavitation-capable stored energies."""

__version__ = "0.1.0"
