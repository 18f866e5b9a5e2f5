"""Energy-entropy Gibbs-boundary bounds and noise budgets for the 2D Fermi-Hubbard model."""

__version__ = "0.1.0"
