"""Multi-component Cahn-Hilliard / small-deformation Helfrich model on a sphere."""

__version__ = "0.1.0"
