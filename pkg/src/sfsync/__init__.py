"""Dynamic scale-free network synchronization and scale-free property analysis."""

__version__ = "0.1.0"
