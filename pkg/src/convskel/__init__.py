"""Network convexity measurement and convex skeleton extraction."""

__version__ = "0.1.0"
