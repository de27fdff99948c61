"""Branching systems, Cuntz-Krieger representations and transfer operators on intervals."""

__version__ = "1.0.0"
