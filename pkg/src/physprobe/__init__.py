"""Seeded physics environments with a budgeted measurement/prediction protocol."""

__version__ = "0.1.0"
