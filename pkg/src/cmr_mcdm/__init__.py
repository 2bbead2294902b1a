"""Multi-criteria ranking of localities from Community Mobility Reports data."""

__version__ = "0.1.0"
