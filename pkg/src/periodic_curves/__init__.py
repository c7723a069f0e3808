"""Counting formulas and branch-at-infinity verification for the periodic
curves of quadratic rational maps with a marked periodic critical point."""

__version__ = "0.1.0"
