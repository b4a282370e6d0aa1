"""Entropy rates, counting statistics and exact lattice checks for free-fermion GGEs and quenches."""

__version__ = "0.1.0"
