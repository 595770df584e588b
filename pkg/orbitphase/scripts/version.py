"""
Contains the current version of orbitphase.
"""

version = "0.3.0"
""" The current version of orbitphase """
