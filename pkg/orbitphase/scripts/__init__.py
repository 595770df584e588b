"""
The command line interface.
"""
