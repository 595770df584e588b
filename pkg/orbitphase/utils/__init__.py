"""
Package with utility modules.
"""
