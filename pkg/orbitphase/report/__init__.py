"""
Scene configs, the report tables and their comparison.
"""
