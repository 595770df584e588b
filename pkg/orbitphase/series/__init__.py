"""
Taylor expansions around the periodic orbit:

- dist_series.py: expansion of the leg distances
- phase_solver.py: coefficients of the limiting phase and of the chi maps
"""
