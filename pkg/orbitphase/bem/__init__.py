"""
Boundary element discretisation of the scattering problem, the reflection cycle and its mode.
"""
