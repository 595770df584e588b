"""
Periodic ray orbits between obstacles in the plane and the phase of the waves that travel along them.
"""
