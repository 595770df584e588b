"""
Closed form results and numerical oracles for two equal disks.
"""
