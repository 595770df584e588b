"""
Obstacle curves, scenes and the periodic orbit between the obstacles.
"""
