"""gridlag

Adaptive background partitioning and two-state game prediction for
simultaneous-movement multiplayer games, with a seeded network simulator
to measure it.
"""

__version__ = '0.1.0'
