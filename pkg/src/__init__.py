"""
Depth Hand Tracker - overhead depth-image body part tracking for hand-washing guidance
"""

__version__ = "0.1.0"
