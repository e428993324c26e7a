"""
qknit - optimal circuit partitioning with gate cuts and wire cuts.
"""

__version__ = "0.3.0"
