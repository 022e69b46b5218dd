"""
Preview Reference Governor - reference governors with preview for constrained linear systems.
"""

__version__ = "1.0.0"
