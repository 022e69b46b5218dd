"""
Core modules for the Preview Reference Governor toolkit.
"""
