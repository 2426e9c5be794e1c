"""
Reflection of a weak probe off a strongly pumped multilevel transmon at the end of a
waveguide
"""

__version__ = "0.1.0"
