"""
hydroblow: numerical laboratory for the reduced primitive-equations blow-up model
"""

__version__ = "0.1.0"
