"""FLM Solver - Facility Location with Matching approximation toolkit"""
__version__ = "1.0.0"
