"""Utility modules for spectral MMSBM estimation."""
