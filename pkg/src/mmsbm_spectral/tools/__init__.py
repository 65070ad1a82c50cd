"""Numerical building blocks: sampling, spectral embedding, polytope geometry."""
