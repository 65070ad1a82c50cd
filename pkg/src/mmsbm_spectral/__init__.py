"""mmsbm-spectral - spectral estimation of the undirected mixed membership stochastic blockmodel."""

__version__ = "0.1.0"
