"""Green's function of the three-dimensional Rashba-Dresselhaus Hamiltonian
evaluated through multivariate hypergeometric series."""

__version__ = "0.1.0"
