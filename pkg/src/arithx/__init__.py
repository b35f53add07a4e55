"""Cayley hypergraphs, multilinear norms and polynomial-method constructions over finite groups."""

__version__ = "0.1.0"
