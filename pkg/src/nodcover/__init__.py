"""Combinatorial n-od covers of placed graphs, graph-word expansions and their plane realizations."""

__version__ = "0.1.0"
