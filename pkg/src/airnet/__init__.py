"""Topology, turnover and traffic analysis of evolving airport networks."""

__version__ = "0.1.0"
