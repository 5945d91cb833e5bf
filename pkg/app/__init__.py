"""Decentralized federated learning simulator with pFedGame aggregation."""

__version__ = "0.1.0"
