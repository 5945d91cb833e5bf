"""Simulation services: training, data, topology, games, orchestration and reports."""
