"""Errors, logging, validation and seed helpers."""
