"""Multiscale verification toolkit for the honeycomb Hubbard model at van Hove filling."""
__version__ = "0.1.0"
