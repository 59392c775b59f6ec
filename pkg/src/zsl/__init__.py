"""Pseudospectral tools for the 2-D Zakharov system linearized around its line soliton."""

__version__ = "0.1.0"
