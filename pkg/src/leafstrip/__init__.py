"""Leaf-stripping root confidence sets for uniform attachment trees."""

__version__ = "0.1.0"
