"""Canonical forms and separability certificates for PPT states of rank N."""

__version__ = "0.1.0"
