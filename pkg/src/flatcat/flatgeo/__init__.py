"""Flat-surface geometry subpackage."""
