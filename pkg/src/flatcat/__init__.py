"""flatcat: exact arithmetic for arc-system A-infinity categories of decorated
surfaces, flat-surface geodesic enumeration, and refined DT invariants."""

__version__ = "0.1.0"
