"""Range-free 3D localization: DV-Hop with probabilistic hop-band distances
and a two-objective genetic refinement."""

__version__ = "0.1.0"
