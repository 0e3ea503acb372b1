"""blimpsim: deformable airship flight-dynamics simulation and control."""

__version__ = "0.1.0"
