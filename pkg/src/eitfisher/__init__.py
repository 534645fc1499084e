"""Fisher-information toolkit for EIT and two-level absorption spectroscopy."""

__version__ = "0.1.0"
