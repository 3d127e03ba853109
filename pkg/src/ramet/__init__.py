"""ramet: exact verifier for right alternative metabelian Lie-nilpotent algebras."""

__version__ = "0.1.0"
