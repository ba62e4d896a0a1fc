"""Numerical laboratory for positive plurisubharmonic and plurisuperharmonic currents on C^n."""

__version__ = "0.1.0"
