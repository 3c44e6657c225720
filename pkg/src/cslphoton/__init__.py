"""Photon heating, loss and decoherence under continuous spontaneous localization."""

__version__ = "0.1.0"
