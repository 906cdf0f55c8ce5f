"""Spiking neural network engine and brain-inspired circuit experiments."""

__version__ = "0.1.0"
