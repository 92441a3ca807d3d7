"""Uncertainty measures and extremal states of the quantum rotor."""
