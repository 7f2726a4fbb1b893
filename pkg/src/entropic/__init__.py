"""Conjugation of probability measures and the entropic measure."""
