"""Scattering-constrained quadratic programs, their duals, and the verlan protocols."""
