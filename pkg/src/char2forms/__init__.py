"""Quadratic forms, quaternion symbols and differential-form cohomology
over characteristic-2 field towers, with certificate-carrying decision
procedures and a scenario-driven command line front end."""

__version__ = "0.1.0"
