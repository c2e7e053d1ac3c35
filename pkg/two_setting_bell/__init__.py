"""
Two-setting Bell inequalities for many qubits.

Builds the extended N-qubit Bell operators, certifies their local-hidden-variable
bound by exhaustive enumeration, and evaluates quantum violations for GHZ, W and
cluster states.
"""

__version__ = "0.1.0"
