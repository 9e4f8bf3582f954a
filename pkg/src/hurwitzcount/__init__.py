"""Exact desk-scale counting of G-covers of the projective line.

Subpackages cover finite group arithmetic, braid orbit enumeration,
lifting invariants and their torsors, the obstruction group with its
residues, configuration-space point counts, regularized Euler products
and the assembled leading-constant predictions, validated against
independent Kummer-theoretic oracles.
"""

__version__ = "0.1.0"
