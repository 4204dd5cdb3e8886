"""Frequency units. Public APIs take GHz, MHz and ns; Hamiltonians are angular frequencies in rad/ns.

The conversion happens once, where a Hamiltonian matrix is built.
"""

import math

TWO_PI = 2.0 * math.pi
# rad/ns per GHz and per MHz
GHZ = TWO_PI
MHZ = TWO_PI * 1e-3
# ns per µs
US = 1e3
