"""Built-in ideal-diode RLC circuit: two diodes, two inductors, one capacitor.

State: x1 = integral of the capacitor current, x2 = capacitor current,
x3 = current through the L2/R2 branch.  The diodes impose

    0 <= zeta  perp  (x2 - x3, x2) >= 0,

which makes the network a linear complementarity system with D = 0.  The
metric P B = C^T is satisfied by P = diag(1, L3, L2).
"""

from __future__ import annotations

import numpy as np

from .lcs import LCSystem
from .signals import SignOfSine, Sine


def build_circuit(
    r1: float = 1.0,
    r2: float = 2.0,
    r3: float = 1.0,
    l2: float = 1.0,
    l3: float = 2.0,
    c4: float = 1.0,
    variant: str = "smooth",
    x0=(0.0, 0.0, 0.0),
) -> LCSystem:
    """Circuit LCS with the built-in source: smooth 16 sin(6 pi t) - 0.5, or a
    discontinuous square wave sign(sin(4 pi t)) entering the constraints through
    G = (0, 1)^T."""
    A = np.array([
        [0.0, 1.0, 0.0],
        [-1.0 / (l3 * c4), -(r1 + r3) / l3, r1 / l3],
        [0.0, r1 / l2, -(r1 + r2) / l2],
    ])
    B = np.array([
        [0.0, 0.0],
        [1.0 / l3, 1.0 / l3],
        [-1.0 / l2, 0.0],
    ])
    C = np.array([
        [0.0, 1.0, -1.0],
        [0.0, 1.0, 0.0],
    ])
    E = np.array([[0.0], [1.0 / l3], [1.0 / l2]])
    F = np.zeros(2)

    if variant == "smooth":
        u = Sine(amplitude=16.0, frequency=3.0, offset=-0.5)
        G = np.zeros((2, 1))
        continuous = True
    elif variant == "discontinuous":
        u = SignOfSine(frequency=2.0)
        G = np.array([[0.0], [1.0]])
        continuous = False
    else:
        raise ValueError(f"unknown circuit variant {variant!r}")

    return LCSystem(A=A, B=B, C=C, E=E, F=F, G=G, u=u, x0=np.asarray(x0, float),
                    u_continuous=continuous)
