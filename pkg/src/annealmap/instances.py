"""Bundled reference Ising instances.

Three small random +-1 spin glasses with no linear terms, shaped to fit
native Pegasus connectivity, with known degenerate ground-state sets:

- n6: 6 variables, 10 edges, 4 ground states at energy -6
- n7: 7 variables,  9 edges, 2 ground states at energy -7
- n8: 8 variables, 15 edges, 8 ground states at energy -11

Ground states come in bit-complement pairs because the problems have no
linear terms. The energies and state sets below are frozen and verified
by exhaustive enumeration in the test suite.
"""
from __future__ import annotations

from typing import Dict, FrozenSet, Tuple

from .ising import IsingProblem

_N6_QUADRATIC = {
    (0, 1): -1.0, (0, 2): -1.0, (0, 3): 1.0, (0, 4): -1.0, (0, 5): 1.0,
    (1, 2): 1.0, (1, 3): 1.0, (1, 4): 1.0, (1, 5): 1.0, (3, 4): 1.0,
}

_N7_QUADRATIC = {
    (0, 1): 1.0, (0, 4): -1.0, (0, 6): 1.0, (1, 5): 1.0, (1, 6): -1.0,
    (2, 3): 1.0, (2, 5): 1.0, (3, 4): -1.0, (3, 5): 1.0,
}

_N8_QUADRATIC = {
    (0, 1): 1.0, (0, 4): 1.0, (0, 5): -1.0, (0, 6): 1.0, (0, 7): 1.0,
    (1, 4): -1.0, (1, 5): 1.0, (1, 6): -1.0, (1, 7): -1.0, (2, 3): 1.0,
    (2, 4): 1.0, (2, 6): -1.0, (3, 4): -1.0, (3, 6): 1.0, (5, 7): 1.0,
}

# (ground-state energy, canonical indices of the ground states)
EXPECTED_GROUND_STATES: Dict[str, Tuple[float, FrozenSet[int]]] = {
    "n6": (-6.0, frozenset({19, 23, 40, 44})),
    "n7": (-7.0, frozenset({57, 70})),
    "n8": (-11.0, frozenset({37, 41, 57, 101, 154, 198, 214, 218})),
}


def bundled_instance(name: str) -> IsingProblem:
    """Return one of the bundled instances ("n6", "n7", "n8")."""
    table = {
        "n6": (6, _N6_QUADRATIC),
        "n7": (7, _N7_QUADRATIC),
        "n8": (8, _N8_QUADRATIC),
    }
    try:
        num_variables, quadratic = table[name]
    except KeyError:
        raise ValueError(f"unknown bundled instance {name!r}; expected one "
                         f"of {sorted(table)}") from None
    return IsingProblem(num_variables=num_variables, linear={},
                        quadratic=dict(quadratic), name=name)


BUNDLED_NAMES = ("n6", "n7", "n8")
