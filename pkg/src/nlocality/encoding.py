"""Combinatorial skeleton of the star-network scenario.

For ``m`` central inputs every edge party has ``2**(m-1)`` inputs. Input ``x``
is labelled by an ``m``-bit string ``y^x``; the strings are one representative
of each complement pair ``{y, ~y}``. Correlator ``i`` weights input ``x`` by
``(-1)**y^x_i`` and the linear input constraints are indexed by the strings of
odd Hamming weight at least three.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product

import numpy as np

from .errors import DomainError, ResourceError

__all__ = [
    "MAX_M",
    "BitString",
    "EncodingTable",
    "build_encoding",
    "constraint_membership",
    "predicted_gram",
    "hamming",
    "table_to_json",
]

#: Largest ``m`` accepted by :func:`build_encoding`.
MAX_M = 13

BitString = tuple[int, ...]


def hamming(a: BitString, b: BitString) -> int:
    return sum(u != v for u, v in zip(a, b))


def _weight(s: BitString) -> int:
    return sum(s)


def _value(s: BitString) -> int:
    # big-endian: leftmost bit is the most significant
    out = 0
    for bit in s:
        out = (out << 1) | bit
    return out


def _order_key(s: BitString) -> tuple[int, int]:
    return (_weight(s), _value(s))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EncodingTable:
    """Input strings, sign matrices and predicted Gram matrix for one ``m``.

    Indices are zero-based throughout; input ``x`` here is the one-based
    input ``x + 1``.

    Attributes:
        m: number of central-party inputs.
        strings: the ``2**(m-1)`` input strings, ``strings[x][i]`` is bit ``i``.
        signs: ``(m, 2**(m-1))`` array, ``signs[i, x] = (-1)**strings[x][i]``.
        constraints: the constraint strings (odd weight >= 3).
        constraint_signs: ``(len(constraints), 2**(m-1))`` array of
            ``(-1)**(s_l . y^x)``.
        gram: exact anticommutator predictions ``2 - 4*hamming/m``
            (computed on first access).
    """

    m: int
    strings: tuple[BitString, ...]
    signs: np.ndarray
    constraints: tuple[BitString, ...]
    constraint_signs: np.ndarray

    @cached_property
    def gram(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(
            tuple(2 - Fraction(4 * hamming(a, b), self.m) for b in self.strings)
            for a in self.strings
        )

    @property
    def num_inputs(self) -> int:
        return len(self.strings)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def classical_bound(self) -> int:
        return 2 ** (self.m - 1)

    @property
    def quantum_optimum(self) -> float:
        return 2 ** (self.m - 1) * float(np.sqrt(self.m))

    def gram_array(self) -> np.ndarray:
        """Gram matrix as a float array."""
        y = np.array(self.strings)
        dist = (y[:, None, :] != y[None, :, :]).sum(axis=2)
        return 2.0 - 4.0 * dist / self.m

    def sign_grid(self, rows: str = "signs") -> list[str]:
        """Render a sign matrix as lines of ``+``/``-`` characters."""
        mat = self.signs if rows == "signs" else self.constraint_signs
        return ["".join("+" if v > 0 else "-" for v in row) for row in mat]


@lru_cache(maxsize=None)
def build_encoding(m: int) -> EncodingTable:
    """Build the encoding table for ``m`` central inputs.

    From every complement pair the string of smaller weight is kept (ties,
    which only occur for even ``m``, keep the string with leading bit 0).
    Strings and constraints are both ordered by weight, then by big-endian
    numeric value.

    Raises:
        DomainError: if ``m < 2``.
        ResourceError: if ``m > MAX_M``.
    """
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise DomainError(f"m must be an integer, got {m!r}")
    m = int(m)
    if m < 2:
        raise DomainError(f"m must be >= 2, got {m}")
    if m > MAX_M:
        raise ResourceError(f"m={m} exceeds encoding cap {MAX_M}", dimension=m, cap=MAX_M)

    chosen = []
    for s in product((0, 1), repeat=m):
        comp = tuple(1 - b for b in s)
        w, wc = _weight(s), _weight(comp)
        if w < wc or (w == wc and s[0] == 0):
            chosen.append(s)
    strings = tuple(sorted(chosen, key=_order_key))

    constraints = tuple(
        sorted(
            (s for s in product((0, 1), repeat=m) if _weight(s) % 2 == 1 and _weight(s) >= 3),
            key=_order_key,
        )
    )

    y = np.array(strings, dtype=np.int64)  # (X, m)
    signs = _frozen((1 - 2 * y.T).astype(np.int64))
    if constraints:
        s = np.array(constraints, dtype=np.int64)
        csigns = 1 - 2 * ((s @ y.T) % 2)
    else:
        csigns = np.zeros((0, len(strings)), dtype=np.int64)
    csigns = _frozen(csigns.astype(np.int64))

    return EncodingTable(
        m=m,
        strings=strings,
        signs=signs,
        constraints=constraints,
        constraint_signs=csigns,
    )


def constraint_membership(table: EncodingTable, l: int) -> frozenset[int]:
    """Inputs ``x`` whose constraint sign ``C[l, x]`` is ``+1`` (zero-based)."""
    if table.num_constraints == 0:
        raise DomainError(f"m={table.m} has no input constraints")
    if not 0 <= l < table.num_constraints:
        raise IndexError(f"constraint index {l} out of range [0, {table.num_constraints})")
    return frozenset(int(x) for x in np.flatnonzero(table.constraint_signs[l] == 1))


def predicted_gram(table: EncodingTable, j: int, j2: int) -> Fraction:
    """Predicted anticommutator ``{A_j, A_j2}`` for zero-based inputs."""
    n = table.num_inputs
    if not (0 <= j < n and 0 <= j2 < n):
        raise IndexError(f"input indices ({j}, {j2}) out of range [0, {n})")
    return 2 - Fraction(4 * hamming(table.strings[j], table.strings[j2]), table.m)


def _bits(s: BitString) -> str:
    return "".join(str(b) for b in s)


def table_to_json(table: EncodingTable) -> str:
    """Canonical JSON text for an encoding table.

    Bit strings are written leftmost-first (character 0 is bit ``i = 1``) and
    Gram entries as ``[numerator, denominator]`` pairs.
    """
    payload = {
        "m": table.m,
        "strings": [_bits(s) for s in table.strings],
        "signs": table.signs.tolist(),
        "constraints": [_bits(s) for s in table.constraints],
        "constraint_signs": table.constraint_signs.tolist(),
        "gram": [[[g.numerator, g.denominator] for g in row] for row in table.gram],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))
