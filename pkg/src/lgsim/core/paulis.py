"""Pauli strings, operator embedding, and Pauli-sum Hamiltonians.

Conventions used throughout the package:

* Qubit 0 is the least significant bit of a basis index, so basis state
  ``|b_{n-1} ... b_1 b_0>`` has index ``sum(b_k * 2**k)``.
* Character ``k`` of a Pauli string acts on qubit ``k``; the full matrix is
  the Kronecker chain ``P[s[n-1]] (x) ... (x) P[s[0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidHamiltonian, TooManyQubits

MAX_QUBITS = 12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def check_register_size(num_qubits: int) -> None:
    if num_qubits < 1:
        raise InvalidHamiltonian(f"need at least one qubit, got {num_qubits}")
    if num_qubits > MAX_QUBITS:
        raise TooManyQubits(
            f"{num_qubits} qubits exceeds the dense-simulation cap of {MAX_QUBITS}"
        )


def pauli_string_matrix(paulis: str) -> np.ndarray:
    """Dense matrix of a Pauli string (character k acts on qubit k)."""
    factors = [PAULI_MATRICES[c] for c in reversed(paulis)]
    return reduce(np.kron, factors)


def embed_operator(op: np.ndarray, targets: Sequence[int], num_qubits: int) -> np.ndarray:
    """Embed an operator on ``targets`` into the full register.

    ``op`` is given in the local basis where ``targets[k]`` supplies bit k of
    the local index.
    """
    m = len(targets)
    dim_local = 2**m
    if op.shape != (dim_local, dim_local):
        raise InvalidHamiltonian(
            f"operator shape {op.shape} does not match {m} target qubits"
        )
    if len(set(targets)) != m:
        raise InvalidHamiltonian(f"duplicate target qubits in {targets}")
    if any(q < 0 or q >= num_qubits for q in targets):
        raise InvalidHamiltonian(f"targets {targets} outside register of {num_qubits}")
    rest = [q for q in range(num_qubits) if q not in targets]
    big = np.kron(np.eye(2 ** len(rest), dtype=complex), op)
    # grouped index: targets fill the low bits, remaining qubits the high bits
    idx = np.arange(2**num_qubits)
    grouped = np.zeros_like(idx)
    for k, q in enumerate(targets):
        grouped |= ((idx >> q) & 1) << k
    for k, q in enumerate(rest):
        grouped |= ((idx >> q) & 1) << (m + k)
    return big[np.ix_(grouped, grouped)]


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string; coefficient in angular-frequency units."""

    coefficient: float
    paulis: str

    def __post_init__(self) -> None:
        if not np.isfinite(self.coefficient):
            raise InvalidHamiltonian(f"non-finite coefficient {self.coefficient}")
        if not self.paulis or any(c not in PAULI_MATRICES for c in self.paulis):
            raise InvalidHamiltonian(f"bad Pauli string {self.paulis!r}")

    def support(self) -> tuple[int, ...]:
        """Qubits on which the term acts non-trivially."""
        return tuple(q for q, c in enumerate(self.paulis) if c != "I")

    def commutes_with(self, other: "PauliTerm") -> bool:
        """Symbolic commutation test: strings commute iff they differ on an
        even number of jointly non-identity sites."""
        clashes = sum(
            1
            for a, b in zip(self.paulis, other.paulis)
            if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0

    def matrix(self) -> np.ndarray:
        return self.coefficient * pauli_string_matrix(self.paulis)


@dataclass(frozen=True)
class PauliSumHamiltonian:
    """Weighted sum of Pauli strings on a fixed register."""

    num_qubits: int
    terms: tuple[PauliTerm, ...]

    def __post_init__(self) -> None:
        check_register_size(self.num_qubits)
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        for t in terms:
            if len(t.paulis) != self.num_qubits:
                raise InvalidHamiltonian(
                    f"term {t.paulis!r} has length {len(t.paulis)}, "
                    f"expected {self.num_qubits}"
                )

    @classmethod
    def from_terms(
        cls, num_qubits: int, terms: Iterable[tuple[float, str]]
    ) -> "PauliSumHamiltonian":
        return cls(num_qubits, tuple(PauliTerm(float(c), s) for c, s in terms))

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def matrix(self) -> np.ndarray:
        return _hamiltonian_matrix(self)


@lru_cache(maxsize=512)
def _hamiltonian_matrix(h: PauliSumHamiltonian) -> np.ndarray:
    out = np.zeros((h.dim, h.dim), dtype=complex)
    for t in h.terms:
        out += t.matrix()
    out.setflags(write=False)
    return out


def single_site_term(
    pauli: str, qubit: int, num_qubits: int, coefficient: float
) -> PauliTerm:
    s = ["I"] * num_qubits
    s[qubit] = pauli
    return PauliTerm(coefficient, "".join(s))


def two_site_term(
    pauli: str, qubit_a: int, qubit_b: int, num_qubits: int, coefficient: float
) -> PauliTerm:
    if qubit_a == qubit_b:
        raise InvalidHamiltonian("two-site term needs distinct qubits")
    s = ["I"] * num_qubits
    s[qubit_a] = pauli
    s[qubit_b] = pauli
    return PauliTerm(coefficient, "".join(s))
