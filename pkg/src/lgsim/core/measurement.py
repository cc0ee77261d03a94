"""Projective measurement of a density matrix with collapse."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..errors import InvalidObservable
from .states import DensityMatrix

if TYPE_CHECKING:
    from ..observables import DichotomicObservable

UNREACHABLE_PROB = 1e-12


@dataclass(frozen=True)
class MeasurementResult:
    """Outcome probabilities and the post-measurement states per branch.

    Branches with probability at or below 1e-12 are marked unreachable: the
    collapsed entry is None rather than a state normalized by a near-zero
    number.
    """

    probabilities: dict[int, float]
    collapsed: dict[int, DensityMatrix | None]


def measure_projective(rho: DensityMatrix, obs: "DichotomicObservable") -> MeasurementResult:
    """Measure a dichotomic observable: p(q) = Tr(Pi_q rho) and the Lueders
    collapse Pi_q rho Pi_q / p(q) on each reachable branch."""
    dim = rho.dim
    plus, minus = obs.projector_plus, obs.projector_minus
    if plus.shape != (dim, dim):
        raise InvalidObservable(
            f"observable on {obs.num_qubits} qubits does not match register "
            f"of {rho.num_qubits}"
        )
    if np.abs(plus + minus - np.eye(dim)).max() > 1e-10:
        raise InvalidObservable("projectors do not resolve the identity")

    probabilities: dict[int, float] = {}
    collapsed: dict[int, DensityMatrix | None] = {}
    for value, proj in ((+1, plus), (-1, minus)):
        p = float(np.trace(proj @ rho.matrix).real)
        probabilities[value] = p
        if p > UNREACHABLE_PROB:
            collapsed[value] = DensityMatrix(rho.num_qubits, proj @ rho.matrix @ proj / p)
        else:
            collapsed[value] = None
    return MeasurementResult(probabilities, collapsed)
