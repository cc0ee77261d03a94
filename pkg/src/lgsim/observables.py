"""Dichotomic observables and the two correlator engines.

``exact_correlator`` evaluates the trace formula

    C(t_i, t_j) = sum_{n,m} q_n q_m Tr[ P_m E_{i->j}( P_n E_{0->i}(rho_0) P_n ) P_m ]

where E are the (possibly noisy) segment evolution maps and P_n the
projection branches of the first measurement. ``sampled_correlator`` draws
per-shot records of the same protocol, optionally passing every read bit
through a readout confusion matrix before recording.

Collapse granularity: a single-qubit observable always collapses onto its
two outcome projectors. A multi-qubit parity observable built with
``bitwise_collapse=True`` (the default, matching a hardware readout of every
listed qubit) collapses the intermediate state onto the computational basis
of the measured qubits and only the recorded value is coarse-grained to a
sign; with ``bitwise_collapse=False`` the state collapses onto the two
parity subspaces themselves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .core.evolution import Dynamics, evolve_density
from .core.states import DensityMatrix
from .errors import (
    InvalidGrid,
    InvalidNoiseParameter,
    InvalidObservable,
)

if TYPE_CHECKING:
    from .core.channels import NoiseModel
    from .mitigation import ConfusionMatrix

PROJECTOR_TOL = 1e-10
UNREACHABLE_PROB = 1e-12

OUTCOME_KEYS = ("++", "+-", "-+", "--")

METHOD_EXACT = "exact"
METHOD_SAMPLED = "sampled"
METHOD_SAMPLED_MITIGATED = "sampled_mitigated"


@dataclass(frozen=True)
class DichotomicObservable:
    """A +/-1-valued observable as a pair of orthogonal projectors.

    ``z_diagonal`` marks observables whose value is the parity of the
    computational-basis bits of ``qubits``; only those support bit-level
    readout-error injection for more than one measured qubit.
    """

    label: str
    qubits: tuple[int, ...]
    num_qubits: int
    projector_plus: np.ndarray
    projector_minus: np.ndarray
    z_diagonal: bool = False
    bitwise_collapse: bool = False

    def __post_init__(self) -> None:
        qubits = tuple(int(q) for q in self.qubits)
        if not qubits or len(set(qubits)) != len(qubits):
            raise InvalidObservable(f"duplicate or empty qubit list {qubits}")
        if any(q < 0 or q >= self.num_qubits for q in qubits):
            raise InvalidObservable(f"qubits {qubits} outside register of {self.num_qubits}")
        object.__setattr__(self, "qubits", qubits)
        dim = 2**self.num_qubits
        mats = []
        for name, proj in (("plus", self.projector_plus), ("minus", self.projector_minus)):
            m = np.array(proj, dtype=complex)
            if m.shape != (dim, dim):
                raise InvalidObservable(f"projector_{name} shape {m.shape} != ({dim}, {dim})")
            if np.abs(m @ m - m).max() > PROJECTOR_TOL:
                raise InvalidObservable(f"projector_{name} is not idempotent")
            m.setflags(write=False)
            mats.append(m)
        plus, minus = mats
        if np.abs(plus @ minus).max() > PROJECTOR_TOL:
            raise InvalidObservable("projectors are not orthogonal")
        if np.abs(plus + minus - np.eye(dim)).max() > PROJECTOR_TOL:
            raise InvalidObservable("projectors do not sum to the identity")
        object.__setattr__(self, "projector_plus", plus)
        object.__setattr__(self, "projector_minus", minus)

    def operator(self) -> np.ndarray:
        return self.projector_plus - self.projector_minus


def _parity_mask(qubits: tuple[int, ...], num_qubits: int) -> np.ndarray:
    """Boolean vector: True where the selected bits have even parity."""
    idx = np.arange(2**num_qubits)
    acc = np.zeros_like(idx)
    for q in qubits:
        acc ^= (idx >> q) & 1
    return acc == 0


def parity_observable(
    qubits: list[int] | tuple[int, ...],
    num_qubits: int,
    bitwise_collapse: bool = True,
) -> DichotomicObservable:
    """+1 on even parity of the listed qubits' bits, -1 on odd.

    For one qubit this is the z observable; for two qubits it equals the
    two-qubit parity product of z operators.
    """
    qubits = tuple(int(q) for q in qubits)
    if len(set(qubits)) != len(qubits) or not qubits:
        raise InvalidObservable(f"duplicate or empty qubit list {qubits}")
    even = _parity_mask(qubits, num_qubits)
    plus = np.diag(even.astype(complex))
    minus = np.diag((~even).astype(complex))
    label = "z" + "".join(f"_{q}" for q in qubits) if len(qubits) == 1 else (
        "parity" + "".join(f"_{q}" for q in qubits)
    )
    return DichotomicObservable(
        label,
        qubits,
        num_qubits,
        plus,
        minus,
        z_diagonal=True,
        bitwise_collapse=bitwise_collapse and len(qubits) > 1,
    )


def sigma_z_observable(qubit: int, num_qubits: int) -> DichotomicObservable:
    return parity_observable([qubit], num_qubits)


def sigma_x_observable(qubit: int, num_qubits: int) -> DichotomicObservable:
    """x-basis observable: +1 on |+>, -1 on |->. Its readout bit is 0 for the
    +1 outcome, as if a basis-change gate preceded a z readout."""
    from .core.paulis import embed_operator

    plus_local = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    minus_local = 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex)
    plus = embed_operator(plus_local, (qubit,), num_qubits)
    minus = embed_operator(minus_local, (qubit,), num_qubits)
    return DichotomicObservable(f"x_{qubit}", (qubit,), num_qubits, plus, minus)


@dataclass(frozen=True)
class MeasurementSchedule:
    """Two measurement times with the observable read at each.

    The same-time pair (t, t) is allowed so tau = 0 grid points evaluate; the
    second time must never precede the first.
    """

    times: tuple[float, float]
    first_observable: DichotomicObservable
    second_observable: DichotomicObservable

    def __post_init__(self) -> None:
        t_i, t_j = (float(self.times[0]), float(self.times[1]))
        if t_i < 0:
            raise InvalidGrid(f"first measurement time {t_i} is negative")
        if t_j < t_i:
            raise InvalidGrid(f"times {self.times} are not ordered")
        object.__setattr__(self, "times", (t_i, t_j))
        if self.first_observable.num_qubits != self.second_observable.num_qubits:
            raise InvalidObservable("observables act on different register sizes")

    @property
    def t_first(self) -> float:
        return self.times[0]

    @property
    def t_second(self) -> float:
        return self.times[1]

    def spatially_separated(self) -> bool:
        return not set(self.first_observable.qubits) & set(self.second_observable.qubits)


@dataclass(frozen=True)
class CorrelatorEstimate:
    """One two-time correlator value with its statistical error.

    ``n_shots`` is 0 and ``std_error`` 0 for the exact engine; a single-shot
    estimate carries ``std_error = nan`` (undefined sample deviation).
    """

    value: float
    std_error: float
    n_shots: int
    method: str
    note: str = ""

    def __post_init__(self) -> None:
        if self.method not in (METHOD_EXACT, METHOD_SAMPLED, METHOD_SAMPLED_MITIGATED):
            raise ValueError(f"unknown method {self.method!r}")
        slack = 1e-9
        if self.method != METHOD_EXACT and np.isfinite(self.std_error):
            slack = max(slack, 3.0 * self.std_error)
        if abs(self.value) > 1.0 + slack:
            raise ValueError(f"correlator value {self.value} outside [-1, 1] plus tolerance")

    def variance(self) -> float:
        return self.std_error**2 if np.isfinite(self.std_error) else float("nan")


@dataclass
class CountsTable:
    """Raw shot counts over the four (Q_i, Q_j) outcome pairs.

    The first character of a key is the earlier measurement; vector order is
    ++, +-, -+, -- (index 2*bit(Q_i) + bit(Q_j) with bit(+1) = 0).
    """

    outcomes: dict[str, int]
    n_shots: int
    seed: int | None = None

    def __post_init__(self) -> None:
        counts = {k: int(self.outcomes.get(k, 0)) for k in OUTCOME_KEYS}
        if any(v < 0 for v in counts.values()):
            raise ValueError("negative counts")
        if sum(counts.values()) != self.n_shots:
            raise ValueError(
                f"counts sum {sum(counts.values())} does not match n_shots={self.n_shots}"
            )
        self.outcomes = counts

    def vector(self) -> np.ndarray:
        return np.array([self.outcomes[k] for k in OUTCOME_KEYS], dtype=float)

    def probabilities(self) -> np.ndarray:
        return self.vector() / self.n_shots

    def to_json(self) -> str:
        return json.dumps(
            {"outcomes": self.outcomes, "n_shots": self.n_shots, "seed": self.seed}
        )

    @classmethod
    def from_json(cls, text: str) -> "CountsTable":
        data = json.loads(text)
        return cls(data["outcomes"], data["n_shots"], data.get("seed"))


# ---------------------------------------------------------------------------
# correlator engines


def _check_register(rho0: DensityMatrix, sched: MeasurementSchedule) -> None:
    if sched.first_observable.num_qubits != rho0.num_qubits:
        raise InvalidObservable(
            f"observables on {sched.first_observable.num_qubits} qubits do not "
            f"match state register of {rho0.num_qubits}"
        )


def _bit_distribution(rho: DensityMatrix, qubits: tuple[int, ...]) -> np.ndarray:
    """Probability over the computational-basis patterns of ``qubits``."""
    diag = np.clip(np.real(np.diagonal(rho.matrix)), 0.0, None)
    idx = np.arange(rho.dim)
    keys = np.zeros_like(idx)
    for k, q in enumerate(qubits):
        keys |= ((idx >> q) & 1) << k
    dist = np.bincount(keys, weights=diag, minlength=2 ** len(qubits))
    total = dist.sum()
    return dist / total if total > 0 else dist


def _pattern_signs(m: int) -> np.ndarray:
    """+1 for even-popcount patterns, -1 for odd."""
    idx = np.arange(2**m)
    pop = np.zeros_like(idx)
    for k in range(m):
        pop ^= (idx >> k) & 1
    return np.where(pop == 0, 1, -1)


def _pattern_branch(rho: DensityMatrix, qubits: tuple[int, ...], pattern: int):
    """Probability and collapsed state for one bit pattern of ``qubits``."""
    idx = np.arange(rho.dim)
    sel = np.ones(rho.dim, dtype=bool)
    for k, q in enumerate(qubits):
        sel &= ((idx >> q) & 1) == ((pattern >> k) & 1)
    p = float(np.real(np.diagonal(rho.matrix))[sel].sum())
    if p <= UNREACHABLE_PROB:
        return p, None
    mask = np.outer(sel, sel)
    return p, DensityMatrix(rho.num_qubits, np.where(mask, rho.matrix, 0.0) / p)


def _first_branches(rho: DensityMatrix, obs: DichotomicObservable):
    """Collapse branches of the first measurement at the observable's
    granularity: (value, probability, collapsed state or None)."""
    if obs.bitwise_collapse and len(obs.qubits) > 1:
        signs = _pattern_signs(len(obs.qubits))
        out = []
        for pattern in range(2 ** len(obs.qubits)):
            p, rho_b = _pattern_branch(rho, obs.qubits, pattern)
            out.append((int(signs[pattern]), p, rho_b))
        return out
    out = []
    for value, proj in ((+1, obs.projector_plus), (-1, obs.projector_minus)):
        p = float(np.trace(proj @ rho.matrix).real)
        if p > UNREACHABLE_PROB:
            out.append((value, p, DensityMatrix(rho.num_qubits, proj @ rho.matrix @ proj / p)))
        else:
            out.append((value, p, None))
    return out


def exact_correlator(
    rho0: DensityMatrix,
    dynamics: Dynamics,
    sched: MeasurementSchedule,
    noise: "NoiseModel | None" = None,
) -> CorrelatorEstimate:
    """Two-time correlator by the exact trace formula, with decoherence
    channels interleaved between the evolution segments when a noise model
    is given. Readout confusion never enters the exact value."""
    _check_register(rho0, sched)
    obs2 = sched.second_observable
    rho_i = evolve_density(rho0, dynamics, 0.0, sched.t_first, noise)
    value = 0.0
    for q1, p1, rho_b in _first_branches(rho_i, sched.first_observable):
        if rho_b is None:
            continue
        rho_j = evolve_density(rho_b, dynamics, sched.t_first, sched.t_second, noise)
        expectation = float(np.trace(obs2.operator() @ rho_j.matrix).real)
        value += p1 * q1 * expectation
    return CorrelatorEstimate(value, 0.0, 0, METHOD_EXACT)


def _confusion_matrix_for(
    readout: "ConfusionMatrix", m: int
) -> tuple[np.ndarray, bool]:
    """Return (matrix, per_bit). Per-bit mode applies the 2x2 matrix to each
    measured bit independently; otherwise the matrix must cover all m bits."""
    if readout.num_bits == 1:
        return readout.matrix, True
    if readout.num_bits == m:
        return readout.matrix, False
    raise InvalidNoiseParameter(
        f"readout confusion on {readout.num_bits} bits cannot serve a "
        f"{m}-bit measurement"
    )


def _record_patterns(
    true_patterns: np.ndarray,
    m: int,
    readout: "ConfusionMatrix",
    rng: np.random.Generator,
) -> np.ndarray:
    """Pass true bit patterns through the confusion matrix."""
    matrix, per_bit = _confusion_matrix_for(readout, m)
    if per_bit:
        p_read1_given0 = matrix[1, 0]
        p_read0_given1 = matrix[0, 1]
        out = true_patterns.copy()
        for k in range(m):
            bits = (true_patterns >> k) & 1
            flip_prob = np.where(bits == 0, p_read1_given0, p_read0_given1)
            flips = rng.random(true_patterns.shape[0]) < flip_prob
            out ^= flips.astype(out.dtype) << k
        return out
    cum = np.cumsum(matrix, axis=0)
    u = rng.random(true_patterns.shape[0])
    out = np.empty_like(true_patterns)
    for pattern in np.unique(true_patterns):
        mask = true_patterns == pattern
        out[mask] = np.minimum(
            np.searchsorted(cum[:, pattern], u[mask]), matrix.shape[0] - 1
        )
    return out


def _draw_categorical(
    dist: np.ndarray, u: np.ndarray
) -> np.ndarray:
    cum = np.cumsum(dist)
    return np.minimum(np.searchsorted(cum, u), dist.size - 1)


def sampled_correlator(
    rho0: DensityMatrix,
    dynamics: Dynamics,
    sched: MeasurementSchedule,
    n_shots: int,
    noise: "NoiseModel | None" = None,
    seed: int = 0,
) -> tuple[CorrelatorEstimate, CountsTable]:
    """Shot-sampled two-time correlator.

    Each shot evolves to the first time, samples and collapses the first
    observable, evolves on, and samples the second. The deterministic pieces
    (branch states and their outcome distributions) are computed once; shots
    draw from them, so the counts match the naive per-shot loop distribution
    exactly. With ``noise.readout_confusion`` set, every read bit is flipped
    through the confusion matrix before being recorded.
    """
    if n_shots < 1:
        raise ValueError(f"n_shots must be >= 1, got {n_shots}")
    _check_register(rho0, sched)
    obs1, obs2 = sched.first_observable, sched.second_observable
    readout = noise.readout_confusion if noise is not None else None
    m1, m2 = len(obs1.qubits), len(obs2.qubits)
    for obs, m in ((obs1, m1), (obs2, m2)):
        if readout is not None and m > 1 and not obs.z_diagonal:
            raise InvalidObservable(
                "bit-level readout error needs computational-basis observables"
            )

    rho_i = evolve_density(rho0, dynamics, 0.0, sched.t_first, noise)
    rng = np.random.default_rng(seed)

    # --- first measurement -------------------------------------------------
    pattern_level_1 = m1 > 1 and (readout is not None or obs1.bitwise_collapse)
    u1 = rng.random(n_shots)
    if pattern_level_1:
        dist1 = _bit_distribution(rho_i, obs1.qubits)
        patterns1 = _draw_categorical(dist1, u1)
        signs1 = _pattern_signs(m1)
        q1 = signs1[patterns1]
        branch_ids = patterns1 if obs1.bitwise_collapse else q1
    else:
        p_plus = float(np.trace(obs1.projector_plus @ rho_i.matrix).real)
        q1 = np.where(u1 < p_plus, 1, -1)
        patterns1 = ((1 - q1) // 2).astype(np.int64)
        branch_ids = q1

    if readout is not None:
        recorded1 = _pattern_signs(m1)[_record_patterns(patterns1, m1, readout, rng)]
    else:
        recorded1 = q1

    # --- collapse, evolve, second measurement ------------------------------
    branches = _first_branches(rho_i, obs1)
    if obs1.bitwise_collapse and m1 > 1:
        keys = list(range(2**m1))
    else:
        keys = [+1, -1]
    evolved: dict[int, DensityMatrix | None] = {}
    for key, (_, _, rho_b) in zip(keys, branches):
        if rho_b is None:
            evolved[key] = None
        else:
            evolved[key] = evolve_density(rho_b, dynamics, sched.t_first, sched.t_second, noise)

    pattern_level_2 = m2 > 1 and readout is not None
    u2 = rng.random(n_shots)
    q2 = np.empty(n_shots, dtype=np.int64)
    patterns2 = np.empty(n_shots, dtype=np.int64)
    signs2 = _pattern_signs(m2)
    for key in keys:
        mask = branch_ids == key
        if not mask.any():
            continue
        rho_j = evolved[key]
        if rho_j is None:
            raise RuntimeError("shots landed on an unreachable branch")
        if pattern_level_2:
            dist2 = _bit_distribution(rho_j, obs2.qubits)
            patterns2[mask] = _draw_categorical(dist2, u2[mask])
            q2[mask] = signs2[patterns2[mask]]
        else:
            p_plus2 = float(np.trace(obs2.projector_plus @ rho_j.matrix).real)
            q2[mask] = np.where(u2[mask] < p_plus2, 1, -1)
            patterns2[mask] = (1 - q2[mask]) // 2

    if readout is not None:
        recorded2 = signs2[_record_patterns(patterns2, m2, readout, rng)]
    else:
        recorded2 = q2

    # --- aggregate ----------------------------------------------------------
    products = recorded1 * recorded2
    value = float(products.mean())
    if n_shots > 1:
        std_error = float(products.std(ddof=1) / np.sqrt(n_shots))
    else:
        std_error = float("nan")
    pair_index = 2 * ((1 - recorded1) // 2) + (1 - recorded2) // 2
    raw = np.bincount(pair_index, minlength=4)
    counts = CountsTable(
        dict(zip(OUTCOME_KEYS, (int(c) for c in raw))), n_shots, seed=seed
    )
    estimate = CorrelatorEstimate(value, std_error, n_shots, METHOD_SAMPLED)
    return estimate, counts
