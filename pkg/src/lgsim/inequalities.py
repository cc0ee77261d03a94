"""Third-order inequality assembly, tau scans, and region scans.

Three two-time correlators combine into the three third-order inequality
functions; every macrorealistic record keeps each of them at or below 1, so
a value above 1 (beyond the decision margin) flags a violation. The same
machinery serves the single-system temporal case and the two-location
spatio-temporal case; only the observables differ.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core.channels import NoiseModel
from .core.evolution import TrotterEvolution, trotter_plan
from .core.paulis import PauliSumHamiltonian
from .core.states import DensityMatrix, prepare_state
from .errors import (
    InvalidDistribution,
    InvalidGrid,
    InvalidObservable,
    MitigationFailed,
    MixedMethodError,
)
from .observables import (
    METHOD_EXACT,
    CorrelatorEstimate,
    DichotomicObservable,
    MeasurementSchedule,
    exact_correlator,
    sampled_correlator,
    sigma_z_observable,
)

MODES = ("LGI_single", "LGI_global", "LGBI")

EXACT_MARGIN = 1e-9


@dataclass(frozen=True)
class Engine:
    """Correlator engine selection: exact trace formula or shot sampling."""

    kind: str = "exact"
    n_shots: int = 8192
    seed: int | None = None
    mitigate: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "sampled"):
            raise ValueError(f"engine kind must be 'exact' or 'sampled', got {self.kind!r}")
        if self.n_shots < 1:
            raise ValueError(f"n_shots must be >= 1, got {self.n_shots}")

    @classmethod
    def exact(cls) -> "Engine":
        return cls(kind="exact")

    @classmethod
    def sampled(cls, n_shots: int = 8192, seed: int | None = None, mitigate: bool = False) -> "Engine":
        return cls(kind="sampled", n_shots=n_shots, seed=seed, mitigate=mitigate)


@dataclass(frozen=True)
class InequalityResult:
    """The three third-order combinations at one grid point."""

    tau: float
    mode: str
    method: str
    k3: float
    k3_prime: float
    k3_perm: float
    std_error: float
    decision_margin: float
    violated_k3: bool
    violated_k3_prime: bool
    violated_k3_perm: bool

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        slack = 1e-9 + 3.0 * (self.std_error if math.isfinite(self.std_error) else 0.0)
        for v in (self.k3, self.k3_prime, self.k3_perm):
            if abs(v) > 3.0 + slack:
                raise ValueError(f"combination value {v} outside [-3, 3] plus tolerance")

    def combinations(self) -> tuple[float, float, float]:
        return (self.k3, self.k3_prime, self.k3_perm)

    def violations(self) -> tuple[bool, bool, bool]:
        return (self.violated_k3, self.violated_k3_prime, self.violated_k3_perm)


def assemble_third_order(
    c12: CorrelatorEstimate,
    c23: CorrelatorEstimate,
    c13: CorrelatorEstimate,
    mode: str,
    tau: float = float("nan"),
) -> InequalityResult:
    """Combine three correlators into the three signed third-order sums.

    All estimates must come from the same engine; the propagated error is
    the root of the summed variances (the same for every sign pattern). A
    violation is flagged above 1 + 1e-9 for exact data and above
    1 + 2 * std_error for sampled data.
    """
    methods = {c12.method, c23.method, c13.method}
    if len(methods) != 1:
        raise MixedMethodError(f"cannot combine correlators with methods {sorted(methods)}")
    method = methods.pop()
    k3 = c12.value + c23.value - c13.value
    k3_prime = -c12.value - c23.value - c13.value
    k3_perm = -c12.value + c23.value + c13.value
    if method == METHOD_EXACT:
        std_error = 0.0
        margin = EXACT_MARGIN
    else:
        std_error = math.sqrt(c12.variance() + c23.variance() + c13.variance())
        margin = max(0.0, 2.0 * std_error) if math.isfinite(std_error) else float("nan")
    threshold = 1.0 + margin
    return InequalityResult(
        tau=tau,
        mode=mode,
        method=method,
        k3=k3,
        k3_prime=k3_prime,
        k3_perm=k3_perm,
        std_error=std_error,
        decision_margin=margin,
        violated_k3=bool(k3 > threshold),
        violated_k3_prime=bool(k3_prime > threshold),
        violated_k3_perm=bool(k3_perm > threshold),
    )


def closed_form_k3(gamma: float, tau):
    """Analytic single-qubit values for an x-axis rotation at rate gamma:
    (2 cos(g t) - cos(2 g t), -2 cos(g t) - cos(2 g t), cos(2 g t))."""
    phase = gamma * np.asarray(tau, dtype=float)
    c1 = np.cos(phase)
    c2 = np.cos(2.0 * phase)
    return 2.0 * c1 - c2, -2.0 * c1 - c2, c2


def fourth_combination(c12: float, c23: float, c13: float) -> float:
    """The remaining sign pattern C12 - C23 + C13 generated by single-time
    relabelings; exposed for completeness, not part of default scans."""
    return c12 - c23 + c13


# ---------------------------------------------------------------------------
# tau scans


@dataclass(frozen=True)
class ThreeTimeSetup:
    """Everything a three-time protocol needs except the grid and engine."""

    rho0: DensityMatrix
    hamiltonian: PauliSumHamiltonian
    first_observable: DichotomicObservable
    second_observable: DichotomicObservable
    mode: str
    noise: NoiseModel | None = None
    trotter_steps_per_tau: int | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        for obs in (self.first_observable, self.second_observable):
            if obs.num_qubits != self.rho0.num_qubits:
                raise InvalidObservable("observable register does not match the state")
        if self.mode == "LGBI":
            overlap = set(self.first_observable.qubits) & set(self.second_observable.qubits)
            if overlap:
                raise InvalidObservable(
                    f"spatio-temporal mode needs disjoint qubit sets; both measure {overlap}"
                )
        if self.trotter_steps_per_tau is not None and self.trotter_steps_per_tau < 1:
            raise ValueError("trotter_steps_per_tau must be >= 1")


@dataclass(frozen=True)
class ScanResult:
    """Grid of inequality results plus run metadata.

    ``grid`` holds tau values for tau scans or (ratio, tau) pairs for
    parameter scans; results align with it index by index.
    """

    grid: tuple
    results: tuple[InequalityResult, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.grid) != len(self.results):
            raise InvalidGrid("grid and results lengths differ")

    def values(self) -> np.ndarray:
        return np.array([r.combinations() for r in self.results])

    def errors(self) -> np.ndarray:
        return np.array([r.std_error for r in self.results])

    def violation_counts(self) -> dict[str, int]:
        names = _column_names(self.metadata.get("mode", "LGI_single"))
        flags = np.array([r.violations() for r in self.results])
        return {names[i]: int(flags[:, i].sum()) for i in range(3)}


def _column_names(mode: str) -> tuple[str, str, str]:
    prefix = "T3" if mode == "LGBI" else "K3"
    return (prefix, f"{prefix}_prime", f"{prefix}_perm")


def _validate_grid(tau_grid: Sequence[float]) -> list[float]:
    taus = [float(t) for t in tau_grid]
    if not taus:
        raise InvalidGrid("empty tau grid")
    if taus[0] < 0:
        raise InvalidGrid(f"negative tau {taus[0]}")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise InvalidGrid("tau grid must be strictly increasing")
    return taus


def _child_seed(master: int, point: int, correlator: int) -> int:
    seq = np.random.SeedSequence((int(master), int(point), int(correlator)))
    return int(seq.generate_state(1, np.uint64)[0])


def _effective_outcome_confusion(obs: DichotomicObservable, noise: NoiseModel) -> np.ndarray:
    """2x2 confusion of the recorded +/-1 value of one measurement.

    Outcome +1 maps to bit 0. For several measured bits the per-bit flips
    must be symmetric, in which case the sign flips with probability
    (1 - (1-2p)^m) / 2 independent of the underlying pattern.
    """
    readout = noise.readout_confusion
    if readout is None:
        return np.eye(2)
    m = len(obs.qubits)
    if m == 1:
        if readout.num_bits != 1:
            raise MitigationFailed(
                "single-bit measurement needs a single-bit confusion matrix"
            )
        return readout.matrix
    if readout.num_bits == 1:
        p10 = readout.matrix[1, 0]
        p01 = readout.matrix[0, 1]
        if abs(p10 - p01) > 1e-12:
            raise MitigationFailed(
                "asymmetric per-bit readout cannot be reduced to a fixed "
                "sign confusion for multi-bit observables"
            )
        q = 0.5 * (1.0 - (1.0 - 2.0 * p10) ** m)
        return np.array([[1 - q, q], [q, 1 - q]])
    raise MitigationFailed(
        f"confusion on {readout.num_bits} bits does not match a {m}-bit measurement"
    )


def _pair_confusion(setup: ThreeTimeSetup):
    from .mitigation import ConfusionMatrix

    if setup.noise is None or setup.noise.readout_confusion is None:
        return None
    first = _effective_outcome_confusion(setup.first_observable, setup.noise)
    second = _effective_outcome_confusion(setup.second_observable, setup.noise)
    return ConfusionMatrix(2, np.kron(first, second))


def tau_scan(
    setup: ThreeTimeSetup,
    tau_grid: Sequence[float],
    engine: Engine,
    jobs: int = 1,
) -> ScanResult:
    """Evaluate C12(0, t), C23(t, 2t), C13(0, 2t) and assemble the three
    combinations at every grid point.

    Sampled runs derive an independent substream per (grid point,
    correlator) from the master seed, so results do not depend on ``jobs``.
    """
    from .mitigation import mitigate_correlator

    taus = _validate_grid(tau_grid)
    master_seed = engine.seed
    if engine.kind == "sampled" and master_seed is None:
        master_seed = int(np.random.SeedSequence().entropy)
    plan = None
    if setup.trotter_steps_per_tau is not None:
        plan = trotter_plan(setup.hamiltonian, setup.trotter_steps_per_tau)
    pair_confusion = _pair_confusion(setup) if engine.mitigate else None
    rho0 = setup.rho0

    def run_point(item: tuple[int, float]) -> InequalityResult:
        index, tau = item
        if plan is None:
            dynamics = setup.hamiltonian
        else:
            dynamics = TrotterEvolution(
                setup.hamiltonian, plan, tau / setup.trotter_steps_per_tau
            )
        windows = ((0.0, tau), (tau, 2.0 * tau), (0.0, 2.0 * tau))
        estimates = []
        for c_index, (ta, tb) in enumerate(windows):
            sched = MeasurementSchedule(
                (ta, tb), setup.first_observable, setup.second_observable
            )
            if engine.kind == "exact":
                estimates.append(exact_correlator(rho0, dynamics, sched, setup.noise))
            else:
                seed = _child_seed(master_seed, index, c_index)
                est, counts = sampled_correlator(
                    rho0, dynamics, sched, engine.n_shots, setup.noise, seed
                )
                if pair_confusion is not None:
                    est = mitigate_correlator(counts, pair_confusion)
                estimates.append(est)
        return assemble_third_order(*estimates, mode=setup.mode, tau=tau)

    items = list(enumerate(taus))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_point, items))
    else:
        results = [run_point(item) for item in items]

    metadata = {
        "mode": setup.mode,
        "label": setup.label,
        "engine": {
            "kind": engine.kind,
            "n_shots": engine.n_shots if engine.kind == "sampled" else 0,
            "seed": master_seed,
            "mitigate": bool(engine.mitigate),
        },
        "noise_digest": setup.noise.digest() if setup.noise is not None else None,
        "trotter_steps_per_tau": setup.trotter_steps_per_tau,
    }
    return ScanResult(tuple(taus), tuple(results), metadata)


# ---------------------------------------------------------------------------
# CSV serialization (contract: 12 significant digits, fixed column order)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _fmt_bool(b: bool) -> str:
    return "true" if b else "false"


def scan_to_csv(scan: ScanResult) -> str:
    """Serialize a scan; tau scans get the documented 10-column layout, and
    (ratio, tau) grids prepend a ratio column."""
    mode = scan.metadata.get("mode", "LGI_single")
    names = _column_names(mode)
    region = bool(scan.grid) and isinstance(scan.grid[0], tuple)
    header = ["ratio", "tau"] if region else ["tau"]
    header += [
        names[0],
        names[1],
        names[2],
        f"err_{names[0]}",
        f"err_{names[1]}",
        f"err_{names[2]}",
        f"violated_{names[0]}",
        f"violated_{names[1]}",
        f"violated_{names[2]}",
    ]
    lines = [",".join(header)]
    for point, r in zip(scan.grid, scan.results):
        cells = [_fmt(v) for v in (point if region else (point,))]
        cells += [_fmt(r.k3), _fmt(r.k3_prime), _fmt(r.k3_perm)]
        cells += [_fmt(r.std_error)] * 3
        cells += [
            _fmt_bool(r.violated_k3),
            _fmt_bool(r.violated_k3_prime),
            _fmt_bool(r.violated_k3_perm),
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_scan_csv(scan: ScanResult, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(scan_to_csv(scan))


# ---------------------------------------------------------------------------
# parameter-region scan


@dataclass(frozen=True)
class RegionScanResult:
    """Inequality values and violation maps over a (ratio, tau) grid."""

    ratios: tuple[float, ...]
    taus: tuple[float, ...]
    values: dict[str, np.ndarray]
    violated: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def any_violation_per_ratio(self, name: str) -> np.ndarray:
        return self.violated[name].any(axis=1)

    def to_scan_result(self) -> ScanResult:
        """Flatten to (ratio, tau) rows for CSV output."""
        names = list(self.values)
        grid = []
        results = []
        for i, ratio in enumerate(self.ratios):
            for j, tau in enumerate(self.taus):
                grid.append((ratio, tau))
                vals = [self.values[name][i, j] for name in names]
                flags = [bool(self.violated[name][i, j]) for name in names]
                results.append(
                    InequalityResult(
                        tau=tau,
                        mode="LGBI",
                        method=METHOD_EXACT,
                        k3=vals[0],
                        k3_prime=vals[1],
                        k3_perm=vals[2],
                        std_error=0.0,
                        decision_margin=EXACT_MARGIN,
                        violated_k3=flags[0],
                        violated_k3_prime=flags[1],
                        violated_k3_perm=flags[2],
                    )
                )
        return ScanResult(tuple(grid), tuple(results), dict(self.metadata))


def violation_region_scan(
    n_qubits: int,
    gamma_ratio_grid: Sequence[float],
    tau_grid: Sequence[float] | None = None,
) -> RegionScanResult:
    """Map spatio-temporal violations for independently rotating qubits.

    The register starts in the n-qubit GHZ state, every qubit rotates about
    x with rate gamma_i / 2 where gamma_1..gamma_{n-1} = 1 and the last
    qubit's rate is scaled by the grid ratio; the first and last qubits are
    read out. Exact engine only.
    """
    if n_qubits < 2:
        raise InvalidGrid("region scan needs at least two qubits")
    ratios = [float(r) for r in gamma_ratio_grid]
    if not ratios:
        raise InvalidGrid("empty ratio grid")
    taus = _validate_grid(tau_grid if tau_grid is not None else np.linspace(0.0, 2.0 * np.pi, 75))

    rho0 = prepare_state("ghz", n_qubits).density_matrix()
    obs_first = sigma_z_observable(0, n_qubits)
    obs_second = sigma_z_observable(n_qubits - 1, n_qubits)
    names = _column_names("LGBI")
    shape = (len(ratios), len(taus))
    values = {name: np.zeros(shape) for name in names}
    flags = {name: np.zeros(shape, dtype=bool) for name in names}
    for i, ratio in enumerate(ratios):
        gammas = [1.0] * (n_qubits - 1) + [ratio]
        terms = []
        for q, g in enumerate(gammas):
            s = ["I"] * n_qubits
            s[q] = "X"
            terms.append((g / 2.0, "".join(s)))
        h = PauliSumHamiltonian.from_terms(n_qubits, terms)
        setup = ThreeTimeSetup(
            rho0, h, obs_first, obs_second, mode="LGBI", label=f"ratio={ratio}"
        )
        scan = tau_scan(setup, taus, Engine.exact())
        vals = scan.values()
        for c, name in enumerate(names):
            values[name][i] = vals[:, c]
            flags[name][i] = vals[:, c] > 1.0 + EXACT_MARGIN
    metadata = {
        "mode": "LGBI",
        "label": f"region_scan_{n_qubits}q",
        "n_qubits": n_qubits,
        "engine": {"kind": "exact", "n_shots": 0, "seed": None, "mitigate": False},
        "noise_digest": None,
    }
    return RegionScanResult(tuple(ratios), tuple(taus), values, flags, metadata)


# ---------------------------------------------------------------------------
# classical joint-distribution oracle

OUTCOME_TRIPLES = ("+++", "++-", "+-+", "+--", "-++", "-+-", "--+", "---")


@dataclass(frozen=True)
class JointOracleResult:
    c12: float
    c23: float
    c13: float
    k3_from_correlators: float
    k3_from_counting: float

    def consistent(self, tol: float = 1e-12) -> bool:
        return abs(self.k3_from_correlators - self.k3_from_counting) <= tol


def joint_distribution_oracle(p) -> JointOracleResult:
    """Correlators and the third-order combination of a classical record.

    ``p`` is a joint distribution over the eight sign triples (Q1, Q2, Q3),
    ordered +++ ++- +-+ +-- -++ -+- --+ --- (or a mapping with those keys).
    Returns the combination both as C12 + C23 - C13 and by the counting
    identity 1 - 4 [P(+,-,+) + P(-,+,-)]; the two must agree, which pins the
    classical window [-3, 1].
    """
    if isinstance(p, dict):
        try:
            vec = np.array([float(p[k]) for k in OUTCOME_TRIPLES])
        except KeyError as err:
            raise InvalidDistribution(f"missing outcome key {err}") from err
    else:
        vec = np.asarray(p, dtype=float)
    if vec.shape != (8,):
        raise InvalidDistribution(f"need 8 probabilities, got shape {vec.shape}")
    if vec.min() < 0:
        raise InvalidDistribution(f"negative probability {vec.min()}")
    if abs(vec.sum() - 1.0) > 1e-12:
        raise InvalidDistribution(f"probabilities sum to {vec.sum()}, not 1")

    signs = np.array([[1 if c == "+" else -1 for c in key] for key in OUTCOME_TRIPLES])
    c12 = float(np.sum(signs[:, 0] * signs[:, 1] * vec))
    c23 = float(np.sum(signs[:, 1] * signs[:, 2] * vec))
    c13 = float(np.sum(signs[:, 0] * signs[:, 2] * vec))
    k3_assembled = c12 + c23 - c13
    k3_counting = 1.0 - 4.0 * (vec[OUTCOME_TRIPLES.index("+-+")] + vec[OUTCOME_TRIPLES.index("-+-")])
    return JointOracleResult(c12, c23, c13, k3_assembled, k3_counting)
