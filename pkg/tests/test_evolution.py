import numpy as np
import pytest
from scipy.linalg import expm

import bruteforce as bf
from lgsim import (
    InvalidGrid,
    InvalidHamiltonian,
    InvalidTrotterPlan,
    PauliSumHamiltonian,
    PauliTerm,
    TrotterEvolution,
    evolve_density,
    prepare_state,
    propagator,
    trotter_plan,
    trotter_propagator,
)

X = bf.X
Z = bf.Z


def tfic_hamiltonian(j=0.1, gammas=(1, 1, 1, 1, 2.0)):
    n = len(gammas)
    terms = []
    for i in range(n - 1):
        s = ["I"] * n
        s[i] = s[i + 1] = "Z"
        terms.append((-j, "".join(s)))
    for q, g in enumerate(gammas):
        s = ["I"] * n
        s[q] = "X"
        terms.append((-g, "".join(s)))
    return PauliSumHamiltonian.from_terms(n, terms)


def test_pi_rotation_about_x_gives_minus_i_x():
    h = PauliSumHamiltonian.from_terms(1, [(0.5, "X")])
    u = propagator(h, 0.0, np.pi).matrix
    assert np.abs(u - (-1j) * X).max() < 1e-10


def test_zero_duration_is_identity():
    h = PauliSumHamiltonian.from_terms(2, [(0.7, "XZ"), (-0.3, "YI")])
    u = propagator(h, 1.3, 1.3).matrix
    assert np.abs(u - np.eye(4)).max() < 1e-12


def test_z_rotation_matches_diagonal_phases():
    omega, t = 0.8, 2.1
    h = PauliSumHamiltonian.from_terms(1, [(-omega / 2, "Z")])
    u = propagator(h, 0.0, t).matrix
    expected = np.diag([np.exp(1j * omega * t / 2), np.exp(-1j * omega * t / 2)])
    assert np.abs(u - expected).max() < 1e-12


def test_reversed_times_rejected():
    h = PauliSumHamiltonian.from_terms(1, [(0.5, "X")])
    with pytest.raises(InvalidGrid):
        propagator(h, 1.0, 0.5)


def test_non_finite_coefficient_rejected():
    with pytest.raises(InvalidHamiltonian):
        PauliSumHamiltonian.from_terms(1, [(float("nan"), "X")])
    with pytest.raises(InvalidHamiltonian):
        PauliSumHamiltonian.from_terms(1, [(float("inf"), "Z")])


def test_bad_pauli_string_rejected():
    with pytest.raises(InvalidHamiltonian):
        PauliSumHamiltonian.from_terms(2, [(1.0, "XQ")])
    with pytest.raises(InvalidHamiltonian):
        PauliSumHamiltonian.from_terms(2, [(1.0, "X")])


def test_unitarity_and_composition_on_random_hamiltonians():
    rng = np.random.default_rng(20240521)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        h = PauliSumHamiltonian.from_terms(n, bf.random_hamiltonian_terms(n, rng))
        t1, t2, t3 = np.sort(rng.uniform(0.0, 3.0, size=3))
        u13 = propagator(h, t1, t3).matrix
        u12 = propagator(h, t1, t2).matrix
        u23 = propagator(h, t2, t3).matrix
        dim = 2**n
        assert np.abs(u13 @ u13.conj().T - np.eye(dim)).max() < 1e-9
        assert np.abs(u23 @ u12 - u13).max() < 1e-9


def test_matches_scipy_expm_on_random_hamiltonians():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        terms = bf.random_hamiltonian_terms(n, rng)
        h = PauliSumHamiltonian.from_terms(n, terms)
        t = float(rng.uniform(0.1, 2.0))
        expected = expm(-1j * bf.hamiltonian(n, terms) * t)
        assert np.abs(propagator(h, 0.0, t).matrix - expected).max() < 1e-9


# --- Trotter ---------------------------------------------------------------


def test_auto_partition_splits_bonds_by_parity():
    h = tfic_hamiltonian()
    plan = trotter_plan(h, 3)
    even_supports = {t.support() for t in plan.even_terms}
    odd_supports = {t.support() for t in plan.odd_terms}
    assert even_supports == {(0, 1), (2, 3)}
    assert odd_supports == {(1, 2), (3, 4)}
    assert len(plan.single_site_terms) == 5
    assert plan.steps == 3


def test_partition_with_non_commuting_layer_rejected():
    from lgsim import TrotterPlan

    # ZZ and ZX on the same bond differ on exactly one site, so they anticommute
    with pytest.raises(InvalidTrotterPlan):
        TrotterPlan(
            2,
            1,
            even_terms=(PauliTerm(1.0, "ZZ"), PauliTerm(0.5, "ZX")),
            odd_terms=(),
            single_site_terms=(),
        )


def test_auto_partition_rejects_long_range_terms():
    h = PauliSumHamiltonian.from_terms(3, [(1.0, "ZIZ")])
    with pytest.raises(InvalidTrotterPlan):
        trotter_plan(h, 1)


def test_commuting_hamiltonian_is_trotter_exact():
    h = PauliSumHamiltonian.from_terms(
        3, [(0.4, "ZZI"), (-0.2, "IZZ")]
    )
    plan = trotter_plan(h, 3)
    exact = propagator(h, 0.0, 1.7).matrix
    stepped = trotter_propagator(h, plan, 1.7).matrix
    assert np.abs(stepped - exact).max() < 1e-9


def test_single_step_is_even_times_odd_factor():
    a, b, t = 0.6, -0.9, 0.75
    h = PauliSumHamiltonian.from_terms(2, [(a, "ZZ"), (b, "XI")])
    plan = trotter_plan(h, 1)
    got = trotter_propagator(h, plan, t).matrix
    expected = expm(-1j * a * bf.pauli_string("ZZ") * t) @ expm(
        -1j * b * bf.pauli_string("XI") * t
    )
    assert np.abs(got - expected).max() < 1e-10


def test_trotter_error_decreases_monotonically_for_tfic():
    h = tfic_hamiltonian()
    exact = propagator(h, 0.0, 0.5).matrix
    errors = []
    for k in (1, 2, 3, 4, 5):
        u = trotter_propagator(h, trotter_plan(h, k), 0.5).matrix
        errors.append(np.abs(u - exact).max())
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_trotter_error_halves_when_steps_double():
    h = tfic_hamiltonian()
    exact = propagator(h, 0.0, 0.5).matrix
    err = {}
    for k in (1, 2, 4, 8, 16):
        u = trotter_propagator(h, trotter_plan(h, k), 0.5).matrix
        err[k] = np.abs(u - exact).max()
    for k in (1, 2, 4, 8):
        ratio = err[2 * k] / err[k]
        assert 0.35 <= ratio <= 0.65


def test_trotter_propagator_rejects_foreign_plan():
    h = tfic_hamiltonian()
    other = PauliSumHamiltonian.from_terms(5, [(1.0, "XIIII")])
    plan = trotter_plan(other, 2)
    with pytest.raises(InvalidTrotterPlan):
        trotter_propagator(h, plan, 0.3)


def test_segment_steps_follow_fixed_dt():
    h = tfic_hamiltonian()
    plan = trotter_plan(h, 4)
    evo = TrotterEvolution(h, plan, dt=0.25)
    assert evo.segment_steps(1.0) == 4
    assert evo.segment_steps(2.0) == 8
    assert evo.segment_steps(0.0) == 0
    with pytest.raises(InvalidTrotterPlan):
        evo.segment_steps(0.37)


def test_pure_state_and_density_matrix_evolution_agree():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        amps /= np.linalg.norm(amps)
        rho = np.outer(amps, amps.conj())
        for _ in range(int(rng.integers(1, 4))):
            h = PauliSumHamiltonian.from_terms(n, bf.random_hamiltonian_terms(n, rng))
            t = float(rng.uniform(0.1, 1.5))
            u = propagator(h, 0.0, t).matrix
            amps = u @ amps
            rho = u @ rho @ u.conj().T
        assert np.abs(np.outer(amps, amps.conj()) - rho).max() < 1e-10


def test_evolve_density_exact_matches_propagator():
    h = tfic_hamiltonian()
    rho = prepare_state("ghz", 5).density_matrix()
    out = evolve_density(rho, h, 0.0, 0.8)
    u = propagator(h, 0.0, 0.8).matrix
    assert np.abs(out.matrix - u @ rho.matrix @ u.conj().T).max() < 1e-12
