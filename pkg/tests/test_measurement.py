from types import SimpleNamespace

import numpy as np
import pytest

import bruteforce as bf
from lgsim import (
    DensityMatrix,
    InvalidObservable,
    measure_projective,
    parity_observable,
    prepare_state,
    sigma_z_observable,
)


def test_z_measurement_of_ground_state():
    rho = prepare_state("zero", 1).density_matrix()
    result = measure_projective(rho, sigma_z_observable(0, 1))
    assert abs(result.probabilities[+1] - 1.0) < 1e-12
    assert abs(result.probabilities[-1]) < 1e-12
    assert np.abs(result.collapsed[+1].matrix - rho.matrix).max() < 1e-12
    assert result.collapsed[-1] is None  # unreachable branch


def test_z_measurement_of_plus_state_collapses_both_ways():
    rho = prepare_state("plus", 1).density_matrix()
    result = measure_projective(rho, sigma_z_observable(0, 1))
    assert abs(result.probabilities[+1] - 0.5) < 1e-12
    assert abs(result.probabilities[-1] - 0.5) < 1e-12
    assert np.abs(result.collapsed[+1].matrix - np.diag([1.0, 0.0])).max() < 1e-12
    assert np.abs(result.collapsed[-1].matrix - np.diag([0.0, 1.0])).max() < 1e-12


def test_bell_state_parity_is_certain():
    rho = prepare_state("bell", 2).density_matrix()
    obs = parity_observable([0, 1], 2)
    result = measure_projective(rho, obs)
    # cross-check the probability against an explicit 4x4 projector trace
    plus_proj = bf.parity_pair([0, 1], 2)[0][1]
    expected = np.trace(plus_proj @ rho.matrix).real
    assert abs(result.probabilities[+1] - expected) < 1e-12
    assert abs(result.probabilities[+1] - 1.0) < 1e-12
    # the even-parity collapse leaves the Bell state intact
    assert np.abs(result.collapsed[+1].matrix - rho.matrix).max() < 1e-12


def test_probabilities_sum_to_one_and_collapses_are_valid():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        rho = DensityMatrix(n, bf.random_density_matrix(n, rng))
        qubits = list(rng.choice(n, size=rng.integers(1, n + 1), replace=False))
        obs = parity_observable(qubits, n)
        result = measure_projective(rho, obs)
        assert abs(sum(result.probabilities.values()) - 1.0) < 1e-10
        for branch in (+1, -1):
            collapsed = result.collapsed[branch]
            if collapsed is not None:
                assert abs(np.trace(collapsed.matrix).real - 1.0) < 1e-10


def test_register_mismatch_rejected():
    rho = prepare_state("zero", 1).density_matrix()
    with pytest.raises(InvalidObservable):
        measure_projective(rho, sigma_z_observable(0, 2))


def test_incomplete_projectors_rejected():
    rho = prepare_state("zero", 1).density_matrix()
    broken = SimpleNamespace(
        projector_plus=np.diag([1.0, 0.0]).astype(complex),
        projector_minus=np.diag([0.0, 0.5]).astype(complex),
        num_qubits=1,
        qubits=(0,),
    )
    with pytest.raises(InvalidObservable):
        measure_projective(rho, broken)
