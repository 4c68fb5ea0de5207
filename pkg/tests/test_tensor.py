import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from giantdf.tensor import (
    ContractError,
    DimensionError,
    check_density,
    dagger,
    embed,
    expm_generator,
    fidelity,
    is_hermitian,
    is_unitary,
    kron,
    kron_all,
    partial_trace,
    phase_aligned_distance,
    pure,
    purity,
    trace_distance,
    unitarity_defect,
)
from oracles import expm_taylor, kron_loop, partial_trace_loop


def random_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_hermitian(rng, n):
    a = random_matrix(rng, n)
    return 0.5 * (a + dagger(a))


def random_density(rng, n, rank=None):
    a = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    rho = a @ dagger(a)
    return rho / np.trace(rho)


@pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (3, 2), (4, 4)])
def test_kron_matches_loop(m, n):
    rng = np.random.default_rng(m * 10 + n)
    a, b = random_matrix(rng, m), random_matrix(rng, n)
    assert np.max(np.abs(kron(a, b) - kron_loop(a, b))) <= 1e-13


def test_kron_dimension_cap():
    with pytest.raises(DimensionError):
        kron(np.eye(64), np.eye(128), max_dim=4096)


def test_kron_rejects_non_square():
    with pytest.raises(DimensionError):
        kron(np.ones((2, 3)), np.eye(2))


def test_kron_all_empty_is_scalar_one():
    assert kron_all([]).shape == (1, 1)


def test_embed_places_operator_on_site():
    x = np.array([[0, 1], [1, 0]])
    e = embed(x, 2, [2, 3, 2])
    ref = kron_loop(kron_loop(np.eye(2), np.eye(3)), x)
    assert np.allclose(e, ref, atol=0)
    with pytest.raises(DimensionError):
        embed(x, 1, [2, 3, 2])


@pytest.mark.parametrize("n", [2, 4, 8])
@pytest.mark.parametrize("t", [0.01, 0.7, 3.0])
def test_expm_matches_taylor_oracle(n, t):
    rng = np.random.default_rng(n)
    h = random_hermitian(rng, n)
    assert np.max(np.abs(expm_generator(h, t) - expm_taylor(h, t))) <= 1e-12


def test_expm_rejects_non_hermitian():
    with pytest.raises(ContractError):
        expm_generator(np.array([[0, 1], [0, 0]]), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(-5, 5, allow_nan=False), st.integers(0, 2**31))
def test_expm_is_unitary(n, t, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    assert is_unitary(expm_generator(h, t), 1e-10)


@pytest.mark.parametrize(
    "dims,keep",
    [([2, 2], [0]), ([2, 2], [1]), ([2, 3, 2], [0, 2]), ([3, 2, 2], [1]), ([2, 2, 2], [0, 1, 2])],
)
def test_partial_trace_matches_loop(dims, keep):
    rng = np.random.default_rng(sum(dims))
    rho = random_density(rng, int(np.prod(dims)))
    assert np.max(np.abs(partial_trace(rho, dims, keep) - partial_trace_loop(rho, dims, keep))) <= 1e-13


def test_partial_trace_of_product():
    rng = np.random.default_rng(5)
    a, b = random_density(rng, 2), random_density(rng, 3)
    assert np.allclose(partial_trace(np.kron(a, b), [2, 3], [0]), a, atol=1e-14)
    assert np.allclose(partial_trace(np.kron(a, b), [2, 3], [1]), b, atol=1e-14)


@pytest.mark.parametrize("dims,keep", [([2, 3], [0]), ([2, 2], []), ([2, 2], [2])])
def test_partial_trace_errors(dims, keep):
    rho = np.eye(4) / 4
    with pytest.raises(DimensionError):
        partial_trace(rho, dims, keep)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_partial_trace_preserves_trace_and_positivity(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 12)
    red = partial_trace(rho, [2, 3, 2], [1])
    check_density(red)


def test_density_checks():
    check_density(np.diag([0.5, 0.5]))
    with pytest.raises(ContractError):
        check_density(np.diag([0.6, 0.6]))
    with pytest.raises(ContractError):
        check_density(np.diag([1.2, -0.2]))
    with pytest.raises(ContractError):
        check_density(np.array([[0.5, 0.1], [0.3, 0.5]]))


def test_state_metrics():
    up, plus = pure([1, 0]), pure([1, 1])
    assert purity(up) == pytest.approx(1.0)
    assert purity(np.eye(2) / 2) == pytest.approx(0.5)
    assert trace_distance(up, pure([0, 1])) == pytest.approx(1.0)
    assert trace_distance(up, plus) == pytest.approx(math.sqrt(0.5))
    assert fidelity(up, plus) == pytest.approx(0.5)
    assert fidelity(up, up) == pytest.approx(1.0)


def test_hermitian_and_unitary_predicates():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[1, 1j], [1j, 2]]))
    assert unitarity_defect(np.eye(3)) == 0.0
    assert not is_unitary(2 * np.eye(2))


def test_phase_aligned_distance_ignores_global_phase():
    rng = np.random.default_rng(1)
    u = expm_generator(random_hermitian(rng, 4), 1.0)
    assert phase_aligned_distance(u, np.exp(0.7j) * u) <= 1e-14
    assert phase_aligned_distance(u, np.eye(4)) > 0.1
