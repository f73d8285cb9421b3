"""Reflection decomposition and Haar sampling invariants.

The distributional claims (moments of traces, agreement with the QR
sampler) get their heavy statistical treatment in test_acceptance; here
we verify the algebraic postconditions that must hold sample by sample.
"""

import numpy as np
import pytest

from cuelab import (
    RngStream,
    chain_to_matrix,
    coupled_chain_pair,
    coupled_pair,
    haar_reflection_chain,
    haar_special_unitary,
    haar_unitary,
    haar_unitary_qr_oracle,
)
from cuelab.errors import InvalidArgumentError, InvalidDimensionError
from cuelab.sampling import reflection_determinant, reflection_matrix, sample_unit_sphere
from cuelab.spectra import eigenangles, log_z_from_chain

SEED = 8675309


def gen(salt=0):
    return RngStream(SEED, salt).generator()


def unitarity_defect(m):
    return np.abs(m.entries @ m.entries.conj().T - np.eye(m.dim)).max()


# ---------------------------------------------------------------------------
# unit-sphere vectors and single reflections
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("j", [1, 2, 3, 8, 33])
def test_sphere_vectors_have_unit_norm(j):
    g = gen(1)
    for _ in range(5):
        x = sample_unit_sphere(j, g)
        assert x.shape == (j,)
        assert x.dtype == np.complex128
        assert abs(np.linalg.norm(x) - 1.0) < 1e-12


def test_reflection_maps_last_basis_vector_to_x():
    g = gen(2)
    for j in (2, 3, 7):
        x = sample_unit_sphere(j, g)
        r = reflection_matrix(x)
        assert r.dim == j
        np.testing.assert_allclose(r.entries[:, j - 1], x, atol=1e-12)
        np.testing.assert_allclose(r.entries.conj().T @ x, np.eye(j)[j - 1], atol=1e-12)


def test_reflection_is_unitary_and_fixes_complement():
    g = gen(3)
    j = 6
    x = sample_unit_sphere(j, g)
    r = reflection_matrix(x)
    assert unitarity_defect(r) < 1e-12
    # vectors orthogonal to both x and e_j are left alone
    q, _ = np.linalg.qr(np.column_stack([x, np.eye(j)[j - 1]]))
    v = g.standard_normal(j) + 1j * g.standard_normal(j)
    v -= q @ (q.conj().T @ v)
    np.testing.assert_allclose(r.entries @ v, v, atol=1e-10)


def test_reflection_determinant_matches_dense_determinant():
    g = gen(4)
    for j in (1, 2, 5, 9):
        x = sample_unit_sphere(j, g)
        d = reflection_determinant(x)
        assert abs(d - np.linalg.det(reflection_matrix(x).entries)) < 1e-10
        assert abs(abs(d) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# full chains
# ---------------------------------------------------------------------------


def test_chain_shape_and_matrix_unitarity():
    g = gen(5)
    for n_dim in (1, 2, 3, 10):
        chain = haar_reflection_chain(n_dim, g)
        assert [len(v) for v in chain.vectors] == list(range(1, n_dim + 1))
        u = chain_to_matrix(chain)
        assert u.dim == n_dim
        assert unitarity_defect(u) < 1e-12


def test_haar_unitary_matches_chain_only_sampler():
    # haar_unitary(N) and haar_reflection_chain(N) consume the same draws,
    # so on a shared stream they must produce the identical chain
    a = haar_reflection_chain(9, gen(6))
    u, b = haar_unitary(9, gen(6))
    for va, vb in zip(a.vectors, b.vectors):
        np.testing.assert_array_equal(va, vb)
    np.testing.assert_allclose(u.entries, chain_to_matrix(a).entries, atol=0)


def test_chain_determinant_identity():
    # det U = prod_j det R_j, computable without assembling anything
    g = gen(7)
    chain = haar_reflection_chain(8, g)
    d = np.prod([reflection_determinant(x) for x in chain.vectors])
    assert abs(np.linalg.det(chain_to_matrix(chain).entries) - d) < 1e-10


def test_special_unitary_det_forcing():
    g = gen(8)
    for n_dim, theta in [(2, 0.0), (5, 0.3), (8, -1.1), (16, 2.0)]:
        u, chain = haar_special_unitary(n_dim, theta, g)
        assert abs(np.linalg.det(u.entries) - np.exp(1j * n_dim * theta)) < 1e-10
        # the forcing lives entirely in the length-1 vector x_1
        rest = np.prod([reflection_determinant(x) for x in chain.vectors[1:]])
        expected_x1 = np.exp(1j * n_dim * theta) * np.conj(rest)
        assert abs(chain.vectors[0][0] - expected_x1) < 1e-10


def test_rotated_families_differ_only_in_first_vector():
    a, b = coupled_chain_pair(7, 0.55, gen(9))
    for va, vb in zip(a.vectors[1:], b.vectors[1:]):
        np.testing.assert_array_equal(va, vb)
    assert abs(a.vectors[0][0] - b.vectors[0][0]) > 1e-12


def test_coupled_pair_dets_and_imaginary_parts():
    # first element of the pair is the rotated-SU(N) sample, second is Haar U(N)
    g = gen(10)
    for _ in range(25):
        theta = g.uniform(0.0, 2 * np.pi / 8)
        ua, ub = coupled_pair(8, theta, g)
        assert abs(np.linalg.det(ua.entries) - np.exp(1j * 8 * theta)) < 1e-10
        assert abs(abs(np.linalg.det(ub.entries)) - 1.0) < 1e-10
    g2 = gen(11)
    for _ in range(25):
        theta = g2.uniform(0.0, 2 * np.pi / 6)
        ca, cb = coupled_chain_pair(6, theta, g2)
        gap = abs(log_z_from_chain(ca).im - log_z_from_chain(cb).im)
        assert gap <= np.pi + 1e-12


def test_qr_oracle_is_unitary_with_unimodular_det():
    g = gen(12)
    u = haar_unitary_qr_oracle(11, g)
    assert unitarity_defect(u) < 1e-12
    assert abs(abs(np.linalg.det(u.entries)) - 1.0) < 1e-10


def test_first_trace_moment_is_roughly_haar():
    # E tr U = 0 and E |tr U|^2 = 1 for Haar U(N); loose 4-sigma gates
    g = gen(13)
    n, dim = 4000, 6
    traces = np.empty(n, dtype=complex)
    for i in range(n):
        traces[i] = np.trace(chain_to_matrix(haar_reflection_chain(dim, g)).entries)
    se = 1.0 / np.sqrt(n)
    assert abs(traces.mean().real) < 4 * se
    assert abs(traces.mean().imag) < 4 * se
    second = np.abs(traces) ** 2
    assert abs(second.mean() - 1.0) < 4 * second.std(ddof=1) / np.sqrt(n)


def test_eigenangles_of_special_unitary_sum_to_det_phase():
    g = gen(14)
    for theta in (0.0, 0.9):
        u, _ = haar_special_unitary(10, theta, g)
        spec = eigenangles(u)
        total = np.angle(np.exp(1j * spec.angles.sum()))
        assert abs(np.exp(1j * total) - np.exp(1j * 10 * theta)) < 1e-8


# ---------------------------------------------------------------------------
# argument validation
# ---------------------------------------------------------------------------


def test_bad_dimensions_rejected():
    g = gen(15)
    for bad in (0, -1, 2.5):
        with pytest.raises(InvalidDimensionError):
            haar_reflection_chain(bad, g)
        with pytest.raises(InvalidDimensionError):
            haar_unitary_qr_oracle(bad, g)
    with pytest.raises(InvalidDimensionError):
        haar_special_unitary(0, 0.0, g)
    with pytest.raises((InvalidArgumentError, InvalidDimensionError)):
        sample_unit_sphere(0, g)
