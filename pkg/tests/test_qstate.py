import json

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from conftest import random_hermitian, random_ket, seeds
from eraser.errors import Illegitimate, MalformedOperator
from eraser.qstate import (
    D,
    H,
    L,
    R,
    V,
    bell_phi_plus,
    density,
    eig_hermitian,
    matrix_from_json,
    matrix_to_json,
    read_density,
    tensor,
    validate,
    write_matrix,
)
from eraser.spdc import rho_from_coherence


def test_bell_phi_plus_amplitudes():
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(bell_phi_plus(), [s, 0, 0, s], atol=1e-15)
    assert np.vdot(bell_phi_plus(), bell_phi_plus()).real == pytest.approx(1.0, abs=1e-15)


def test_bell_density_is_pure():
    w, _ = eig_hermitian(density(bell_phi_plus()))
    np.testing.assert_allclose(w, [1, 0, 0, 0], atol=1e-12)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (H, H, [1, 0, 0, 0]),
        (D, D, [0.5, 0.5, 0.5, 0.5]),
        (R, L, [0.5, -0.5j, 0.5j, 0.5]),
    ],
)
def test_tensor_examples(a, b, expected):
    np.testing.assert_allclose(tensor(a, b), expected, atol=1e-15)


def test_tensor_matches_direct_products():
    # oracle: amplitude of |ij> is a_i * b_j
    for a in (H, V, D, R, L):
        for b in (H, V, D, R, L):
            direct = [a[i] * b[j] for i in range(2) for j in range(2)]
            np.testing.assert_allclose(tensor(a, b), direct, atol=1e-15)


@given(seeds, st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_tensor_is_bilinear(seed, alpha):
    rng = np.random.default_rng(seed)
    a, b = random_ket(rng, 2), random_ket(rng, 2)
    unnormalized = np.kron(alpha * a, b)
    np.testing.assert_allclose(unnormalized, alpha * np.kron(a, b), atol=1e-12)
    # tensor() renormalizes, so scaling only survives as a global phase
    phase = alpha / abs(alpha)
    np.testing.assert_allclose(tensor(alpha * a, b), phase * tensor(a, b), atol=1e-12)


def test_eig_identity_over_four():
    w, v = eig_hermitian(np.eye(4) / 4)
    np.testing.assert_allclose(w, [0.25] * 4, atol=1e-15)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-12)


def test_eig_fig4_spectrum():
    w, _ = eig_hermitian(rho_from_coherence(0.738))
    np.testing.assert_allclose(w, [0.869, 0.131, 0, 0], atol=1e-3)


@hsettings(max_examples=50)
@given(seeds)
def test_eig_reconstruction_and_trace(seed):
    m = random_hermitian(np.random.default_rng(seed))
    w, v = eig_hermitian(m)
    assert np.all(np.diff(w) <= 0)
    assert np.max(np.abs(m - (v * w) @ v.conj().T)) <= 1e-9
    assert np.max(np.abs(v.conj().T @ v - np.eye(4))) <= 1e-9
    assert w.sum() == pytest.approx(np.trace(m).real, abs=1e-9)


def test_eig_rejects_non_hermitian():
    m = np.eye(4, dtype=complex)
    m[0, 1] = 0.1
    with pytest.raises(MalformedOperator):
        eig_hermitian(m)


def test_validate_identity():
    rho = validate(np.eye(4) / 4)
    np.testing.assert_allclose(rho.entries, np.eye(4) / 4)


def test_validate_flags_fig3_raw_spectrum():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    w = np.array([0.641, 0.361, 0.080, -0.082])
    m = (q * w) @ q.conj().T
    with pytest.raises(Illegitimate) as info:
        validate(m)
    assert info.value.min_eigenvalue == pytest.approx(-0.082, abs=1e-12)


def test_validate_trace_violation():
    with pytest.raises(MalformedOperator):
        validate(0.9 * np.eye(4) / 4)


def test_validate_shape():
    with pytest.raises(MalformedOperator):
        validate(np.eye(3) / 3)


@given(seeds)
def test_pure_states_validate(seed):
    psi = random_ket(np.random.default_rng(seed))
    rho = validate(np.outer(psi, psi.conj()))
    assert rho.eigenvalues[0] == pytest.approx(1.0, abs=1e-9)


def test_json_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(3)
    psi = random_ket(rng)
    m = np.outer(psi, psi.conj())
    obj = json.loads(json.dumps(matrix_to_json(m)))
    assert obj["basis"] == "HH,HV,VH,VV"
    assert np.array_equal(matrix_from_json(obj), m)
    write_matrix(tmp_path / "rho.json", m)
    assert np.array_equal(read_density(tmp_path / "rho.json").entries, validate(m).entries)


def test_json_rejects_other_basis():
    obj = matrix_to_json(np.eye(4) / 4)
    obj["basis"] = "VV,VH,HV,HH"
    with pytest.raises(MalformedOperator):
        matrix_from_json(obj)
