import numpy as np
import pytest

from cglmp.measurements import (
    A1, A2, B1, B2,
    analyzer_unitary,
    angle_schedule,
    basis_matrix,
    compile_angles,
    eigenvector_full,
    eigenvector_product,
    hwp_matrix,
    qwp_matrix,
    settings_count,
    SettingSpec,
)

SPECS = [A1, A2, B1, B2]
H = np.array([1, 0])


def overlap2(u, v):
    return abs(np.vdot(u, v)) ** 2


def test_phases():
    assert (A1.phase, A2.phase, B1.phase, B2.phase) == (0, 0.5, 0.25, -0.25)
    with pytest.raises(ValueError):
        SettingSpec("A", 3)
    with pytest.raises(ValueError):
        SettingSpec("C", 1)


def test_eigenvector_examples():
    np.testing.assert_allclose(eigenvector_full(A1, 0, 2).amplitudes, [2**-0.5, 2**-0.5], atol=1e-15)
    expected = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    np.testing.assert_allclose(eigenvector_full(B1, 0, 2).amplitudes, expected, atol=1e-15)


@pytest.mark.parametrize("spec", SPECS)
def test_orthonormal_and_complete(spec):
    for d in (2, 4, 8, 16):
        e = basis_matrix(spec, d)
        np.testing.assert_allclose(e.conj().T @ e, np.eye(d), atol=1e-12)
        np.testing.assert_allclose(e @ e.conj().T, np.eye(d), atol=1e-12)
    for k in range(8):
        for k2 in range(8):
            if k != k2:
                assert abs(np.vdot(eigenvector_full(spec, k, 8).amplitudes, eigenvector_full(spec, k2, 8).amplitudes)) < 1e-12


def test_product_examples():
    pv = eigenvector_product(A1, 0, 4)
    for f in pv.factors:
        np.testing.assert_allclose(f, [2**-0.5, 2**-0.5], atol=1e-15)
    (f,) = eigenvector_product(A2, 0, 2).factors
    np.testing.assert_allclose(f, np.array([1, 1j]) / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("spec", SPECS)
@pytest.mark.parametrize("d", [2, 4, 8, 16, 32])
def test_factorization_equivalence(spec, d):
    for k in range(d):
        pv = eigenvector_product(spec, k, d)
        for f in pv.factors:
            assert np.vdot(f, f).real == pytest.approx(1.0, abs=1e-12)
        assert overlap2(pv.full(), eigenvector_full(spec, k, d).amplitudes) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("spec", SPECS)
def test_factor_phase_rule(spec):
    d = 16
    for k in range(d):
        for m, f in enumerate(eigenvector_product(spec, k, d).factors, start=1):
            x = k + float(spec.phase) if spec.party == "A" else -k + float(spec.phase)
            assert f[1] / f[0] == pytest.approx(np.exp(2j * np.pi * x / 2**m), abs=1e-12)


@pytest.mark.parametrize("spec", SPECS)
def test_phase_periodicity(spec):
    d = 8
    for k in range(d):
        a = eigenvector_product(spec, k, d).factors
        shifted = [np.array([1, np.exp(2j * np.pi * float(spec.shift(k + d)) / 2**m)]) / np.sqrt(2)
                   for m in range(1, 4)]
        for fa, fs in zip(a, shifted):
            np.testing.assert_allclose(fa, fs, atol=1e-12)


def test_compiled_angles_reject_wrong_states():
    # an orthogonal factor must land on |V>
    pv = eigenvector_product(A2, 3, 8)
    u = analyzer_unitary(compile_angles(A2, 3 + 4, 3).theta_hwp)
    assert abs(H @ u @ pv.factors[2]) ** 2 == pytest.approx(0.0, abs=1e-12)


def test_outcome_range():
    with pytest.raises(ValueError):
        eigenvector_full(A1, 4, 4)
    with pytest.raises(ValueError):
        eigenvector_product(B2, -1, 4)
    with pytest.raises(ValueError):
        eigenvector_full(A1, 0, 128)


def test_waveplate_matrices():
    np.testing.assert_allclose(hwp_matrix(0), np.diag([1, -1]), atol=1e-15)
    np.testing.assert_allclose(hwp_matrix(np.pi / 8), np.array([[1, -1], [-1, -1]]) / np.sqrt(2), atol=1e-15)
    q = qwp_matrix(-np.pi / 4) / np.sqrt(2)
    np.testing.assert_allclose(q @ q.conj().T, np.eye(2), atol=1e-12)
    for theta in np.linspace(-np.pi, np.pi, 13):
        h = hwp_matrix(theta)
        np.testing.assert_allclose(h @ h.conj().T, np.eye(2), atol=1e-12)


def test_analyzer_unitary_matches_closed_form(rng):
    # Closed form -|H>(<H| + e^{i(4t+pi/2)} <V|)/sqrt2 + i|V>(<H| - e^{i(4t+pi/2)} <V|)/sqrt2
    # agrees with H(t) Q(-pi/4) up to a phase per output row, so compare H/V
    # detection probabilities.
    for t in np.linspace(-1, 1, 7):
        e = np.exp(1j * (4 * t + np.pi / 2))
        closed = np.array([[-1, -e], [1j, -1j * e]]) / np.sqrt(2)
        u = analyzer_unitary(t)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
        for _ in range(5):
            psi = rng.normal(size=2) + 1j * rng.normal(size=2)
            psi /= np.linalg.norm(psi)
            np.testing.assert_allclose(abs(u @ psi) ** 2, abs(closed @ psi) ** 2, atol=1e-12)


def test_compile_angle_examples():
    assert compile_angles(A1, 0, 1).theta_hwp == pytest.approx(-np.pi / 8, abs=1e-15)
    assert compile_angles(A1, 0, 1).gamma_qwp == -np.pi / 4
    # beta_1 = 1/4 at m = 1: -pi/8 - 2 pi (1/4) / 8
    assert compile_angles(B1, 0, 1).theta_hwp == pytest.approx(-3 * np.pi / 16, abs=1e-15)


@pytest.mark.parametrize("spec", SPECS)
def test_compiled_angles_rotate_factor_to_H(spec):
    for k in range(16):
        pv = eigenvector_product(spec, k, 16)
        for m in range(1, 5):
            u = analyzer_unitary(compile_angles(spec, k, m).theta_hwp)
            assert abs(H @ u @ pv.factors[m - 1]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_compile_angle_errors():
    with pytest.raises(ValueError):
        compile_angles(A1, 0, 0)
    with pytest.raises(ValueError):
        compile_angles(A1, 0, 3, d=4)
    with pytest.raises(ValueError):
        compile_angles(A1, 4, 1, d=4)


def test_schedule_and_settings_count():
    rows = angle_schedule(4)
    assert len(rows) == 4 * 4 * 2
    assert rows[0][:4] == ("A", 1, 0, 1)
    assert [settings_count(2**n) for n in range(1, 6)] == [1, 3, 7, 15, 31]
