import math

import numpy as np
import pytest

from schmidt_ldp import quantum as qt
from schmidt_ldp.params import BarrierSpec, Bipartition, EnsembleParams
from schmidt_ldp.sampler import ChainConfig, Spectrum, direct_spectra


# ---------------------------------------------------------------------------
# Haar unitaries
# ---------------------------------------------------------------------------

def test_haar_unitary_scalar():
    u = qt.haar_unitary(1, np.random.default_rng(0))
    assert u.shape == (1, 1)
    assert abs(abs(u[0, 0]) - 1.0) < 1e-12


@pytest.mark.parametrize("n", [2, 5, 16, 40])
def test_haar_unitarity(n):
    u = qt.haar_unitary(n, np.random.default_rng(n))
    err = np.max(np.abs(u.conj().T @ u - np.eye(n)))
    assert err < 1e-10


def test_haar_entry_moment():
    # Haar columns are uniform on the sphere: E|U_00|^2 = 1/n
    rng = np.random.default_rng(123)
    n, draws = 16, 3000
    vals = np.array([abs(qt.haar_unitary(n, rng)[0, 0]) ** 2 for it in range(draws)])
    se = vals.std(ddof=1) / math.sqrt(draws)
    assert abs(vals.mean() - 1.0 / n) < 3 * se


def test_haar_left_invariance_statistic():
    # a fixed unitary rotation must not shift column-entry statistics
    rng = np.random.default_rng(7)
    n, draws = 8, 2000
    fixed = qt.haar_unitary(n, np.random.default_rng(999))
    plain = np.empty(draws)
    rotated = np.empty(draws)
    for k in range(draws):
        u = qt.haar_unitary(n, rng)
        plain[k] = abs(u[0, 0]) ** 2
        rotated[k] = abs((fixed @ u)[0, 0]) ** 2
    se = math.sqrt(plain.var(ddof=1) / draws + rotated.var(ddof=1) / draws)
    assert abs(plain.mean() - rotated.mean()) < 4 * se


# ---------------------------------------------------------------------------
# density assembly
# ---------------------------------------------------------------------------

def test_assemble_identity_unitary():
    s = np.array([0.1, 0.2, 0.7])
    rho = qt.assemble_density(s, np.eye(3, dtype=complex))
    np.testing.assert_allclose(rho, np.diag(s), atol=1e-15)


def test_assemble_density_invariants():
    rng = np.random.default_rng(3)
    s = Spectrum(np.array([0.05, 0.15, 0.3, 0.5]))
    u = qt.haar_unitary(4, rng)
    rho = qt.assemble_density(s, u)
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(rho), s.values, atol=1e-10)
    assert np.trace(rho @ rho).real == pytest.approx(s.purity(), abs=1e-10)


def test_assemble_dimension_mismatch():
    with pytest.raises(ValueError):
        qt.assemble_density(np.array([0.5, 0.5]), np.eye(3, dtype=complex))


# ---------------------------------------------------------------------------
# partial transpose
# ---------------------------------------------------------------------------

def _bell_state():
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1 / math.sqrt(2)
    return np.outer(psi, psi.conj())


def test_partial_transpose_bell():
    pt = qt.partial_transpose(_bell_state(), Bipartition(2, 2))
    evals = np.linalg.eigvalsh(pt)
    np.testing.assert_allclose(evals, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)
    assert np.trace(pt).real == pytest.approx(1.0, abs=1e-14)


def test_partial_transpose_product_state():
    rng = np.random.default_rng(5)
    a = qt.assemble_density(np.array([0.3, 0.7]), qt.haar_unitary(2, rng))
    b = qt.assemble_density(np.array([0.1, 0.4, 0.5]), qt.haar_unitary(3, rng))
    rho = np.kron(a, b)
    pt = qt.partial_transpose(rho, Bipartition(2, 3))
    np.testing.assert_allclose(pt, np.kron(a, b.T), atol=1e-14)
    # separable states stay positive under PT, with the same spectrum
    np.testing.assert_allclose(np.linalg.eigvalsh(pt), np.linalg.eigvalsh(rho), atol=1e-12)


def test_partial_transpose_involution_bitwise():
    rng = np.random.default_rng(6)
    rho = qt.assemble_density(np.sort(rng.dirichlet(np.ones(12))), qt.haar_unitary(12, rng))
    parts = Bipartition(3, 4)
    back = qt.partial_transpose(qt.partial_transpose(rho, parts), parts)
    assert np.array_equal(back, rho)


def test_partial_transpose_convention_independent_spectrum():
    # transposing factor 1 instead of factor 2 conjugates by a swap, so the
    # spectrum is identical
    rng = np.random.default_rng(8)
    parts = Bipartition(3, 5)
    rho = qt.assemble_density(np.sort(rng.dirichlet(np.ones(15))), qt.haar_unitary(15, rng))
    pt2 = qt.partial_transpose(rho, parts)
    t = rho.reshape(3, 5, 3, 5)
    pt1 = np.transpose(t, (2, 1, 0, 3)).reshape(15, 15)
    np.testing.assert_allclose(np.linalg.eigvalsh(pt1), np.linalg.eigvalsh(pt2), atol=1e-11)


def test_partial_transpose_dimension_check():
    with pytest.raises(ValueError):
        qt.partial_transpose(np.eye(6, dtype=complex), Bipartition(2, 2))


# ---------------------------------------------------------------------------
# spectra and negativity
# ---------------------------------------------------------------------------

def test_hermitian_spectrum_basic():
    vals = qt.hermitian_spectrum(np.diag([0.8, 0.2]).astype(complex))
    np.testing.assert_allclose(vals, [0.2, 0.8], atol=1e-14)
    with pytest.raises(ValueError):
        qt.hermitian_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_spectrum_reconstruction():
    rng = np.random.default_rng(9)
    rho = qt.assemble_density(np.sort(rng.dirichlet(np.ones(20))), qt.haar_unitary(20, rng))
    pt = qt.partial_transpose(rho, Bipartition(4, 5))
    vals = qt.hermitian_spectrum(pt)
    assert vals.sum() == pytest.approx(1.0, abs=1e-10)
    w, v = np.linalg.eigh(pt)
    assert np.max(np.abs(pt - (v * w) @ v.conj().T)) < 1e-9
    np.testing.assert_allclose(vals, w, atol=1e-12)


def test_log_negativity_values():
    assert qt.log_negativity(np.array([0.2, 0.3, 0.5])) == 0.0
    assert qt.log_negativity(np.array([-0.5, 0.5, 0.5, 0.5])) == pytest.approx(
        math.log(2.0), abs=1e-14)
    # zero iff no negative eigenvalue
    assert qt.log_negativity(np.array([0.0, 1.0])) == 0.0
    assert qt.log_negativity(np.array([-1e-6, 0.4, 0.6 + 1e-6])) > 0.0


# ---------------------------------------------------------------------------
# shifted GUE model
# ---------------------------------------------------------------------------

def test_gue_model_maximally_mixed():
    vals = qt.gue_model_sample(25, 1.0 / 25, np.random.default_rng(1))
    np.testing.assert_allclose(vals, np.full(25, 1.0 / 25), atol=1e-12)


def test_gue_model_mean_and_range():
    rng = np.random.default_rng(2)
    n, purity = 100, 2.0 / 100
    draws = [qt.gue_model_sample(n, purity, rng) for it in range(100)]
    means = np.array([d.mean() for d in draws])
    se = means.std(ddof=1) / math.sqrt(len(means))
    assert abs(means.mean() - 1.0 / n) < 3 * se
    # rescaled eigenvalues stay inside [1 - R, 1 + R] up to edge fluctuations
    rescaled = np.concatenate(draws) * n
    radius = 2 * math.sqrt(n * purity - 1)
    slack = 4 * radius * n ** (-2.0 / 3.0)
    assert rescaled.min() > 1 - radius - slack
    assert rescaled.max() < 1 + radius + slack


def test_gue_model_second_moment():
    rng = np.random.default_rng(4)
    n, purity = 60, 0.03
    est = []
    for _ in range(300):
        mu = qt.gue_model_sample(n, purity, rng)
        est.append(np.sum((mu - 1.0 / n) ** 2))  # tr X^2
    est = np.asarray(est)
    se = est.std(ddof=1) / math.sqrt(len(est))
    assert abs(est.mean() - (purity - 1.0 / n)) < 3 * se


def test_gue_model_rejects_bad_purity():
    with pytest.raises(ValueError):
        qt.gue_model_sample(10, 0.05, np.random.default_rng(0))  # below 1/n
    with pytest.raises(ValueError):
        qt.gue_model_sample(10, 1.5, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def test_average_negativity_smoke():
    params = EnsembleParams(9, 27, beta=2.0)
    cfg = ChainConfig(steps=2000, burn_in=300, seed=13, thin=4)
    stats, pts = qt.average_negativity(params, Bipartition(3, 3),
                                       BarrierSpec.none(), 40, cfg, collect_pt=True)
    assert pts.shape == (40, 9)
    np.testing.assert_allclose(pts.sum(axis=1), 1.0, atol=1e-10)
    assert stats.mean >= 0.0
    assert 0.0 <= stats.npt_fraction <= 1.0
    # negativity is zero exactly when the PT spectrum is nonnegative
    for row in pts:
        assert (qt.log_negativity(row) > 0) == (row.min() < 0)


def test_average_negativity_reproducible():
    params = EnsembleParams(6, 12, beta=2.0)
    cfg = ChainConfig(steps=1000, burn_in=200, seed=5, thin=3)
    s1, _ = qt.average_negativity(params, Bipartition(2, 3), BarrierSpec.none(), 20, cfg)
    s2, _ = qt.average_negativity(params, Bipartition(2, 3), BarrierSpec.none(), 20, cfg)
    assert s1.mean == s2.mean and s1.stderr == s2.stderr


def test_average_negativity_dimension_check():
    params = EnsembleParams(8, 8)
    cfg = ChainConfig(steps=1000, burn_in=100, seed=1)
    with pytest.raises(ValueError):
        qt.average_negativity(params, Bipartition(3, 3), BarrierSpec.none(), 5, cfg)


def test_matched_walls_give_equal_negativity():
    # a floor at 1/8 and the purity-matched ceiling produce the same mean
    # log negativity between the factors
    from schmidt_ldp.analytics import matching_zeta
    from schmidt_ldp.verify import _pt_experiment
    z1 = 0.125
    z2 = matching_zeta(z1)
    _, _, eln1, _ = _pt_experiment(z1, "min", 400, seed=51)
    _, _, eln2, _ = _pt_experiment(z2, "max", 400, seed=52)
    se = math.sqrt(eln1.var(ddof=1) / len(eln1) + eln2.var(ddof=1) / len(eln2))
    assert abs(eln1.mean() - eln2.mean()) < 3 * se


# ---------------------------------------------------------------------------
# binary dumps
# ---------------------------------------------------------------------------

def test_matrix_dump_roundtrip(tmp_path):
    rng = np.random.default_rng(17)
    rho = qt.assemble_density(np.sort(rng.dirichlet(np.ones(6))), qt.haar_unitary(6, rng))
    path = tmp_path / "rho.sldm"
    qt.save_matrix_dump(path, rho)
    back = qt.load_matrix_dump(path)
    assert np.array_equal(back, rho)


def test_matrix_dump_header(tmp_path):
    path = tmp_path / "m.sldm"
    qt.save_matrix_dump(path, np.eye(2, dtype=complex))
    raw = path.read_bytes()
    assert raw[:4] == b"SLDM"
    assert raw[4:5] == b"L"
    assert int.from_bytes(raw[5:9], "little") == 2
    assert int.from_bytes(raw[9:13], "little") == 2
    assert len(raw) == 13 + 2 * 2 * 16


def test_matrix_dump_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(ValueError):
        qt.load_matrix_dump(path)
