import numpy as np
import pytest

from hyperring.biphoton import sample_jsa
from hyperring.errors import DimensionOverflowError, SupportLeakError
from hyperring.model import FrequencyBin
from hyperring.oracle import (BINS, POLS, DiscreteTwoPhotonState, StokesKind, build_discrete_state,
                              check_commutators, coarse_jsas, coarse_nodes, detuning_operator,
                              expectation, oracle_difference, polarization_operator, random_system,
                              single_photon_dim, stokes_operator, support_leak, trace_out_detuning,
                              verify_report)
from hyperring.state import DOF, OverlapSet, build_reduced_density, hyperentangled_state, marginal, purity

N = 21


@pytest.fixture(scope="module")
def coarse(system):
    return coarse_jsas(system, N)


def _single_photon(pol, b, i, n=N):
    v = np.zeros(single_photon_dim(n))
    v[(POLS.index(pol) * 4 + BINS.index(b)) * n + i] = 1.0
    return v


def test_dimension():
    assert single_photon_dim(N) == 2 * 4 * N


def test_sigma0_eigenvalue():
    op = stokes_operator(StokesKind.Sigma0, FrequencyBin.Sa, N).matrix.tocsr()
    v = _single_photon(POLS[0], FrequencyBin.Sa, 4)
    np.testing.assert_array_equal(op @ v, v)
    w = _single_photon(POLS[0], FrequencyBin.Ib, 4)
    np.testing.assert_array_equal(op @ w, 0 * w)


def test_polarization_operator_eigenvalues():
    p = polarization_operator(N).tocsr()
    for b in BINS:
        h = _single_photon(POLS[0], b, 3)
        v = _single_photon(POLS[1], b, 3)
        np.testing.assert_array_equal(p @ h, h)
        np.testing.assert_array_equal(p @ v, -v)


def test_detuning_eigenvalue():
    omega = coarse_nodes(1e10, N)
    d = detuning_operator(omega).tocsr()
    v = _single_photon(POLS[1], FrequencyBin.Ib, 7)
    np.testing.assert_allclose(d @ v, omega[7] * v)


@pytest.mark.parametrize("kind", list(StokesKind))
def test_stokes_operators_hermitian_and_block_structured(kind):
    m = stokes_operator(kind, FrequencyBin.Sb, 5).matrix.toarray()
    np.testing.assert_allclose(m, m.conj().T)
    # identity on the detuning factor: every block between detuning modes i != j vanishes
    blocks = m.reshape(8, 5, 8, 5)
    off = blocks * (1 - np.eye(5))[None, :, None, :]
    assert np.all(off == 0)
    np.testing.assert_array_equal(blocks[:, 0, :, 0], blocks[:, 3, :, 3])


def test_commutators():
    report = check_commutators(N, coarse_nodes(1e10, N))
    control = report.pop("control_sigma1_sigma2")
    assert all(v == 0.0 for v in report.values())
    assert control > 0


def test_norm_and_support(system, coarse):
    state = build_discrete_state(system, coarse, N)
    assert state.norm == pytest.approx(1.0, abs=1e-9)
    assert support_leak(state) == 0.0


def test_expectations(system, coarse):
    state = build_discrete_state(system, coarse, N)
    s0 = sum(stokes_operator(StokesKind.Sigma0, b, N).matrix.tocsr() for b in (FrequencyBin.Sa, FrequencyBin.Sb))
    assert expectation(state, s0, "signal").real == pytest.approx(1.0, abs=1e-12)
    assert expectation(state, polarization_operator(N), "signal").real == pytest.approx(0.0, abs=1e-12)


def test_identical_spectra_give_product_with_target(system, coarse):
    same = (coarse[0],) * 4
    state = build_discrete_state(system, same, N)
    psi = hyperentangled_state(system.theta1, system.theta2)
    rho = trace_out_detuning(state)
    np.testing.assert_allclose(rho.rho, np.outer(psi, psi.conj()), atol=1e-12)
    np.testing.assert_allclose(rho.rho, build_reduced_density(OverlapSet.uniform(1.0), *system.thetas).rho,
                               atol=1e-12)


def test_single_ring_is_separable(system, coarse):
    state = build_discrete_state(system, coarse, N, ring_weights=(1, 0, 0, 0))
    rho = trace_out_detuning(state)
    for dof in DOF:
        assert purity(marginal(rho, dof).rho2) == pytest.approx(1.0, abs=1e-12)


def test_disjoint_spectra_dephase(system):
    omega = coarse_nodes(4e10, N)
    rings = [r.with_mismatch(m) for r, m in zip(system.rings, (-6e10, -2e10, 2e10, 6e10))]
    spectra = [sample_jsa(r, p, omega) for r, p in zip(rings, system.pumps)]
    # zero out the tails so the supports are strictly disjoint
    masked = []
    for k, j in enumerate(spectra):
        keep = np.zeros_like(j.values)
        band = slice(5 * k, 5 * k + 5)
        keep[band, band] = j.values[band, band]
        keep /= np.sqrt(j.weights @ np.abs(keep) ** 2 @ j.weights)
        masked.append(j.__class__(j.omega, j.weights, keep, j.beta_squared, j.ring_id))
    rho = trace_out_detuning(build_discrete_state(system, masked, N))
    np.testing.assert_allclose(rho.rho, np.eye(4) / 4, atol=1e-12)


def test_oracle_equivalence_defaults(system, coarse):
    diff, *_ = oracle_difference(system, N, coarse)
    assert diff < 1e-8


def test_oracle_equivalence_random(system):
    rng = np.random.default_rng(11)
    for _ in range(3):
        assert oracle_difference(random_system(rng, system), N)[0] < 1e-8


def test_resampled_production_grid(system, jsas):
    diff, state, *_ = oracle_difference(system, N, jsas)
    assert state.n == N
    assert diff < 1e-8


def test_dimension_limit(system, coarse):
    with pytest.raises(DimensionOverflowError):
        build_discrete_state(system, coarse, 43)


def test_support_leak_detected():
    amp = np.zeros((2, 4, 3, 2, 4, 3), dtype=complex)
    amp[0, 0, 0, 1, 1, 0] = 1.0  # H signal with V idler: not one of the four states
    with pytest.raises(SupportLeakError):
        trace_out_detuning(DiscreteTwoPhotonState(amp, np.linspace(-1, 1, 3)))


def test_verify_report(system):
    report = verify_report(system, N, random_configs=1)
    assert report["oracle_max_abs_diff"] < 1e-8
    assert report["support_leak"] == 0.0
    assert report["expectation_checks"]["norm"] == pytest.approx(1.0, abs=1e-9)
