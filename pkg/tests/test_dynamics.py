import numpy as np
import pytest
import scipy.linalg

from floquet_honeycomb.dynamics import (
    bottom_edge_sites,
    chirality_fit,
    chirality_metric,
    edge_fraction,
    evolve_wavepacket,
    period_propagator,
    propagator_quasienergies,
)
from floquet_honeycomb.model import (
    LatticeSpec,
    ModelParams,
    build_ribbon_bloch,
    instantaneous_hamiltonian,
)

AFTI = ModelParams(t_avg=0.25, t_mod=0.25)
SFTI = ModelParams(t_avg=0.4, t_mod=0.25, mass=0.3)

SMALL = LatticeSpec(6, 5, "ribbon")
RIBBON = LatticeSpec(60, 17, "ribbon")


@pytest.fixture(scope="module")
def afti_run():
    start = RIBBON.site_index(0, RIBBON.nx // 2, 1)
    return evolve_wavepacket(start, 20, RIBBON, AFTI, n_steps=128)


@pytest.fixture(scope="module")
def sfti_run():
    start = RIBBON.site_index(0, RIBBON.nx // 2, 1)
    return evolve_wavepacket(start, 20, RIBBON, SFTI, n_steps=128)


def folded_ribbon_spectrum(lat, p, m_max):
    lx = np.sqrt(3.0) * p.a * lat.nx
    bands = []
    for q in range(lat.nx):
        kx = 2.0 * np.pi * q / lx
        bands.append(np.linalg.eigvalsh(build_ribbon_bloch(kx, lat, p, m_max)))
    return np.sort(np.concatenate(bands) % p.omega)


class TestPeriodPropagator:
    def test_static_limit(self):
        # constant Hamiltonian: the stepped product telescopes exactly
        p = ModelParams(t_avg=0.25, t_mod=0.0, mass=0.1)
        u = period_propagator(SMALL, p, n_steps=128)
        h = instantaneous_hamiltonian(0.37, SMALL, p)
        u_ref = scipy.linalg.expm(-1j * h * p.period)
        assert np.abs(u - u_ref).max() < 1e-9

    def test_unitary(self):
        u = period_propagator(SMALL, AFTI, n_steps=128)
        assert np.abs(u.conj().T @ u - np.eye(SMALL.n_sites)).max() < 1e-10

    def test_self_convergence_is_second_order(self):
        u128 = period_propagator(SMALL, AFTI, n_steps=128)
        u256 = period_propagator(SMALL, AFTI, n_steps=256)
        u512 = period_propagator(SMALL, AFTI, n_steps=512)
        d1 = np.linalg.norm(u256 - u128, 2)
        d2 = np.linalg.norm(u512 - u256, 2)
        assert d1 < 3e-4
        assert d1 / d2 == pytest.approx(4.0, rel=0.15)

    def test_step_count_floor(self):
        with pytest.raises(ValueError):
            period_propagator(SMALL, AFTI, n_steps=8)

    def test_disorder_enters(self):
        rng = np.random.default_rng(3)
        v = rng.normal(0.0, 0.05, SMALL.n_sites)
        u = period_propagator(SMALL, AFTI, disorder=v, n_steps=128)
        u0 = period_propagator(SMALL, AFTI, n_steps=128)
        assert np.abs(u.conj().T @ u - np.eye(SMALL.n_sites)).max() < 1e-10
        assert np.abs(u - u0).max() > 1e-3

    @pytest.mark.parametrize("p", [AFTI, SFTI], ids=["afti", "sfti"])
    def test_eigenphases_match_truncated_floquet(self, p):
        # two independent routes to the quasienergy spectrum: the stepped
        # propagator vs the m_max=4 extended-space operator per momentum
        u = period_propagator(SMALL, p, n_steps=128)
        eps_u = propagator_quasienergies(u, p.omega)
        eps_f = folded_ribbon_spectrum(SMALL, p, 4)
        d = np.abs(eps_u[:, None] - eps_f[None, :])
        d = np.minimum(d, p.omega - d)
        assert d.min(axis=1).max() < 1e-3 * p.omega

    def test_quasienergies_in_zone(self):
        u = period_propagator(SMALL, AFTI, n_steps=128)
        eps = propagator_quasienergies(u, AFTI.omega)
        assert len(eps) == SMALL.n_sites
        assert eps.min() >= 0.0 and eps.max() < AFTI.omega


class TestEvolveWavepacket:
    def test_preconditions(self):
        with pytest.raises(ValueError):
            evolve_wavepacket(0, 10, LatticeSpec(6, 4, "torus"), AFTI)
        with pytest.raises(ValueError):
            evolve_wavepacket(SMALL.n_sites, 10, SMALL, AFTI)
        with pytest.raises(ValueError):
            evolve_wavepacket(0, 0, SMALL, AFTI)
        with pytest.raises(ValueError):
            evolve_wavepacket(0, 2, SMALL, AFTI, frames_per_period=5)

    def test_norm_conserved_50_periods(self):
        lat = LatticeSpec(20, 9, "ribbon")
        h = evolve_wavepacket(lat.site_index(0, 10, 1), 50, lat, AFTI, n_steps=128)
        assert np.abs(h.rho.sum(axis=1) - 1.0).max() < 1e-8

    def test_frames_and_times(self):
        h = evolve_wavepacket(1, 2, SMALL, AFTI, n_steps=128, frames_per_period=4)
        assert h.n_frames == 9
        assert h.times[0] == 0.0
        assert np.allclose(np.diff(h.times), AFTI.period / 4.0)

    def test_marginals_consistent(self, afti_run):
        h = afti_run
        assert np.abs(h.rho_total.sum(axis=1) - 1.0).max() < 1e-10
        assert np.allclose(h.rho_edge, h.rho[:, h.edge_sites])
        assert h.rho_total.shape == (h.n_frames, 2 * RIBBON.nx)
        assert (h.rho_total >= h.rho_edge - 1e-15).all()

    def test_initial_frame_is_delta(self, afti_run):
        assert afti_run.rho[0, afti_run.initial_site] == pytest.approx(1.0)
        assert afti_run.rho[0].sum() == pytest.approx(1.0)


class TestEdgeChain:
    def test_bottom_edge_sites(self):
        edge = bottom_edge_sites(RIBBON)
        pos = RIBBON.positions()
        assert len(edge) == 2 * RIBBON.nx
        assert (pos[edge, 1] <= 0.5).all()
        assert (np.diff(pos[edge, 0]) > 0).all()

    def test_needs_ribbon(self):
        with pytest.raises(ValueError):
            bottom_edge_sites(LatticeSpec(6, 4, "torus"))


class TestChirality:
    def test_afti_drifts_with_fixed_sign(self, afti_run):
        fit = chirality_fit(afti_run)
        assert not fit.degenerate
        assert fit.value == pytest.approx(1.117, abs=0.06)
        assert fit.value > 0.1

    def test_afti_stable_under_doubling(self, afti_run):
        start = RIBBON.site_index(0, RIBBON.nx // 2, 1)
        h40 = evolve_wavepacket(start, 40, RIBBON, AFTI, n_steps=128)
        m20 = chirality_metric(afti_run)
        m40 = chirality_metric(h40)
        assert abs(m40 - m20) < 0.05

    def test_sfti_drift_smaller(self, afti_run, sfti_run):
        # the separation is real but a factor ~3.6, not the order of
        # magnitude one might hope for: the point start pumps the two
        # counter-propagating branches unevenly (see the decisions ledger)
        ma = chirality_metric(afti_run)
        ms = chirality_metric(sfti_run)
        assert ms == pytest.approx(0.314, abs=0.08)
        assert 2.5 < abs(ma / ms) < 5.0

    def test_stationary_density_flags_degenerate(self):
        p = ModelParams(t_avg=0.0, t_mod=0.0, mass=0.3)
        h = evolve_wavepacket(3, 12, SMALL, p, n_steps=32)
        fit = chirality_fit(h)
        assert fit.degenerate
        assert fit.value == 0.0
        assert chirality_metric(h) == 0.0

    def test_needs_ten_frames(self, afti_run):
        import dataclasses

        short = dataclasses.replace(
            afti_run,
            times=afti_run.times[:5],
            rho=afti_run.rho[:5],
            rho_edge=afti_run.rho_edge[:5],
            rho_total=afti_run.rho_total[:5],
        )
        with pytest.raises(ValueError):
            chirality_fit(short)

    def test_edge_locality(self, afti_run):
        frac = edge_fraction(afti_run, n_chains=3)
        assert frac.min() > 0.6
        assert frac[0] == pytest.approx(1.0)
