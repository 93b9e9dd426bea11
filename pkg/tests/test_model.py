import numpy as np
import pytest

from floquet_honeycomb.model import (
    BLUE,
    RED,
    LatticeSpec,
    ModelParams,
    bloch_drive_blocks,
    bond_vectors,
    build_bloch_blocks,
    build_realspace_floquet,
    build_ribbon_bloch,
    dirac_points,
    hopping_amplitude,
    instantaneous_hamiltonian,
    load_operator,
    nnn_vectors,
    quasienergy_spectrum,
    save_operator,
)


def minimal_image(d, lx, ly):
    d = d.copy()
    d[0] = (d[0] + lx / 2) % lx - lx / 2
    d[1] = (d[1] + ly / 2) % ly - ly / 2
    return d


class TestGeometry:
    def test_bond_lengths(self):
        av = bond_vectors(a=0.7)
        assert np.allclose(np.linalg.norm(av, axis=1), 0.7)
        bv = nnn_vectors(a=0.7)
        assert np.allclose(np.linalg.norm(bv, axis=1), np.sqrt(3) * 0.7)

    def test_torus_bonds_match_bond_vectors(self):
        lat = LatticeSpec(5, 6)
        pos = lat.positions()
        av = bond_vectors()
        lx, ly = lat.lengths()
        bonds = lat.bonds()
        assert len(bonds) == 3 * lat.n_cells
        for i, j, lam in bonds:
            assert lat.sublattice()[i] == BLUE and lat.sublattice()[j] == RED
            d = minimal_image(pos[j] - pos[i], lx, ly)
            assert np.allclose(d, av[lam], atol=1e-12)

    def test_every_torus_site_has_three_neighbors(self):
        lat = LatticeSpec(4, 8)
        cnt = np.zeros(lat.n_sites)
        for i, j, _ in lat.bonds():
            cnt[i] += 1
            cnt[j] += 1
        assert np.all(cnt == 3)

    def test_ribbon_terminates_on_zigzag_rows(self):
        lat = LatticeSpec(4, 5, boundary="ribbon")
        cnt = np.zeros(lat.n_sites)
        for i, j, _ in lat.bonds():
            cnt[i] += 1
            cnt[j] += 1
        pos, sub = lat.positions(), lat.sublattice()
        low = cnt == 2
        # bottom edge is the red row at y=0, top edge the blue row
        ys = pos[low, 1]
        assert set(np.round(ys, 6)) == {0.0, 1.5 * (lat.ny - 1) + 0.5}
        assert np.all(sub[low & (pos[:, 1] < 0.1)] == RED)

    def test_torus_rejects_odd_chain_count(self):
        with pytest.raises(ValueError):
            LatticeSpec(4, 5, boundary="torus")
        with pytest.raises(ValueError):
            LatticeSpec(4, 1, boundary="ribbon")

    def test_dirac_points_kill_static_offdiagonal(self):
        for K in dirac_points():
            h0, _, _ = bloch_drive_blocks(K, ModelParams(t_avg=0.3, t_mod=0.1))
            assert np.abs(h0).max() < 1e-12


class TestHopping:
    def test_snapshot_values(self):
        p = ModelParams(t_avg=0.25, t_mod=0.25)
        assert hopping_amplitude(0.0, 0, p) == pytest.approx(0.5)
        assert hopping_amplitude(0.0, 1, p) == pytest.approx(0.125)

    def test_period_average_is_static_hopping(self):
        p = ModelParams(t_avg=0.21, t_mod=0.4, omega=1.3)
        ts = np.linspace(0.0, p.period, 481)
        for lam in range(3):
            avg = np.trapezoid([hopping_amplitude(t, lam, p) for t in ts], ts) / p.period
            assert avg == pytest.approx(p.t_avg, abs=1e-12)

    def test_bad_family_rejected(self):
        with pytest.raises(ValueError):
            hopping_amplitude(0.0, 3, ModelParams(0.1, 0.1))


class TestBlochBlocks:
    def test_hermitian_at_random_momenta(self):
        rng = np.random.default_rng(7)
        p = ModelParams(t_avg=0.31, t_mod=0.17, mass=0.06)
        for _ in range(20):
            k = rng.uniform(-4, 4, size=2)
            H = build_bloch_blocks(k, p, m_max=3)
            assert np.abs(H - H.conj().T).max() < 1e-12

    def test_sector_ladder_shift(self):
        p = ModelParams(t_avg=0.2, t_mod=0.3, mass=0.1, omega=0.9)
        H = build_bloch_blocks(np.array([0.4, -1.1]), p, m_max=3)
        # moving one sector up the ladder adds omega on the diagonal
        upper = H[2:, 2:]
        lower = H[:-2, :-2]
        assert np.allclose(upper - lower, p.omega * np.eye(upper.shape[0]), atol=1e-12)

    def test_rejects_trivial_truncation(self):
        with pytest.raises(ValueError):
            build_bloch_blocks(np.zeros(2), ModelParams(0.1, 0.1), m_max=0)

    def test_gamma_point_closed_form(self):
        p = ModelParams(t_avg=0.22, t_mod=0.18, mass=0.07)
        w = np.linalg.eigvalsh(build_bloch_blocks(np.zeros(2), p, m_max=3))
        root = np.sqrt(p.mass**2 + 9 * p.t_avg**2)
        expect = np.sort(np.ravel([[m - root, m + root] for m in range(-3, 4)]))
        assert np.allclose(w, expect, atol=1e-12)

    @pytest.mark.parametrize("which", [0, 1])
    def test_zone_corner_sector_pair(self, which):
        # restricting to two adjacent sectors at a zone corner leaves one
        # rank-1 coupling of strength 3*t_mod/2; with t_mod = 0.1 the mixed
        # pair sits at 1.02202 and -0.02202 while two levels stay put
        p = ModelParams(t_avg=0.2, t_mod=0.1)
        K = dirac_points()[which]
        h0, hm, hp = bloch_drive_blocks(K, p)
        H4 = np.block([[h0, hp], [hm, h0 + p.omega * np.eye(2)]])
        w = np.sort(np.linalg.eigvalsh(H4))
        assert np.allclose(w, [-0.02202, 0.0, 1.0, 1.02202], atol=5e-6)


class TestRealspaceOperator:
    def test_clean_spectrum_equals_bloch_union(self):
        lat = LatticeSpec(4, 6)
        p = ModelParams(t_avg=0.2, t_mod=0.15, mass=0.05)
        op = build_realspace_floquet(lat, p, m_max=2)
        wr = np.sort(np.linalg.eigvalsh(op.matrix))
        wk = np.sort(
            np.concatenate(
                [np.linalg.eigvalsh(build_bloch_blocks(k, p, 2)) for k in lat.torus_k_points()]
            )
        )
        assert np.abs(wr - wk).max() < 1e-10

    def test_ladder_shift_with_disorder(self):
        lat = LatticeSpec(3, 4)
        p = ModelParams(t_avg=0.2, t_mod=0.3, omega=1.1)
        v = np.random.default_rng(3).normal(size=lat.n_sites) * 0.1
        op = build_realspace_floquet(lat, p, disorder=v, m_max=2)
        n = lat.n_sites
        upper = op.matrix[n:, n:]
        lower = op.matrix[:-n, :-n]
        assert np.allclose(upper - lower, p.omega * np.eye(upper.shape[0]), atol=1e-12)

    def test_constant_onsite_shift(self):
        lat = LatticeSpec(3, 4)
        p = ModelParams(t_avg=0.2, t_mod=0.1)
        w0 = np.linalg.eigvalsh(build_realspace_floquet(lat, p, m_max=1).matrix)
        c = 0.37
        w1 = np.linalg.eigvalsh(
            build_realspace_floquet(lat, p, disorder=np.full(lat.n_sites, c), m_max=1).matrix
        )
        assert np.allclose(w1, w0 + c, atol=1e-10)

    def test_rejects_ribbon_lattice(self):
        rib = LatticeSpec(3, 4, boundary="ribbon")
        with pytest.raises(ValueError):
            build_realspace_floquet(rib, ModelParams(0.1, 0.1), m_max=1)

    def test_disorder_shape_checked(self):
        lat = LatticeSpec(3, 4)
        with pytest.raises(ValueError):
            build_realspace_floquet(lat, ModelParams(0.1, 0.1), disorder=np.ones(5), m_max=1)

    def test_harmonic_blocks_against_quadrature(self):
        # rectangle-rule Fourier transform of H(t) is exact for a single
        # harmonic, so the assembled blocks must match it to round-off
        lat = LatticeSpec(3, 4)
        p = ModelParams(t_avg=0.23, t_mod=0.31, mass=0.04, omega=0.8)
        v = np.random.default_rng(11).normal(size=lat.n_sites) * 0.2
        op = build_realspace_floquet(lat, p, disorder=v, m_max=2)
        n = lat.n_sites
        nq = 32
        ts = np.arange(nq) * p.period / nq
        snaps = np.stack([instantaneous_hamiltonian(t, lat, p, disorder=v) for t in ts])
        for dm in (0, 1, 2):
            block = np.einsum("t,tij->ij", np.exp(1j * p.omega * dm * ts), snaps) / nq
            got = op.matrix[2 * n : 3 * n, (2 - dm) * n : (3 - dm) * n]
            if dm == 0:
                block = block + 0.0 * np.eye(n)  # central sector, no ladder offset
            assert np.abs(got - block).max() < 1e-12


class TestInstantaneous:
    def test_time_periodicity(self):
        lat = LatticeSpec(3, 4)
        p = ModelParams(t_avg=0.2, t_mod=0.3, omega=1.7)
        h1 = instantaneous_hamiltonian(0.4, lat, p)
        h2 = instantaneous_hamiltonian(0.4 + p.period, lat, p)
        assert np.abs(h1 - h2).max() < 1e-12

    def test_zero_modulation_is_static(self):
        lat = LatticeSpec(3, 4)
        p = ModelParams(t_avg=0.2, t_mod=0.0, mass=0.1)
        h1 = instantaneous_hamiltonian(0.0, lat, p)
        h2 = instantaneous_hamiltonian(1.234, lat, p)
        assert np.abs(h1 - h2).max() < 1e-14


class TestRibbon:
    def test_dimension(self):
        lat = LatticeSpec(4, 5, boundary="ribbon")
        H = build_ribbon_bloch(0.3, lat, ModelParams(0.2, 0.1), m_max=2)
        assert H.shape == (2 * 5 * 5, 2 * 5 * 5)

    def test_hermitian(self):
        lat = LatticeSpec(4, 6, boundary="ribbon")
        for kx in (-0.9, 0.0, 1.3):
            H = build_ribbon_bloch(kx, lat, ModelParams(0.25, 0.25, mass=0.05), m_max=2)
            assert np.abs(H - H.conj().T).max() < 1e-12

    def test_rejects_torus(self):
        with pytest.raises(ValueError):
            build_ribbon_bloch(0.0, LatticeSpec(4, 6), ModelParams(0.1, 0.1))

    def test_bulk_like_states_inside_bulk_envelope(self):
        p = ModelParams(t_avg=0.25, t_mod=0.25)
        lat = LatticeSpec(4, 12, boundary="ribbon")
        m_max = 2
        nt = 2 * lat.ny
        kx = 0.7
        w, v = np.linalg.eigh(build_ribbon_bloch(kx, lat, p, m_max=m_max))
        # edge weight: probability on the outermost chain at either boundary
        edge_rows = np.array([0, 1, nt - 2, nt - 1])
        idx = np.concatenate([edge_rows + s * nt for s in range(2 * m_max + 1)])
        weight = (np.abs(v[idx, :]) ** 2).sum(axis=0)
        kys = np.linspace(0, 2 * np.pi / 1.5, 240, endpoint=False)
        bulk = np.concatenate(
            [np.linalg.eigvalsh(build_bloch_blocks(np.array([kx, ky]), p, m_max)) for ky in kys]
        )
        lo, hi = bulk.min(), bulk.max()
        for e, wt in zip(w, weight):
            if wt < 0.05:
                assert lo - 1e-3 <= e <= hi + 1e-3


class TestSpectrumWrapper:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            quasienergy_spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_known_two_level(self):
        H = np.array([[1.0, 1j], [-1j, 1.0]])
        w, v = quasienergy_spectrum(H)
        assert np.allclose(w, [0.0, 2.0], atol=1e-12)

    def test_phase_convention_deterministic(self):
        rng = np.random.default_rng(5)
        A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        H = A + A.conj().T
        w, v = quasienergy_spectrum(H)
        for col in range(6):
            vec = v[:, col]
            first = vec[np.argmax(np.abs(vec) > 1e-8 * np.abs(vec).max())]
            assert abs(first.imag) < 1e-12 and first.real > 0
        # applying random phases to the input vectors changes nothing
        w2, v2 = quasienergy_spectrum(H.copy())
        assert np.allclose(v, v2)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        lat = LatticeSpec(3, 4)
        op = build_realspace_floquet(lat, ModelParams(0.2, 0.1, mass=0.03), m_max=1)
        save_operator(op, tmp_path / "op")
        mat, header = load_operator(tmp_path / "op")
        assert np.array_equal(mat, op.matrix)
        assert header["m_max"] == 1
        assert header["n_sites"] == lat.n_sites
        assert header["lattice"]["boundary"] == "torus"

    def test_payload_size_checked(self, tmp_path):
        op = build_realspace_floquet(LatticeSpec(3, 4), ModelParams(0.2, 0.1), m_max=1)
        save_operator(op, tmp_path / "op")
        raw = (tmp_path / "op.bin").read_bytes()
        (tmp_path / "op.bin").write_bytes(raw[:-16])
        with pytest.raises(ValueError):
            load_operator(tmp_path / "op")
