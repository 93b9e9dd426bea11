"""Tight-binding builders for a circularly driven honeycomb lattice.

The model is a nearest-neighbor honeycomb hopping model in which the three
bond hoppings are modulated with phase offsets 2*pi*lam/3 (lam = 0, 1, 2),

    J_lam(t) = t_avg + t_mod * cos(omega * t - 2*pi*lam/3),

plus a staggered on-site potential (+mass on the "blue" sublattice, -mass on
"red") and an optional static on-site disorder field.  Time periodicity is
handled in an extended (Floquet) Hilbert space: the harmonic blocks of the
drive couple neighboring photon sectors, and the sector ladder is truncated
at |m| <= m_max.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

S0 = np.eye(2, dtype=complex)
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Angles of the three nearest-neighbor bond vectors (blue -> red), chosen
# counterclockwise so the drive sequence lam = 0, 1, 2 winds the same way
# as the bond ordering.  The invariant signs downstream depend on this
# pairing, not on either choice in isolation.
_BOND_ANGLES = np.pi / 2 + 2.0 * np.pi * np.arange(3) / 3.0

DRIVE_PHASES = 2.0 * np.pi * np.arange(3) / 3.0

BLUE, RED = 0, 1


def bond_vectors(a: float = 1.0) -> np.ndarray:
    """Nearest-neighbor displacement vectors (blue to red), shape (3, 2)."""
    return a * np.stack([np.cos(_BOND_ANGLES), np.sin(_BOND_ANGLES)], axis=1)


def nnn_vectors(a: float = 1.0) -> np.ndarray:
    """Next-nearest-neighbor vectors b_lam = a_lam - a_{lam+1}, shape (3, 2)."""
    av = bond_vectors(a)
    return av - np.roll(av, -1, axis=0)


def primitive_vectors(a: float = 1.0) -> np.ndarray:
    """Honeycomb Bravais vectors, rows v1 = a2 - a1 and v2 = a0 - a1."""
    av = bond_vectors(a)
    return np.stack([av[2] - av[1], av[0] - av[1]], axis=0)


def reciprocal_vectors(a: float = 1.0) -> np.ndarray:
    """Rows g1, g2 with g_i . v_j = 2*pi*delta_ij."""
    return 2.0 * np.pi * np.linalg.inv(primitive_vectors(a)).T


def dirac_points(a: float = 1.0) -> np.ndarray:
    """The two inequivalent zone-corner momenta, shape (2, 2)."""
    g = reciprocal_vectors(a)
    return np.stack([(2.0 * g[0] + g[1]) / 3.0, (g[0] + 2.0 * g[1]) / 3.0])


@dataclass(frozen=True)
class ModelParams:
    """Drive and lattice energy scales.

    Parameters
    ----------
    t_avg : float
        Time-averaged nearest-neighbor hopping.
    t_mod : float
        Amplitude of the harmonic hopping modulation.
    mass : float
        Staggered sublattice potential (+mass on blue, -mass on red).
    omega : float
        Drive angular frequency.  Internally everything is expressed in
        units where omega = 1 unless stated otherwise.
    a : float
        Nearest-neighbor bond length.
    """

    t_avg: float
    t_mod: float
    mass: float = 0.0
    omega: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.a <= 0:
            raise ValueError("bond length must be positive")

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega


def hopping_amplitude(t: float, lam: int, p: ModelParams) -> float:
    """Instantaneous hopping J_lam(t) on bond family lam (0, 1, 2)."""
    if lam not in (0, 1, 2):
        raise ValueError("bond family index must be 0, 1 or 2")
    return p.t_avg + p.t_mod * np.cos(p.omega * t - DRIVE_PHASES[lam])


@dataclass(frozen=True)
class LatticeSpec:
    """Finite honeycomb sample built from zigzag chains.

    ``nx`` columns of 2-site cells per chain and ``ny`` chains stacked along
    y.  Site index of cell (chain t, column ix) is 2*(t*nx + ix) + s with
    s = 0 blue, s = 1 red.  A torus needs even ``ny`` so that the periodic
    cell is rectangular (lengths Lx = sqrt(3)*a*nx, Ly = 1.5*a*ny); that in
    turn keeps exp(-2i*pi*x/Lx) single-valued and lets plane-wave disorder
    live on momenta commensurate with both directions.  A ribbon is periodic
    along x and terminates on complete zigzag chains: the bottom edge is a
    red row, the top edge a blue row.
    """

    nx: int
    ny: int
    boundary: str = "torus"

    def __post_init__(self):
        if self.boundary not in ("torus", "ribbon"):
            raise ValueError("boundary must be 'torus' or 'ribbon'")
        if self.nx < 2:
            raise ValueError("need at least 2 columns")
        if self.ny < 2:
            raise ValueError("need at least 2 chains")
        if self.boundary == "torus" and self.ny % 2:
            raise ValueError("torus requires an even chain count")

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    def lengths(self, a: float = 1.0) -> tuple[float, float]:
        return np.sqrt(3.0) * a * self.nx, 1.5 * a * self.ny

    def site_index(self, t: int, ix: int, s: int) -> int:
        return 2 * ((t % self.ny) * self.nx + (ix % self.nx)) + s

    def sublattice(self) -> np.ndarray:
        """0 for blue, 1 for red, shape (n_sites,)."""
        tags = np.zeros(self.n_sites, dtype=int)
        tags[1::2] = RED
        return tags

    def sz_diag(self) -> np.ndarray:
        """Diagonal of the sublattice operator: +1 blue, -1 red."""
        return 1.0 - 2.0 * self.sublattice()

    def positions(self, a: float = 1.0) -> np.ndarray:
        """Cartesian site positions, shape (n_sites, 2)."""
        pos = np.empty((self.n_sites, 2))
        r3 = np.sqrt(3.0)
        for t in range(self.ny):
            half = 0.5 * (t % 2)
            othr = 0.5 * ((t + 1) % 2)
            for ix in range(self.nx):
                pos[self.site_index(t, ix, BLUE)] = (r3 * (ix + othr), 1.5 * t + 0.5)
                pos[self.site_index(t, ix, RED)] = (r3 * (ix + half), 1.5 * t)
        return pos * a

    def bonds(self) -> np.ndarray:
        """All nearest-neighbor bonds as rows (blue_site, red_site, lam).

        Bond family lam is fixed by the displacement red - blue matching
        bond_vectors()[lam] (up to the periodic wrap).
        """
        rows = []
        for t in range(self.ny):
            for ix in range(self.nx):
                b = self.site_index(t, ix, BLUE)
                if self.boundary == "torus" or t + 1 < self.ny:
                    rows.append((b, self.site_index(t + 1, ix, RED), 0))
                if t % 2 == 0:
                    rows.append((b, self.site_index(t, ix, RED), 1))
                    rows.append((b, self.site_index(t, ix + 1, RED), 2))
                else:
                    rows.append((b, self.site_index(t, ix, RED), 2))
                    rows.append((b, self.site_index(t, ix - 1, RED), 1))
        return np.array(rows, dtype=int)

    def torus_k_points(self, a: float = 1.0) -> np.ndarray:
        """Bloch momenta commensurate with the periodic cell, (n_cells, 2)."""
        if self.boundary != "torus":
            raise ValueError("momentum set is defined for the torus")
        lx, ly = self.lengths(a)
        p = np.arange(self.nx)
        q = np.arange(self.ny)
        kx = 2.0 * np.pi * p / lx
        ky = 2.0 * np.pi * q / ly
        KX, KY = np.meshgrid(kx, ky, indexing="ij")
        return np.stack([KX.ravel(), KY.ravel()], axis=1)


def _f_matrices(k: np.ndarray, a: float) -> np.ndarray:
    """Per-bond Bloch matrices f_lam(k), shape (3, 2, 2)."""
    av = bond_vectors(a)
    ph = av @ np.asarray(k, dtype=float)
    out = np.empty((3, 2, 2), dtype=complex)
    for lam in range(3):
        out[lam] = SX * np.cos(ph[lam]) + SY * np.sin(ph[lam])
    return out


def bloch_drive_blocks(k: np.ndarray, p: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Harmonic blocks of the Bloch Hamiltonian at momentum k.

    Returns (h0, hm, hp): the static block, the block coupling sector m to
    m-1 and the block coupling m to m+1.  hp equals the adjoint of hm.
    """
    f = _f_matrices(k, p.a)
    h0 = -p.t_avg * f.sum(axis=0) + p.mass * SZ
    phases = np.exp(1j * DRIVE_PHASES)
    hm = -(p.t_mod / 2.0) * np.einsum("l,lij->ij", phases, f)
    return h0, hm, hm.conj().T


def build_bloch_blocks(k: np.ndarray, p: ModelParams, m_max: int = 4) -> np.ndarray:
    """Truncated extended-space Bloch operator at momentum k.

    Sector blocks m*omega + h0 on the diagonal and the single-harmonic
    drive blocks on the first off-diagonals; sectors ordered m = -m_max
    ... +m_max.  Shape (2*(2*m_max+1),) squared.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    h0, hm, hp = bloch_drive_blocks(k, p)
    nsec = 2 * m_max + 1
    H = np.zeros((2 * nsec, 2 * nsec), dtype=complex)
    for b, m in enumerate(range(-m_max, m_max + 1)):
        sl = slice(2 * b, 2 * b + 2)
        H[sl, sl] = h0 + m * p.omega * S0
        if b > 0:
            H[sl, slice(2 * b - 2, 2 * b)] = hm
            H[slice(2 * b - 2, 2 * b), sl] = hp
    return H


@dataclass
class FloquetOperator:
    """Dense extended-space operator with its basis bookkeeping.

    Basis index is sector_block * n_sites + site; sector blocks are ordered
    m = -m_max ... +m_max.
    """

    matrix: np.ndarray
    m_max: int
    lattice: LatticeSpec
    params: ModelParams
    disorder: np.ndarray | None = None

    @property
    def n_sites(self) -> int:
        return self.lattice.n_sites

    @property
    def sectors(self) -> np.ndarray:
        return np.arange(-self.m_max, self.m_max + 1)

    def site_positions_full(self) -> np.ndarray:
        """Positions replicated across sectors, aligned with the basis."""
        pos = self.lattice.positions(self.params.a)
        return np.tile(pos, (2 * self.m_max + 1, 1))


def _static_bond_matrices(lat: LatticeSpec, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Static hopping matrix and the m->(m-1) harmonic bond matrix."""
    n = lat.n_sites
    h_static = np.zeros((n, n), dtype=complex)
    h_drive = np.zeros((n, n), dtype=complex)
    for i, j, lam in lat.bonds():
        h_static[i, j] += -p.t_avg
        h_static[j, i] += -p.t_avg
        amp = -(p.t_mod / 2.0) * np.exp(1j * DRIVE_PHASES[lam])
        # the harmonic block carries the same (unconjugated) amplitude on
        # both orientations of a bond; adjointness holds between blocks
        h_drive[i, j] += amp
        h_drive[j, i] += amp
    return h_static, h_drive


def _onsite_diagonal(lat: LatticeSpec, p: ModelParams, disorder: np.ndarray | None) -> np.ndarray:
    diag = p.mass * lat.sz_diag()
    if disorder is not None:
        v = np.asarray(disorder, dtype=float)
        if v.shape != (lat.n_sites,):
            raise ValueError("disorder values must have one entry per site")
        diag = diag + v
    return diag


def build_realspace_floquet(
    lat: LatticeSpec,
    p: ModelParams,
    disorder: np.ndarray | None = None,
    m_max: int = 2,
) -> FloquetOperator:
    """Truncated extended-space operator on the real-space torus.

    Parameters
    ----------
    lat : LatticeSpec
        Must be a torus.
    p : ModelParams
    disorder : array or None
        Static on-site energies, one per site, added to every sector block.
    m_max : int
        Photon-sector truncation; sectors m = -m_max ... +m_max.

    Returns
    -------
    FloquetOperator
        Dense operator of dimension 2 * nx * ny * (2*m_max + 1).
    """
    if lat.boundary != "torus":
        raise ValueError("real-space extended operator is built on the torus")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    n = lat.n_sites
    h_static, h_drive = _static_bond_matrices(lat, p)
    h_static += np.diag(_onsite_diagonal(lat, p, disorder))
    nsec = 2 * m_max + 1
    H = np.zeros((nsec * n, nsec * n), dtype=complex)
    for b, m in enumerate(range(-m_max, m_max + 1)):
        sl = slice(b * n, (b + 1) * n)
        H[sl, sl] = h_static + m * p.omega * np.eye(n)
        if b > 0:
            lo = slice((b - 1) * n, b * n)
            H[sl, lo] = h_drive
            H[lo, sl] = h_drive.conj().T
    dis = None if disorder is None else np.asarray(disorder, dtype=float).copy()
    return FloquetOperator(matrix=H, m_max=m_max, lattice=lat, params=p, disorder=dis)


def build_ribbon_bloch(kx: float, lat: LatticeSpec, p: ModelParams, m_max: int = 4) -> np.ndarray:
    """Extended-space operator of a zigzag ribbon at longitudinal momentum kx.

    Transverse basis runs over (chain, sublattice) as row 2*t + s; the full
    dimension is 2 * ny * (2*m_max + 1).  Matrix elements use the position
    gauge, i.e. hopping phases exp(-i*kx*dx) with dx the true bond
    displacement along x.
    """
    if lat.boundary != "ribbon":
        raise ValueError("expected a ribbon lattice")
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    av = bond_vectors(p.a)
    nt = 2 * lat.ny
    h0 = np.zeros((nt, nt), dtype=complex)
    hm = np.zeros((nt, nt), dtype=complex)

    def row(t: int, s: int) -> int:
        return 2 * t + s

    for t in range(lat.ny):
        # bond families leaving blue(t): vertical to chain t+1 plus the two
        # in-chain diagonals
        fams = [(0, t + 1)] if t + 1 < lat.ny else []
        if t % 2 == 0:
            fams += [(1, t), (2, t)]
        else:
            fams += [(2, t), (1, t)]
        for lam, tr in fams:
            i, j = row(t, BLUE), row(tr, RED)
            ph = np.exp(-1j * kx * av[lam, 0])
            h0[i, j] += -p.t_avg * ph
            h0[j, i] += -p.t_avg * np.conj(ph)
            amp = -(p.t_mod / 2.0) * np.exp(1j * DRIVE_PHASES[lam])
            hm[i, j] += amp * ph
            hm[j, i] += amp * np.conj(ph)
    h0 += np.diag(np.tile([p.mass, -p.mass], lat.ny))

    nsec = 2 * m_max + 1
    H = np.zeros((nsec * nt, nsec * nt), dtype=complex)
    for b, m in enumerate(range(-m_max, m_max + 1)):
        sl = slice(b * nt, (b + 1) * nt)
        H[sl, sl] = h0 + m * p.omega * np.eye(nt)
        if b > 0:
            lo = slice((b - 1) * nt, b * nt)
            H[sl, lo] = hm
            H[lo, sl] = hm.conj().T
    return H


def instantaneous_hamiltonian(
    t: float,
    lat: LatticeSpec,
    p: ModelParams,
    disorder: np.ndarray | None = None,
) -> np.ndarray:
    """Real-space Hamiltonian H(t) at one instant, shape (n_sites, n_sites)."""
    n = lat.n_sites
    H = np.zeros((n, n), dtype=complex)
    amps = [hopping_amplitude(t, lam, p) for lam in range(3)]
    for i, j, lam in lat.bonds():
        H[i, j] += -amps[lam]
        H[j, i] += -amps[lam]
    H += np.diag(_onsite_diagonal(lat, p, disorder))
    return H


def drive_term_matrices(lat: LatticeSpec, p: ModelParams, disorder: np.ndarray | None = None):
    """Decompose H(t) = h_avg + sum_lam cos(omega*t - phi_lam) * h_lam.

    Returns (h_avg, [h_0, h_1, h_2]) as dense arrays; useful for cheap
    repeated evaluation during time stepping.
    """
    n = lat.n_sites
    h_avg = np.zeros((n, n), dtype=complex)
    h_lam = [np.zeros((n, n), dtype=complex) for _ in range(3)]
    for i, j, lam in lat.bonds():
        h_avg[i, j] += -p.t_avg
        h_avg[j, i] += -p.t_avg
        h_lam[lam][i, j] += -p.t_mod
        h_lam[lam][j, i] += -p.t_mod
    h_avg += np.diag(_onsite_diagonal(lat, p, disorder))
    return h_avg, h_lam


def quasienergy_spectrum(H: np.ndarray, sz_diag: np.ndarray | None = None):
    """Eigendecomposition with a deterministic output convention.

    Eigenvalues ascend; each eigenvector is rotated so its first component
    of magnitude above 1e-8 of its peak is real positive.  Within
    numerically degenerate groups the order follows ascending sublattice
    polarization when ``sz_diag`` is given, else a lexicographic comparison
    of the rounded vectors.

    Raises
    ------
    ValueError
        If the operator deviates from Hermiticity by more than 1e-9 of its
        largest element.
    """
    H = np.asarray(H)
    scale = max(np.abs(H).max(), 1.0)
    defect = np.abs(H - H.conj().T).max()
    if defect > 1e-9 * scale:
        raise ValueError(f"operator is not Hermitian (defect {defect:.3e})")
    w, v = np.linalg.eigh(H)

    for col in range(v.shape[1]):
        vec = v[:, col]
        peak = np.abs(vec).max()
        idx = np.argmax(np.abs(vec) > 1e-8 * peak)
        phase = vec[idx] / abs(vec[idx])
        v[:, col] = vec * np.conj(phase)

    tol = 1e-12 * max(1.0, np.abs(w).max())
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] - w[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            if sz_diag is not None:
                keys = np.real(np.einsum("in,i,in->n", block.conj(), sz_diag, block))
                order = np.argsort(keys, kind="stable")
            else:
                keys = [tuple(np.round(block[:, c].view(float), 10)) for c in range(block.shape[1])]
                order = np.argsort(np.array(keys, dtype=object), kind="stable")
            v[:, start:stop] = block[:, order]
        start = stop
    return w, v


def save_operator(op: FloquetOperator | np.ndarray, path: str | Path, meta: dict | None = None) -> None:
    """Write a dense complex operator as raw little-endian f64 pairs + JSON header."""
    path = Path(path)
    if isinstance(op, FloquetOperator):
        mat = op.matrix
        header = {
            "dim": int(mat.shape[0]),
            "m_max": int(op.m_max),
            "basis": "sector_block * n_sites + site, sectors -m_max..m_max",
            "n_sites": int(op.n_sites),
            "lattice": {"nx": op.lattice.nx, "ny": op.lattice.ny, "boundary": op.lattice.boundary},
        }
    else:
        mat = np.asarray(op)
        header = {"dim": int(mat.shape[0]), "m_max": None, "basis": "unspecified"}
    if meta:
        header.update(meta)
    blob = np.ascontiguousarray(mat.astype("<c16", copy=False))
    path.with_suffix(".bin").write_bytes(blob.tobytes(order="C"))
    path.with_suffix(".json").write_text(json.dumps(header, indent=1, sort_keys=True))


def load_operator(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read back an operator written by save_operator."""
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    dim = header["dim"]
    raw = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<c16")
    if raw.size != dim * dim:
        raise ValueError("binary payload does not match header dimension")
    return raw.reshape(dim, dim).astype(complex), header
