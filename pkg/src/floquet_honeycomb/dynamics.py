"""Time evolution of wave packets on zigzag ribbons.

One drive period is integrated by midpoint-exponential steps: the
Hamiltonian is frozen at the midpoint of each sub-interval and its exact
exponential is applied through a truncated power series in the sparse
matrix.  The same kernel advances a dense propagator (for spectral
checks) or a single state (for long stroboscopic runs).  A chirality
metric, the drift velocity of the edge-density center of mass, separates
the anomalous phase, whose edge packet runs one way around the ribbon,
from the staggered phase, whose two edge branches counter-propagate and
leave no net drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .model import (
    DRIVE_PHASES,
    LatticeSpec,
    ModelParams,
    drive_term_matrices,
)

_UNITARITY_TOL = 1e-10
_SERIES_TOL = 1e-15  # relative truncation of the per-step exponential
_SERIES_MAX_TERMS = 80


def _disorder_values(disorder) -> np.ndarray | None:
    # accept a DisorderField or a bare array of on-site energies
    if disorder is None:
        return None
    return np.asarray(getattr(disorder, "values", disorder), dtype=float)


def _period_steps(
    lat: LatticeSpec, p: ModelParams, disorder, n_steps: int
) -> tuple[list[scipy.sparse.csr_array], float]:
    """Midpoint Hamiltonian of every sub-interval of one period, sparse."""
    h_avg, h_lam = drive_term_matrices(lat, p, _disorder_values(disorder))
    base = scipy.sparse.csr_array(h_avg)
    mods = [scipy.sparse.csr_array(h) for h in h_lam]
    dt = p.period / n_steps
    mats = []
    for j in range(n_steps):
        t_mid = (j + 0.5) * dt
        h = base
        for lam in range(3):
            h = h + np.cos(p.omega * t_mid - DRIVE_PHASES[lam]) * mods[lam]
        mats.append(h)
    return mats, dt


def _apply_exponential(h: scipy.sparse.csr_array, dt: float, v: np.ndarray) -> np.ndarray:
    """exp(-i*dt*h) @ v by a power series; needs ||h||*dt well below pi."""
    out = v.astype(complex, copy=True)
    term = out.copy()
    for k in range(1, _SERIES_MAX_TERMS + 1):
        term = h @ term
        term *= -1j * dt / k
        out += term
        if np.abs(term).max() <= _SERIES_TOL * np.abs(out).max():
            return out
    raise RuntimeError("exponential series did not converge; increase n_steps")


def period_propagator(
    lat: LatticeSpec,
    p: ModelParams,
    disorder=None,
    n_steps: int = 128,
) -> np.ndarray:
    """Dense one-period evolution operator U(T, 0), T = 2*pi/omega.

    Parameters
    ----------
    disorder : DisorderField or array or None
        On-site energies added to the clean Hamiltonian.
    n_steps : int
        Sub-intervals per period, at least 16.  Each step is second-order
        accurate in the step size; the exponential itself is evaluated to
        machine precision, so the result is unitary regardless of n_steps.

    Raises
    ------
    ValueError
        If n_steps < 16.
    RuntimeError
        If the assembled operator misses unitarity by more than 1e-10,
        which signals a too-coarse step count for the given energy scales.
    """
    if n_steps < 16:
        raise ValueError("need at least 16 steps per period")
    mats, dt = _period_steps(lat, p, disorder, n_steps)
    u = np.eye(lat.n_sites, dtype=complex)
    for h in mats:
        u = _apply_exponential(h, dt, u)
    defect = np.abs(u.conj().T @ u - np.eye(lat.n_sites)).max()
    if defect >= _UNITARITY_TOL:
        raise RuntimeError(
            f"unitarity defect {defect:.2e} above {_UNITARITY_TOL}; increase n_steps"
        )
    return u


def propagator_quasienergies(u: np.ndarray, omega: float = 1.0) -> np.ndarray:
    """Quasienergies in [0, omega) from the eigenphases of U(T, 0)."""
    theta = np.angle(np.linalg.eigvals(u))
    return np.sort((-theta * omega / (2.0 * np.pi)) % omega)


def bottom_edge_sites(lat: LatticeSpec) -> np.ndarray:
    """Sites of the outermost zigzag chain (the red-terminated row), by x."""
    if lat.boundary != "ribbon":
        raise ValueError("edge chains exist on the ribbon only")
    sites = np.arange(2 * lat.nx)
    pos = lat.positions()
    return sites[np.argsort(pos[sites, 0], kind="stable")]


@dataclass(frozen=True)
class DensityHistory:
    """Stroboscopic record of |psi|^2 on a ribbon.

    `rho` holds the full site-resolved density per frame; `rho_edge` and
    `rho_total` are its restriction to the bottom zigzag chain and its sum
    over y, both on the common half-cell grid `x_grid`.  `edge_sites`
    (ordered by x) defines what "edge" means for the marginals.
    """

    times: np.ndarray
    rho: np.ndarray
    rho_edge: np.ndarray
    rho_total: np.ndarray
    x_grid: np.ndarray
    edge_sites: np.ndarray
    lat: LatticeSpec
    params: ModelParams
    initial_site: int
    n_steps: int

    @property
    def n_frames(self) -> int:
        return len(self.times)


def evolve_wavepacket(
    initial_site: int,
    n_periods: int,
    lat: LatticeSpec,
    p: ModelParams,
    disorder=None,
    n_steps: int = 128,
    frames_per_period: int = 1,
) -> DensityHistory:
    """March a single-site state through n_periods of the drive.

    The state starts as a delta function on `initial_site` and is recorded
    `frames_per_period` times per period (plus the initial frame).  Norm
    is checked against 1 to 1e-8 at every stored frame.
    """
    if lat.boundary != "ribbon":
        raise ValueError("wave-packet runs are defined on the ribbon")
    if not 0 <= initial_site < lat.n_sites:
        raise ValueError("initial site is not on the lattice")
    if n_periods < 1:
        raise ValueError("need at least one period")
    if n_steps % frames_per_period:
        raise ValueError("frames_per_period must divide n_steps")
    if n_steps < 16:
        raise ValueError("need at least 16 steps per period")

    mats, dt = _period_steps(lat, p, disorder, n_steps)
    chunk = n_steps // frames_per_period
    psi = np.zeros(lat.n_sites, dtype=complex)
    psi[initial_site] = 1.0

    times = [0.0]
    rho = [np.abs(psi) ** 2]
    for period in range(n_periods):
        for j, h in enumerate(mats):
            psi = _apply_exponential(h, dt, psi)
            if (j + 1) % chunk == 0:
                times.append((period * n_steps + j + 1) * dt)
                rho.append(np.abs(psi) ** 2)
    times = np.array(times)
    rho = np.array(rho)
    drift = np.abs(rho.sum(axis=1) - 1.0).max()
    if drift > 1e-8:
        raise RuntimeError(f"probability leaked: max |norm - 1| = {drift:.2e}")

    pos = lat.positions(p.a)
    half = 0.5 * np.sqrt(3.0) * p.a
    slots = np.rint(pos[:, 0] / half).astype(int)
    n_slots = 2 * lat.nx
    x_grid = half * np.arange(n_slots)
    edge = bottom_edge_sites(lat)
    rho_edge = rho[:, edge]
    rho_total = np.zeros((len(times), n_slots))
    np.add.at(rho_total.T, slots, rho.T)
    return DensityHistory(
        times=times,
        rho=rho,
        rho_edge=rho_edge,
        rho_total=rho_total,
        x_grid=x_grid,
        edge_sites=edge,
        lat=lat,
        params=p,
        initial_site=initial_site,
        n_steps=n_steps,
    )


@dataclass(frozen=True)
class ChiralityFit:
    """Drift of the edge-density center of mass.

    `value` is the least-squares slope of <x>_edge against time in units
    of bond lengths per period; its sign is the chirality.  `centers`
    stores the per-frame centers (same units), tracked incrementally
    around the periodic direction so a packet may wrap without a jump.
    A run whose density never changes cannot define a direction; it is
    flagged `degenerate` and reports exactly zero.
    """

    value: float
    stderr: float
    degenerate: bool
    centers: np.ndarray


def chirality_fit(h: DensityHistory) -> ChiralityFit:
    if h.n_frames < 10:
        raise ValueError("need at least 10 stroboscopic frames")
    if np.allclose(h.rho, h.rho[0], rtol=0.0, atol=1e-14):
        return ChiralityFit(0.0, 0.0, True, np.zeros(h.n_frames))
    # the ribbon is periodic along x: measure each frame's center as the
    # mean displacement from the previous center, wrapped to the nearest
    # image, and accumulate
    lx = np.sqrt(3.0) * h.params.a * h.lat.nx
    ref = float(h.x_grid[np.argmax(h.rho_edge[0])])
    centers = np.empty(h.n_frames)
    for f in range(h.n_frames):
        w = h.rho_edge[f]
        s = w.sum()
        if s > 0.0:
            d = (h.x_grid - ref + 0.5 * lx) % lx - 0.5 * lx
            ref = ref + float((w * d).sum()) / s
        centers[f] = ref
    centers = (centers - centers[0]) / h.params.a
    tt = h.times / h.params.period
    slope, intercept = np.polyfit(tt, centers, 1)
    resid = centers - (slope * tt + intercept)
    dof = h.n_frames - 2
    spread = ((tt - tt.mean()) ** 2).sum()
    stderr = float(np.sqrt((resid**2).sum() / dof / spread))
    return ChiralityFit(float(slope), stderr, False, centers)


def chirality_metric(h: DensityHistory) -> float:
    """Signed edge-drift velocity in bond lengths per period."""
    return chirality_fit(h).value


def edge_fraction(h: DensityHistory, n_chains: int = 3) -> np.ndarray:
    """Per-frame probability within the lowest `n_chains` zigzag chains."""
    y_max = 1.5 * h.params.a * (n_chains - 1) + 0.6 * h.params.a
    near = h.lat.positions(h.params.a)[:, 1] < y_max
    return h.rho[:, near].sum(axis=1)
