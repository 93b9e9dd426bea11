"""Lowest-order disorder self-energy and what it does to the phase diagram.

Everything here is non-self-consistent: the clean resolvent G = 1/(eps - H)
is weighted by the disorder covariance, Sigma_mn^{ij} = G_mn^{ij} <V_i V_j>.
Site-diagonal parts renormalize the drive frequency and the sublattice
offset; bond parts (present only for correlated disorder) renormalize the
two hopping scales, every nearest-neighbor entry carrying the kernel
factor F = exp(-a^2 / 2 corr_len^2).  A two-band reduction around the
zone center turns the same object into a mass correction whose zero
locates the Born-predicted transition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.optimize

from .disorder import DisorderSpec
from .model import (
    DRIVE_PHASES,
    LatticeSpec,
    ModelParams,
    bond_vectors,
    build_bloch_blocks,
    build_realspace_floquet,
    reciprocal_vectors,
)
from .phases import boundary_signature, signature_components

_NEAR_SINGULAR = 1e-6  # in units of omega, distance of a level from eps
_WEIGHT_FLOOR = 1e-10  # Gaussian kernel truncation for plane quadrature

# The four analysis points: 0.005 below (P1, P1', P3) or 0.01 above (P2)
# their clean boundary, with the reference energy of the gap in question.
ANALYSIS_POINTS: dict[str, tuple[ModelParams, float]] = {
    "P1": (ModelParams(t_avg=1.0 / 6.0 - 0.005, t_mod=1.0 / 6.0 - 0.005), 0.5),
    "P1p": (
        ModelParams(t_avg=0.1611324772, t_mod=0.1611324772, mass=0.04),
        0.5,
    ),
    "P2": (ModelParams(t_avg=1.0 / 3.0 + 0.01, t_mod=1.0 / 3.0 + 0.01), 0.0),
    "P3": (
        ModelParams(t_avg=0.8 / 3.0 - 0.005, t_mod=0.8 / 3.0 - 0.005, mass=0.2),
        0.0,
    ),
}


def analysis_point(name: str) -> tuple[ModelParams, float]:
    """Resolve an analysis-point label to (params, reference energy)."""
    key = name.replace("'", "p").replace("′", "p")
    if key not in ANALYSIS_POINTS:
        raise KeyError(f"unknown analysis point {name!r}; have {sorted(ANALYSIS_POINTS)}")
    return ANALYSIS_POINTS[key]


class NearSingularError(RuntimeError):
    """A quadrature point sits (almost) on the spectrum at the probe energy."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


@dataclass(frozen=True)
class SelfEnergy:
    """Born self-energy, either momentum-constant blocks or a real-space matrix."""

    matrix: np.ndarray
    representation: str  # "momentum" | "realspace"
    eps: float
    spec: DisorderSpec
    m_max: int
    lattice: LatticeSpec | None = None
    hermiticity_dev: float = 0.0
    a: float = 1.0


@dataclass(frozen=True)
class EffectiveParams:
    """Parameter shifts extracted from a self-energy at one (W, corr_len)."""

    dOmega: float
    dLambda: float
    dA: float
    dB: complex
    F: float
    eps_ref: float


@dataclass(frozen=True)
class BornCoefficients:
    """Shift coefficients with the W^2 (and F, for bonds) factors taken out.

    dOmega = c_omega W^2, dLambda = c_lambda W^2, dA = c_A W^2 F,
    dB = c_B W^2 F.  The coefficients are averages of the clean resolvent
    and therefore do not depend on the disorder itself; `raw` keeps the
    bond-direction-resolved averages that enter c_A and c_B, since at
    nonzero sublattice offset the two directions of a bond differ.
    """

    c_omega: float
    c_lambda: float
    c_A: float
    c_B: complex
    eps_ref: float
    m_max: int
    k_grid: int
    raw: dict

    def at(self, strength: float, corr_len: float) -> EffectiveParams:
        f = bond_kernel_factor(corr_len)
        w2 = strength**2
        return EffectiveParams(
            dOmega=self.c_omega * w2,
            dLambda=self.c_lambda * w2,
            dA=self.c_A * w2 * f,
            dB=self.c_B * w2 * f,
            F=f,
            eps_ref=self.eps_ref,
        )


def bond_kernel_factor(corr_len: float, a: float = 1.0) -> float:
    """Covariance at nearest-neighbor distance over its on-site value."""
    if corr_len <= 0.0:
        return 0.0
    return float(np.exp(-(a**2) / (2.0 * corr_len**2)))


# ---------------------------------------------------------------- resolvents


def _resolvent(k, eps, p: ModelParams, m_max: int) -> np.ndarray:
    H = build_bloch_blocks(k, p, m_max)
    w = np.linalg.eigvalsh(H)
    if np.abs(w - eps).min() < _NEAR_SINGULAR * p.omega:
        raise NearSingularError(
            f"spectrum within {_NEAR_SINGULAR} omega of eps={eps} at k={k}", k=k
        )
    return np.linalg.inv(eps * np.eye(H.shape[0]) - H)


def _bz_fractions(n: int):
    f = (np.arange(n) + 0.5) / n  # midpoint rule, avoids hitting Gamma exactly
    return f


def self_energy_momentum(
    eps: float, p: ModelParams, spec: DisorderSpec, m_max: int = 2, k_grid=48
) -> SelfEnergy:
    """Constant self-energy blocks from a momentum quadrature.

    Uncorrelated: W^2 times the BZ average of the resolvent, with the
    sublattice-offdiagonal entries dropped (a site-diagonal potential
    cannot generate them).  Correlated: the Gaussian-weighted plane
    integral over the kernel's support.  `k_grid` is either a mesh order
    or an explicit (n, 2) list of momenta (then averaged uniformly,
    useful for matching a finite torus exactly).
    """
    dim = 2 * (2 * m_max + 1)
    g1, g2 = reciprocal_vectors(p.a)
    if spec.mode == "uncorrelated":
        if np.ndim(k_grid) == 2:
            ks = np.asarray(k_grid, dtype=float)
        else:
            f = _bz_fractions(int(k_grid))
            ks = np.array([(fi * g1 + fj * g2) for fi in f for fj in f])
        acc = np.zeros((dim, dim), dtype=complex)
        for k in ks:
            acc += _resolvent(k, eps, p, m_max)
        acc /= len(ks)
        mask = np.kron(np.ones((2 * m_max + 1, 2 * m_max + 1)), np.eye(2))
        sigma = spec.strength**2 * acc * mask
    else:
        kc = np.sqrt(2.0 * np.log(1.0 / _WEIGHT_FLOOR)) / spec.corr_len
        n = int(k_grid) if np.ndim(k_grid) == 0 else 48
        xs = np.linspace(-kc, kc, n)
        dk = xs[1] - xs[0]
        acc = np.zeros((dim, dim), dtype=complex)
        for kx in xs:
            for ky in xs:
                wgt = np.exp(-(spec.corr_len**2) * (kx**2 + ky**2) / 2.0)
                if wgt < _WEIGHT_FLOOR:
                    continue
                acc += wgt * _resolvent(np.array([kx, ky]), eps, p, m_max)
        sigma = (spec.strength**2 * spec.corr_len**2 / (2.0 * np.pi)) * acc * dk * dk
    dev = float(np.abs(sigma - sigma.conj().T).max())
    return SelfEnergy(
        matrix=sigma,
        representation="momentum",
        eps=eps,
        spec=spec,
        m_max=m_max,
        hermiticity_dev=dev,
        a=p.a,
    )


def covariance_kernel(lat: LatticeSpec, spec: DisorderSpec, a: float = 1.0) -> np.ndarray:
    """<V_i V_j> on the torus: W^2 delta or the minimal-image Gaussian."""
    n = lat.n_sites
    if spec.mode == "uncorrelated":
        return spec.strength**2 * np.eye(n)
    pos = lat.positions(a)
    lx, ly = lat.lengths(a)
    dx = pos[:, 0][:, None] - pos[:, 0][None, :]
    dy = pos[:, 1][:, None] - pos[:, 1][None, :]
    dx -= lx * np.round(dx / lx)
    dy -= ly * np.round(dy / ly)
    return spec.strength**2 * np.exp(-(dx**2 + dy**2) / (2.0 * spec.corr_len**2))


def self_energy_realspace(
    eps: float, lat: LatticeSpec, p: ModelParams, spec: DisorderSpec, m_max: int = 2
) -> SelfEnergy:
    """Dense Sigma_mn^{ij} = G_mn^{ij} <V_i V_j> on a clean torus."""
    op = build_realspace_floquet(lat, p, m_max=m_max)
    w = np.linalg.eigvalsh(op.matrix)
    if np.abs(w - eps).min() < _NEAR_SINGULAR * p.omega:
        raise NearSingularError(f"clean spectrum touches eps={eps}; resolvent singular")
    G = scipy.linalg.inv(eps * np.eye(op.matrix.shape[0]) - op.matrix)
    kern = covariance_kernel(lat, spec, p.a)
    nsec = 2 * m_max + 1
    sigma = G * np.tile(kern, (nsec, nsec))
    dev = float(np.abs(sigma - sigma.conj().T).max())
    return SelfEnergy(
        matrix=sigma,
        representation="realspace",
        eps=eps,
        spec=spec,
        m_max=m_max,
        lattice=lat,
        hermiticity_dev=dev,
        a=p.a,
    )


def selfenergy_bloch_block(S: SelfEnergy, k, a: float = 1.0) -> np.ndarray:
    """Project a real-space self-energy onto one Bloch momentum (test oracle)."""
    if S.representation != "realspace":
        raise ValueError("Bloch projection needs the real-space representation")
    lat = S.lattice
    pos = lat.positions(a)
    sub = lat.sublattice()
    n = lat.n_sites
    nsec = 2 * S.m_max + 1
    dim = 2 * nsec
    out = np.zeros((dim, dim), dtype=complex)
    k = np.asarray(k, dtype=float)
    idx = [np.where(sub == s)[0] for s in (0, 1)]  # component order: blue, red
    for bm in range(nsec):
        for bn in range(nsec):
            block = S.matrix[bm * n : (bm + 1) * n, bn * n : (bn + 1) * n]
            for si, rows in enumerate(idx):
                for sj, cols in enumerate(idx):
                    ph = np.exp(-1j * ((pos[cols][:, None, :] - pos[rows][None, :, :]) @ k))
                    val = (block[np.ix_(rows, cols)] * ph.transpose(1, 0)).sum() / (n / 2)
                    out[2 * bm + si, 2 * bn + sj] = val
    return out


# ---------------------------------------------------------------- parameter shifts


def effective_parameters(S: SelfEnergy, lat: LatticeSpec) -> EffectiveParams:
    """Table-style averages over a real-space self-energy.

    Drive-frequency shift from the sector-diagonal difference, sublattice
    offset from the blue/red imbalance, hopping shifts from directed
    nearest-neighbor entries of the static and first-harmonic blocks.
    """
    if S.representation != "realspace" or S.lattice is None:
        raise ValueError("effective parameters need a real-space self-energy")
    if (lat.nx, lat.ny) != (S.lattice.nx, S.lattice.ny):
        raise ValueError("lattice does not match the one the self-energy was built on")
    if S.m_max < 1:
        raise ValueError("need sectors 0 and 1 present")
    n = lat.n_sites
    b0 = S.m_max  # block index of sector m=0
    b1 = S.m_max + 1
    s00 = S.matrix[b0 * n : (b0 + 1) * n, b0 * n : (b0 + 1) * n]
    s11 = S.matrix[b1 * n : (b1 + 1) * n, b1 * n : (b1 + 1) * n]
    s10 = S.matrix[b1 * n : (b1 + 1) * n, b0 * n : (b0 + 1) * n]
    sub = lat.sublattice()
    blue = sub == 0
    d00 = np.real(np.diag(s00))
    d_omega = float(np.real(np.trace(s11) - np.trace(s00)) / n)
    d_lambda = float(d00[blue].mean() - d00[~blue].mean()) / 2.0
    acc_a = 0.0 + 0.0j
    acc_b = 0.0 + 0.0j
    bonds = lat.bonds()
    for i, j, lam in bonds:
        acc_a += s00[i, j] + s00[j, i]
        acc_b += np.exp(-1j * DRIVE_PHASES[lam]) * (s10[i, j] + s10[j, i])
    n_dir = 2 * len(bonds)
    d_a = -float(np.real(acc_a / n_dir))
    d_b = -2.0 * acc_b / n_dir
    f = bond_kernel_factor(S.spec.corr_len if S.spec.mode == "correlated" else 0.0, S.a)
    return EffectiveParams(
        dOmega=d_omega, dLambda=d_lambda, dA=d_a, dB=complex(d_b), F=f, eps_ref=S.eps
    )


def born_coefficients(
    p: ModelParams, eps_ref: float, m_max: int = 2, k_grid: int | np.ndarray = 96
) -> BornCoefficients:
    """Resolvent averages behind the parameter shifts, from a fine BZ mesh.

    Coefficients are per W^2 (bond terms additionally per F), so a single
    mesh pass serves every disorder strength and correlation length.
    `k_grid` is either a mesh subdivision count or an explicit (n, 2) set
    of k-points, e.g. the commensurate set of a finite torus.
    """
    g1, g2 = reciprocal_vectors(p.a)
    avecs = bond_vectors(p.a)
    b0, b1 = m_max, m_max + 1
    ib, ir = 2 * b0, 2 * b0 + 1
    jb, jr = 2 * b1, 2 * b1 + 1
    if np.isscalar(k_grid):
        f = _bz_fractions(int(k_grid))
        kpts = np.array([fi * g1 + fj * g2 for fi in f for fj in f])
    else:
        kpts = np.asarray(k_grid, dtype=float).reshape(-1, 2)
    diag = np.zeros(4, dtype=complex)  # G00bb, G00rr, G11bb, G11rr
    a_br = np.zeros(3, dtype=complex)
    a_rb = np.zeros(3, dtype=complex)
    b_br = np.zeros(3, dtype=complex)
    b_rb = np.zeros(3, dtype=complex)
    nk = 0
    for k in kpts:
        G = _resolvent(k, eps_ref, p, m_max)
        diag += (G[ib, ib], G[ir, ir], G[jb, jb], G[jr, jr])
        ph = np.exp(1j * (avecs @ k))
        a_br += ph * G[ib, ir]
        a_rb += ph.conj() * G[ir, ib]
        b_br += ph * G[jb, ir]
        b_rb += ph.conj() * G[jr, ib]
        nk += 1
    diag /= nk
    a_br /= nk
    a_rb /= nk
    b_br /= nk
    b_rb /= nk
    c_omega = float(np.real(diag[2] + diag[3] - diag[0] - diag[1]) / 2.0)
    c_lambda = float(np.real(diag[0] - diag[1]) / 2.0)
    c_a = -float(np.real((a_br.sum() + a_rb.sum()) / 6.0))
    phase = np.exp(-1j * DRIVE_PHASES)
    c_b = complex(-2.0 * (phase * (b_br + b_rb)).sum() / 6.0)
    raw = {
        "G00_diag": [complex(diag[0]), complex(diag[1])],
        "G11_diag": [complex(diag[2]), complex(diag[3])],
        "bond_static_br": [complex(x) for x in a_br],
        "bond_static_rb": [complex(x) for x in a_rb],
        "bond_drive_br": [complex(x) for x in b_br],
        "bond_drive_rb": [complex(x) for x in b_rb],
    }
    return BornCoefficients(
        c_omega=c_omega,
        c_lambda=c_lambda,
        c_A=c_a,
        c_B=c_b,
        eps_ref=eps_ref,
        m_max=m_max,
        k_grid=int(k_grid) if np.isscalar(k_grid) else nk,
        raw=raw,
    )


# ---------------------------------------------------------------- low-energy model


@dataclass(frozen=True)
class LowEnergyModel:
    """Two-level reduction near the zone center at the half-gap energy."""

    M: float
    M0: float
    M1: complex
    Mt2: float
    block: np.ndarray
    rotation: np.ndarray


def low_energy_blocks(k, p: ModelParams) -> LowEnergyModel:
    """Mass and velocity structure of the ring-forming pair of levels.

    Valid for vanishing sublattice offset; the documented rotation maps
    the original sublattice basis to the one in which the block is
    written (sigma_x -> -sigma_z, sigma_z -> sigma_x).
    """
    if p.mass != 0.0:
        raise ValueError("the two-level reduction is derived for zero sublattice offset")
    k = np.asarray(k, dtype=float)
    kk = float(k @ k)
    if np.sqrt(kk) * p.a > 1.0:
        warnings.warn("momentum outside the validity range of the expansion", stacklevel=2)
    M = p.omega / 2.0 - 3.0 * p.t_avg
    m0 = M + 0.75 * p.t_avg * p.a**2 * kk
    m1 = (3.0 * p.t_mod * p.a / 8.0) * (1.0 - np.sqrt(3.0) * 1j) * (k[0] + 1j * k[1])
    mt2 = m0**2 + (9.0 / 16.0) * p.t_mod**2 * p.a**2 * kk
    block = np.array([[m0, m1], [np.conj(m1), -m0]])
    rot = scipy.linalg.expm(-1j * np.pi / 4.0 * np.array([[0.0, -1j], [1j, 0.0]]))
    return LowEnergyModel(M=M, M0=m0, M1=complex(m1), Mt2=mt2, block=block, rotation=rot)


@dataclass(frozen=True)
class MassCorrection:
    value: float
    error: float
    n_points: int


def _mass_integrand(kx, ky, p: ModelParams):
    kk = kx**2 + ky**2
    m0 = (p.omega / 2.0 - 3.0 * p.t_avg) + 0.75 * p.t_avg * p.a**2 * kk
    mt2 = m0**2 + (9.0 / 16.0) * p.t_mod**2 * p.a**2 * kk
    return m0 / mt2


def _ws_fold(kx, ky, g1, g2):
    """Map mesh points into the first BZ (nearest-image reduction)."""
    best_x, best_y = kx.copy(), ky.copy()
    best = best_x**2 + best_y**2
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            if i == 0 and j == 0:
                continue
            cx = kx + i * g1[0] + j * g2[0]
            cy = ky + i * g1[1] + j * g2[1]
            cc = cx**2 + cy**2
            take = cc < best
            best_x = np.where(take, cx, best_x)
            best_y = np.where(take, cy, best_y)
            best = np.where(take, cc, best)
    return best_x, best_y


def mass_correction(p: ModelParams, spec: DisorderSpec, tol: float = 1e-6) -> MassCorrection:
    """Born shift of the half-gap mass.

    Correlated: the integrand is exactly radial, so the plane integral
    reduces to one dimension in u = |k|^2 and goes to an adaptive panel
    quadrature; the Gaussian kernel fixes the upper cutoff.  Uncorrelated:
    the domain is the hexagonal zone, handled by a Gauss-Legendre tensor
    mesh on the primitive cell folded to nearest-image momenta, refined
    until the relative change drops below `tol`.
    """
    M = p.omega / 2.0 - 3.0 * p.t_avg
    if M <= 0.0:
        raise ValueError("mass is non-positive: already past the clean transition")
    if spec.strength == 0.0:
        return MassCorrection(value=0.0, error=0.0, n_points=0)
    correlated = spec.mode == "correlated" and spec.corr_len > 0.0

    if correlated:
        sig2 = spec.corr_len**2

        def radial(u):
            m0 = M + 0.75 * p.t_avg * p.a**2 * u
            return np.exp(-sig2 * u / 2.0) * m0 / (m0**2 + (9.0 / 16.0) * p.t_mod**2 * p.a**2 * u)

        u_cut = 2.0 * np.log(1.0 / _WEIGHT_FLOOR) / sig2
        val, abserr, info = scipy.integrate.quad(
            radial, 0.0, u_cut, epsabs=0.0, epsrel=tol, limit=400, full_output=True
        )[:3]
        if abs(val) > 0 and abserr > 10.0 * tol * abs(val):
            raise RuntimeError("mass-correction quadrature did not converge")
        pref = spec.strength**2 * sig2 / (2.0 * np.pi) * np.pi
        return MassCorrection(value=-pref * val, error=pref * abserr, n_points=int(info["neval"]))

    g1, g2 = reciprocal_vectors(p.a)

    def integral(order):
        x, wgt = np.polynomial.legendre.leggauss(order)
        f1 = 0.5 * (x + 1.0)
        jac = abs(g1[0] * g2[1] - g1[1] * g2[0]) / 4.0  # d2k per unit (f1,f2), GL halves
        F1, F2 = np.meshgrid(f1, f1, indexing="ij")
        KX = F1 * g1[0] + F2 * g2[0]
        KY = F1 * g1[1] + F2 * g2[1]
        KX, KY = _ws_fold(KX, KY, g1, g2)
        W2 = np.outer(wgt, wgt) * jac
        return float((W2 * _mass_integrand(KX, KY, p)).sum())

    order, prev = 32, None
    while order <= 2048:
        cur = integral(order)
        if prev is not None and abs(cur - prev) <= tol * abs(cur):
            pref = 3.0 * np.sqrt(3.0) * p.a**2 * spec.strength**2 / (8.0 * np.pi**2)
            return MassCorrection(value=-pref * cur, error=pref * abs(cur - prev), n_points=order * order)
        prev = cur
        order *= 2
    raise RuntimeError("mass-correction quadrature did not converge")


def born_critical_disorder(
    t_avg: float,
    corr_len: float,
    omega: float = 1.0,
    a: float = 1.0,
    w_max: float = 0.5,
    tol: float = 1e-6,
) -> float | None:
    """Disorder strength at which the Born-corrected mass changes sign.

    The correction scales exactly with W^2, so the root is unique; it is
    still located by bracketing on M + delta(W) as a guard against any
    future W-dependence of the integrand.  Returns None when no root
    exists below `w_max`.
    """
    if t_avg >= omega / 6.0:
        raise ValueError("clean mass must be positive (t_avg < omega/6)")
    p = ModelParams(t_avg=t_avg, t_mod=t_avg, omega=omega, a=a)
    if corr_len <= 0.0:
        spec = DisorderSpec(strength=1.0, mode="uncorrelated")
    else:
        if corr_len < a:
            warnings.warn(
                "correlated kernel below its validity range (corr_len < a); "
                "the result overshoots the uncorrelated limit",
                stacklevel=2,
            )
        spec = DisorderSpec(strength=1.0, corr_len=corr_len, mode="correlated")
    delta1 = mass_correction(p, spec, tol=tol).value
    M = omega / 2.0 - 3.0 * t_avg

    def balance(w):
        return M + w * w * delta1

    if balance(w_max) > 0.0:
        return None
    return float(scipy.optimize.brentq(balance, 0.0, w_max, xtol=1e-12))


# ---------------------------------------------------------------- shifted boundaries


@dataclass(frozen=True)
class BornBoundaryScan:
    """First disorder-induced crossing of an analytic boundary, if any."""

    crossing_W: float | None
    level: str | None
    eps_ref: float
    corr_len: float
    w_max: float
    coefficients: BornCoefficients


def corrected_params(p: ModelParams, coeffs: BornCoefficients, strength: float, corr_len: float) -> ModelParams:
    eff = coeffs.at(strength, corr_len)
    return ModelParams(
        t_avg=p.t_avg + eff.dA,
        t_mod=p.t_mod + eff.dB.real,
        mass=p.mass + eff.dLambda,
        omega=p.omega + eff.dOmega,
        a=p.a,
    )


def born_shifted_boundaries(
    point: ModelParams | str,
    eps_ref: float | None = None,
    corr_len: float = 0.0,
    coeffs: BornCoefficients | None = None,
    w_max: float = 0.2,
    n_scan: int = 200,
    m_max: int = 2,
    k_grid: int = 96,
    sig_m_max: int = 2,
) -> BornBoundaryScan:
    """Scan W for the first analytic-boundary crossing under shifted parameters.

    `point` is either explicit parameters (then `eps_ref` is required) or
    one of the analysis-point labels, which fixes the reference energy.
    The g/f levels change continuously along the shifted-parameter path,
    so a signature flip between scan nodes brackets the first crossing;
    the flip is then refined by bisection on W.
    """
    if isinstance(point, str):
        p, label_eps = analysis_point(point)
        eps_ref = label_eps if eps_ref is None else eps_ref
    else:
        p = point
        if eps_ref is None:
            raise ValueError("eps_ref is required with explicit parameters")
    if coeffs is None:
        coeffs = born_coefficients(p, eps_ref, m_max=m_max, k_grid=k_grid)
    names = signature_components(sig_m_max)

    def sig(w):
        return boundary_signature(corrected_params(p, coeffs, w, corr_len), m_max=sig_m_max)

    ws = np.linspace(0.0, w_max, n_scan + 1)
    base = sig(0.0)
    hit = None
    for lo, hi in zip(ws[:-1], ws[1:]):
        if sig(hi) != base:
            hit = (lo, hi)
            break
    if hit is None:
        return BornBoundaryScan(
            crossing_W=None, level=None, eps_ref=eps_ref, corr_len=corr_len,
            w_max=w_max, coefficients=coeffs,
        )
    lo, hi = hit
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if sig(mid) != base:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-10:
            break
    flipped = [i for i, (x, y) in enumerate(zip(base, sig(hi))) if x != y]
    label = names[flipped[0]] if flipped else "unidentified"
    return BornBoundaryScan(
        crossing_W=float(0.5 * (lo + hi)),
        level=label,
        eps_ref=eps_ref,
        corr_len=corr_len,
        w_max=w_max,
        coefficients=coeffs,
    )
