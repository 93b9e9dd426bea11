"""Random on-site potentials with controlled spatial correlation.

Two flavors: iid uniform noise, and a smooth speckle-like field whose
two-point function is Gaussian,

    <V(r) V(r')> = strength^2 * exp(-|r - r'|^2 / (2 corr_len^2)),

built as a random-phase Fourier series on the torus-commensurate k grid.
Site values are exact samples of the continuous field, so short-distance
correlations are kept no matter how coarse the lattice is; wrap-around
corrections are of order exp(-(L - |dr|)^2 / 2 corr_len^2) and negligible
whenever the box is a few correlation lengths wide.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import LatticeSpec

_PRUNE_REL = 1e-8  # drop Fourier modes weaker than this relative to the k=0 one
_MIN_CORR_LEN = 0.25  # in units of a; below this the field is effectively white
_CHUNK = 4096


@dataclass(frozen=True)
class DisorderSpec:
    """What to draw: amplitude, correlation length, ensemble size, seeding.

    strength is the rms value of the potential; corr_len is a physical
    length (same units as the bond length) and is ignored in uncorrelated
    mode.  Each sample is keyed by (seed, sample_index) so any member of
    the ensemble can be regenerated without drawing the ones before it.
    """

    strength: float
    corr_len: float = 0.0
    mode: str = "correlated"
    n_samples: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.strength < 0:
            raise ValueError("strength must be non-negative")
        if self.mode not in ("correlated", "uncorrelated"):
            raise ValueError(f"unknown disorder mode {self.mode!r}")
        if self.mode == "correlated" and self.corr_len <= 0:
            raise ValueError("correlated mode needs corr_len > 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")


@dataclass(frozen=True)
class DisorderField:
    """One realization, evaluated at the lattice sites (site-index order)."""

    values: np.ndarray
    sample_index: int
    mode: str
    strength: float
    corr_len: float


def field_rng(seed: int, sample_index: int) -> np.random.Generator:
    """Counter-based generator keyed on (seed, sample)."""
    ss = np.random.SeedSequence(entropy=(int(seed), int(sample_index)))
    return np.random.Generator(np.random.Philox(ss))


def sample_uncorrelated(n_sites: int, strength: float, rng: np.random.Generator) -> np.ndarray:
    # uniform on [-sqrt(3) W, sqrt(3) W] has variance W^2
    return rng.uniform(-np.sqrt(3.0) * strength, np.sqrt(3.0) * strength, size=n_sites)


def _speckle_grid(lx: float, ly: float, corr_len: float, a: float):
    """Torus-commensurate k grid covering the Gaussian spectral support.

    The extent along each axis is at least the Nyquist frequency of the
    site rows (spacings sqrt(3)a/2 and a/2) and at least the radius where
    the mode amplitude has decayed to the pruning threshold; modes below
    threshold are then dropped, so only the second bound is ever active
    in practice.
    """
    dkx = 2.0 * np.pi / lx
    dky = 2.0 * np.pi / ly
    k_cut = 2.0 * np.sqrt(np.log(1.0 / _PRUNE_REL)) / corr_len
    ext_x = max(np.pi / (np.sqrt(3.0) * a / 2.0), k_cut)
    ext_y = max(np.pi / (a / 2.0), k_cut)
    nxm = int(np.ceil(ext_x / dkx))
    nym = int(np.ceil(ext_y / dky))
    ii, jj = np.meshgrid(np.arange(-nxm, nxm + 1), np.arange(-nym, nym + 1), indexing="ij")
    half = (jj > 0) | ((jj == 0) & (ii > 0))  # one of each +-k pair, k=0 excluded
    kx = ii[half] * dkx
    ky = jj[half] * dky
    amp = np.exp(-(corr_len**2) * (kx**2 + ky**2) / 4.0)
    keep = amp >= _PRUNE_REL
    return np.column_stack([kx[keep], ky[keep]]), amp[keep], dkx, dky


def sample_correlated(
    positions: np.ndarray,
    lx: float,
    ly: float,
    strength: float,
    corr_len: float,
    rng: np.random.Generator,
    a: float = 1.0,
) -> np.ndarray:
    """Draw one speckle field and evaluate it at the given positions.

    Every mode gets independent uniform cosine/sine weights with variance
    proportional to the Gaussian spectral density; summing the series
    reproduces the target covariance exactly on the periodic box.
    """
    if corr_len < _MIN_CORR_LEN * a:
        raise ValueError(f"corr_len below {_MIN_CORR_LEN} bond lengths is not supported")
    if strength == 0.0:
        return np.zeros(len(positions))
    kvecs, amp, dkx, dky = _speckle_grid(lx, ly, corr_len, a)
    d0 = np.sqrt(np.pi) * strength * corr_len / np.sqrt(dkx * dky)
    dk = d0 * amp
    # draw order is fixed: zero mode, then cosines, then sines
    u0 = rng.uniform(-np.sqrt(6.0), np.sqrt(6.0)) * d0
    u = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=dk.size) * dk
    v = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=dk.size) * dk
    vals = np.full(len(positions), u0)
    for s in range(0, dk.size, _CHUNK):
        ph = positions @ kvecs[s : s + _CHUNK].T
        vals += 2.0 * (np.cos(ph) @ u[s : s + _CHUNK] + np.sin(ph) @ v[s : s + _CHUNK])
    return vals * (dkx * dky / (2.0 * np.pi))


def sample_field(
    lat: LatticeSpec, spec: DisorderSpec, sample_index: int, a: float = 1.0
) -> DisorderField:
    """Generate realization `sample_index` of the ensemble on this lattice."""
    rng = field_rng(spec.seed, sample_index)
    if spec.mode == "uncorrelated":
        vals = sample_uncorrelated(lat.n_sites, spec.strength, rng)
    else:
        if lat.boundary != "torus":
            raise ValueError("correlated disorder is defined on the torus only")
        lx, ly = lat.lengths(a)
        vals = sample_correlated(lat.positions(a), lx, ly, spec.strength, spec.corr_len, rng, a)
    return DisorderField(
        values=vals,
        sample_index=sample_index,
        mode=spec.mode,
        strength=spec.strength,
        corr_len=spec.corr_len,
    )


def sample_fields(lat: LatticeSpec, spec: DisorderSpec, a: float = 1.0) -> list[DisorderField]:
    return [sample_field(lat, spec, i, a) for i in range(spec.n_samples)]


def gaussian_covariance(displacement, strength: float, corr_len: float) -> float:
    d2 = float(np.dot(displacement, displacement))
    return strength**2 * np.exp(-d2 / (2.0 * corr_len**2))


def site_pairs_at_displacement(
    lat: LatticeSpec, displacement, a: float = 1.0, tol: float = 1e-6
) -> tuple[np.ndarray, np.ndarray]:
    """All (i, j) with pos_j = pos_i + displacement modulo the torus."""
    pos = lat.positions(a)
    lx, ly = lat.lengths(a)
    lookup = {}
    for idx, (x, y) in enumerate(pos):
        lookup[(round(x / tol), round(y / tol))] = idx
    ii, jj = [], []
    for idx, (x, y) in enumerate(pos):
        tx = (x + displacement[0]) % lx
        ty = (y + displacement[1]) % ly
        if tx > lx - tol / 2:
            tx = 0.0
        if ty > ly - tol / 2:
            ty = 0.0
        j = lookup.get((round(tx / tol), round(ty / tol)))
        if j is not None:
            ii.append(idx)
            jj.append(j)
    if not ii:
        raise ValueError(f"displacement {tuple(displacement)} connects no site pairs")
    return np.array(ii), np.array(jj)


def empirical_covariance(
    fields, lat: LatticeSpec, displacement, a: float = 1.0
) -> tuple[float, float, int]:
    """Estimate <V(r) V(r + displacement)> from an ensemble of fields.

    Each field contributes one pair-averaged estimate; the standard error
    is computed across fields (at least two are required).  Returns
    (estimate, stderr, n_pairs).
    """
    vals = np.stack([f.values if isinstance(f, DisorderField) else np.asarray(f) for f in fields])
    if vals.shape[0] < 2:
        raise ValueError("need at least two fields for a standard error")
    i, j = site_pairs_at_displacement(lat, displacement, a)
    per_field = (vals[:, i] * vals[:, j]).mean(axis=1)
    est = float(per_field.mean())
    se = float(per_field.std(ddof=1) / np.sqrt(vals.shape[0]))
    return est, se, i.size


def covariance_table(
    fields, lat: LatticeSpec, displacements, strength: float, corr_len: float, a: float = 1.0
) -> list[dict]:
    """Measured vs target covariance at each displacement, as report rows."""
    rows = []
    for d in displacements:
        est, se, n = empirical_covariance(fields, lat, d, a)
        target = gaussian_covariance(d, strength, corr_len) if corr_len > 0 else (
            strength**2 if float(np.hypot(*d)) == 0.0 else 0.0
        )
        rows.append(
            {
                "dx": float(d[0]),
                "dy": float(d[1]),
                "estimate": est,
                "stderr": se,
                "n_pairs": n,
                "target": float(target),
            }
        )
    return rows


def write_covariance_csv(rows: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ["dx", "dy", "estimate", "stderr", "n_pairs", "target"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([f"{r[c]:.12g}" if isinstance(r[c], float) else r[c] for c in cols])
