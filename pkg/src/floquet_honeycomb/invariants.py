"""Topological diagnostics for the driven lattice.

Momentum space: Berry curvature and Chern numbers from link variables of
band projectors on a uniform BZ mesh, and winding numbers obtained as the
total Chern number of all truncated-space bands below a reference
quasienergy.  Real space: the Bott index of projected position
exponentials on a disordered torus, plus disorder-ensemble averaging.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from joblib import Parallel, delayed

from .disorder import DisorderSpec, sample_field
from .model import (
    FloquetOperator,
    LatticeSpec,
    ModelParams,
    bond_vectors,
    build_bloch_blocks,
    build_realspace_floquet,
    reciprocal_vectors,
)

BOTT_ROUNDING_TOL = 0.15  # beyond this the index is reported unresolved
_DET_FLOOR = 1e-12
_GAP_FLOOR = 1e-8


class GapClosureError(RuntimeError):
    """A band touching was detected on the BZ mesh.

    Carries the offending mesh cell (i, j) and, when known, the minimal
    spectral distance to the window edge and the momentum where it occurs.
    """

    def __init__(self, message, plaquette=None, gap=None, k=None):
        super().__init__(message)
        self.plaquette = plaquette
        self.gap = gap
        self.k = k


class SingularBottError(RuntimeError):
    """The Bott loop product has a (numerically) zero eigenvalue."""


class NonIntegerFluxError(RuntimeError):
    """Total Berry flux failed the integrality tolerance; refine the mesh."""


@dataclass(frozen=True)
class TopoIndices:
    """Chern number of the band just below zero plus both winding numbers."""

    C: int
    W0: int
    W_half: int
    label: str = ""

    def __post_init__(self):
        if self.W0 != self.W_half + self.C:
            raise ValueError("inconsistent indices: W0 must equal W_half + C")


@dataclass(frozen=True)
class BerryCurvature:
    """Plaquette-resolved Berry flux over the BZ mesh and its total."""

    flux: np.ndarray
    total: float
    window: tuple
    grid: int
    n_bands: int


# ---------------------------------------------------------------- momentum space


def _window_frames(p: ModelParams, m_max: int, grid: int, windows):
    """Eigenframes for several energy windows from one pass over the mesh.

    Eigenvectors are rotated to the lattice-periodic gauge (cell-offset
    phases stripped) so that the mesh wraps onto itself; without this the
    link products would compare states of inequivalent Bloch operators at
    the zone edge.
    """
    if grid < 12:
        raise ValueError("mesh must be at least 12x12")
    g1, g2 = reciprocal_vectors(p.a)
    a0 = bond_vectors(p.a)[0]
    dim = 2 * (2 * m_max + 1)
    red = np.arange(1, dim, 2)
    counts = [None] * len(windows)
    frames = [None] * len(windows)
    edge_gap = [(np.inf, None)] * len(windows)
    for i in range(grid):
        for j in range(grid):
            k = (i * g1 + j * g2) / grid
            w, v = np.linalg.eigh(build_bloch_blocks(k, p, m_max))
            v = v.copy()
            v[red, :] *= np.exp(1j * (k @ a0))
            for nw, (lo, hi) in enumerate(windows):
                sel = np.ones(dim, dtype=bool)
                for edge in (lo, hi):
                    if edge is not None and np.isfinite(edge):
                        d = np.abs(w - edge).min()
                        if d < edge_gap[nw][0]:
                            edge_gap[nw] = (d, k)
                if lo is not None and np.isfinite(lo):
                    sel &= w > lo
                if hi is not None and np.isfinite(hi):
                    sel &= w < hi
                nb = int(sel.sum())
                if counts[nw] is None:
                    counts[nw] = nb
                    frames[nw] = np.empty((grid, grid, dim, nb), dtype=complex)
                elif nb != counts[nw]:
                    raise GapClosureError(
                        f"band count changed from {counts[nw]} to {nb} at mesh cell "
                        f"({i}, {j}): gap closure inside the window {windows[nw]}",
                        plaquette=(i, j),
                    )
                frames[nw][i, j] = v[:, sel]
    for nw, (g, kmin) in enumerate(edge_gap):
        if g < _GAP_FLOOR:
            raise GapClosureError(
                f"spectrum touches the window edge (gap {g:.3e} at k = {kmin})",
                gap=g,
                k=kmin,
            )
    return frames, edge_gap


def _link_phases(F, direction):
    ov = np.einsum("ijab,ijac->ijbc", F.conj(), np.roll(F, -1, axis=direction))
    d = np.linalg.det(ov)
    bad = np.abs(d) < _DET_FLOOR
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise GapClosureError(
            f"singular link overlap at mesh cell ({i}, {j}), direction {direction}",
            plaquette=(int(i), int(j)),
        )
    return d / np.abs(d)


def _fhs_flux(F):
    u1 = _link_phases(F, 0)
    u2 = _link_phases(F, 1)
    return np.angle(u1 * np.roll(u2, -1, axis=0) * np.conj(np.roll(u1, -1, axis=1)) * np.conj(u2))


def berry_curvature_map(
    p: ModelParams, m_max: int = 4, grid: int = 48, window=None
) -> BerryCurvature:
    """Berry flux per mesh plaquette for the states inside `window`.

    The default window (-omega/2, 0) selects the band group just below
    zero quasienergy.  Window edges must stay inside gaps everywhere on
    the mesh.
    """
    if window is None:
        window = (-p.omega / 2.0, 0.0)
    frames, _ = _window_frames(p, m_max, grid, [window])
    ph = _fhs_flux(frames[0])
    return BerryCurvature(
        flux=ph,
        total=float(ph.sum() / (2.0 * np.pi)),
        window=tuple(window),
        grid=grid,
        n_bands=frames[0].shape[-1],
    )


def _round_flux(total: float, grid: int) -> int:
    if abs(total - round(total)) > 0.01:
        raise NonIntegerFluxError(
            f"total flux {total:.4f} is not integer to 0.01 at mesh {grid}x{grid}; "
            "refine the mesh or check that the window edges sit in gaps"
        )
    return int(round(total))


def chern_number(p: ModelParams, m_max: int = 4, grid: int = 48, window=None) -> int:
    """Integer Chern number of the band group in `window` (default: just below 0)."""
    bc = berry_curvature_map(p, m_max, grid, window)
    return _round_flux(bc.total, grid)


def winding_number(
    p: ModelParams, eps_ref: float, m_max: int = 4, grid: int = 48, eps_min: float | None = None
) -> int:
    """Total Chern number of all truncated-space bands below eps_ref.

    This equals the gap invariant counting chiral edge modes at eps_ref,
    referenced to the central Floquet zone.  `eps_min` optionally raises
    the bottom cutoff from the truncation edge; it must sit in a gap.
    """
    frames, _ = _window_frames(p, m_max, grid, [(eps_min, eps_ref)])
    total = float(_fhs_flux(frames[0]).sum() / (2.0 * np.pi))
    return _round_flux(total, grid)


def topo_indices(p: ModelParams, m_max: int = 4, grid: int = 48) -> TopoIndices:
    """(C, W0, W_half) from a single pass over the BZ mesh."""
    half = p.omega / 2.0
    windows = [(-half, 0.0), (None, 0.0), (None, half)]
    frames, _ = _window_frames(p, m_max, grid, windows)
    c, w0, wh = (_round_flux(float(_fhs_flux(f).sum() / (2.0 * np.pi)), grid) for f in frames)
    return TopoIndices(C=c, W0=w0, W_half=wh)


# ---------------------------------------------------------------- real space


@dataclass
class BandProjector:
    """Orthonormal frame spanning the selected eigenstates of a real-space operator.

    The projector matrix itself is formed on demand; the frame is what
    every downstream computation consumes.  `gap_ok` records whether the
    spectral gap at the selection edge cleared 10x the mean level spacing.
    """

    frame: np.ndarray
    eps_ref: float
    positions: np.ndarray
    lengths: tuple
    gap: float
    gap_ok: bool
    eigenvalues: np.ndarray = field(repr=False, default=None)

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    def matrix(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T


def band_projector(op: FloquetOperator, eps_ref: float, window=None) -> BandProjector:
    """Projector onto all eigenstates below eps_ref (or inside `window`).

    A small gap at the selection edge produces a warning, not an error;
    near transitions the projector is still the object of interest.
    """
    if op.lattice.boundary != "torus":
        raise ValueError("projector-based invariants need the torus")
    w = scipy.linalg.eigh(op.matrix, eigvals_only=True)
    lo, hi = window if window is not None else (None, eps_ref)
    sel = np.ones(w.size, dtype=bool)
    if lo is not None:
        sel &= w > lo
    if hi is not None:
        sel &= w < hi
    if not sel.any() or sel.all():
        gap = np.inf
    else:
        inside = w[sel]
        outside = w[~sel]
        gap = float(min(np.abs(outside[:, None] - np.array([[inside.min(), inside.max()]])).min(), np.inf))
    spacing = (w.max() - w.min()) / max(w.size - 1, 1)
    gap_ok = bool(gap >= 10.0 * spacing)
    if not gap_ok:
        warnings.warn(
            f"gap {gap:.3e} at the selection edge is below 10x the mean level "
            f"spacing {spacing:.3e}; projector returned anyway",
            stacklevel=2,
        )
    idx = np.where(sel)[0]
    if idx.size != idx[-1] - idx[0] + 1:
        raise ValueError("selection window is not spectrally contiguous")
    _, vecs = scipy.linalg.eigh(op.matrix, subset_by_index=(int(idx[0]), int(idx[-1])), driver="evr")
    return BandProjector(
        frame=vecs,
        eps_ref=float(eps_ref if hi is None else hi),
        positions=op.site_positions_full(),
        lengths=op.lattice.lengths(op.params.a),
        gap=gap,
        gap_ok=gap_ok,
        eigenvalues=w[sel],
    )


@dataclass(frozen=True)
class BottResult:
    raw: float
    value: int
    resolved: bool
    eps_ref: float
    rank: int


def _bott_from_frame(frame: np.ndarray, positions: np.ndarray, lengths) -> float:
    phx = np.exp(-2j * np.pi * positions[:, 0] / lengths[0])
    phy = np.exp(-2j * np.pi * positions[:, 1] / lengths[1])
    ux = frame.conj().T @ (phx[:, None] * frame)
    uy = frame.conj().T @ (phy[:, None] * frame)
    m = ux @ uy @ ux.conj().T @ uy.conj().T
    lam = np.linalg.eigvals(m)
    if np.abs(lam).min() < 1e-10:
        raise SingularBottError("loop product has a zero eigenvalue: gap collapse")
    return float(np.angle(lam).sum() / (2.0 * np.pi))


def bott_index(proj: BandProjector, lat: LatticeSpec | None = None) -> BottResult:
    """Bott index of the projected position exponentials on the torus."""
    raw = _bott_from_frame(proj.frame, proj.positions, proj.lengths)
    value = int(round(raw))
    return BottResult(
        raw=raw,
        value=value,
        resolved=bool(abs(raw - value) <= BOTT_ROUNDING_TOL),
        eps_ref=proj.eps_ref,
        rank=proj.rank,
    )


def _bott_pair_from_matrix(matrix, positions, lengths, eps_refs):
    """Bott at several below-energy cutoffs from one eigensolve."""
    top = max(eps_refs)
    w, vecs = scipy.linalg.eigh(
        matrix, subset_by_value=(-np.inf, top), driver="evr", overwrite_a=True
    )
    out = {}
    for eps in eps_refs:
        fr = vecs[:, w < eps]
        if fr.shape[1] == 0:
            raise SingularBottError(f"no states below {eps}")
        raw = _bott_from_frame(fr, positions, lengths)
        value = int(round(raw))
        out[eps] = BottResult(
            raw=raw,
            value=value,
            resolved=bool(abs(raw - value) <= BOTT_ROUNDING_TOL),
            eps_ref=eps,
            rank=fr.shape[1],
        )
    return out


def clean_bott_pair(
    lat: LatticeSpec, p: ModelParams, m_max: int = 2, eps_refs=None
) -> dict[float, BottResult]:
    """Bott indices of the clean torus at the standard reference energies."""
    if eps_refs is None:
        eps_refs = (0.0, p.omega / 2.0)
    op = build_realspace_floquet(lat, p, m_max=m_max)
    return _bott_pair_from_matrix(
        op.matrix, op.site_positions_full(), lat.lengths(p.a), tuple(eps_refs)
    )


# ---------------------------------------------------------------- disorder averaging


@dataclass(frozen=True)
class SampleBott:
    sample_index: int
    results: dict  # eps_ref -> BottResult


@dataclass(frozen=True)
class DisorderedBott:
    """Ensemble summary at one disorder strength."""

    mean: dict
    stderr: dict
    samples: list
    failures: list
    eps_refs: tuple
    strength: float


def _clean_matrix(lat: LatticeSpec, p: ModelParams, m_max: int):
    op = build_realspace_floquet(lat, p, m_max=m_max)
    return op.matrix, op.site_positions_full(), lat.lengths(p.a)


def _one_sample(clean, positions, lengths, lat, p, spec, index, eps_refs, m_max):
    fld = sample_field(lat, spec, index, a=p.a)
    m = clean.copy()
    n = lat.n_sites
    diag = np.tile(fld.values, 2 * m_max + 1)
    m[np.arange(m.shape[0]), np.arange(m.shape[0])] += diag
    return _bott_pair_from_matrix(m, positions, lengths, eps_refs)


def disorder_averaged_bott(
    p: ModelParams,
    lat: LatticeSpec,
    spec: DisorderSpec,
    eps_ref,
    n_samples: int | None = None,
    m_max: int = 2,
    n_jobs: int = 1,
    skip_failures: bool = False,
    _clean=None,
) -> DisorderedBott:
    """Disorder-averaged Bott index with per-sample provenance.

    `eps_ref` may be a single cutoff or a tuple; all cutoffs share one
    eigensolve per sample.  Failed samples abort the run unless
    `skip_failures` is set, in which case they are recorded and excluded.
    """
    eps_refs = tuple(np.atleast_1d(eps_ref).tolist())
    n = spec.n_samples if n_samples is None else int(n_samples)
    if n < 1:
        raise ValueError("need at least one sample")
    clean, positions, lengths = _clean if _clean is not None else _clean_matrix(lat, p, m_max)

    if spec.strength == 0.0:
        res = _bott_pair_from_matrix(clean.copy(), positions, lengths, eps_refs)
        samples = [SampleBott(i, res) for i in range(n)]
        return DisorderedBott(
            mean={e: res[e].raw for e in eps_refs},
            stderr={e: 0.0 for e in eps_refs},
            samples=samples,
            failures=[],
            eps_refs=eps_refs,
            strength=spec.strength,
        )

    def run(i):
        try:
            return i, _one_sample(clean, positions, lengths, lat, p, spec, i, eps_refs, m_max)
        except SingularBottError as exc:
            return i, exc

    outputs = Parallel(n_jobs=n_jobs)(delayed(run)(i) for i in range(n))
    samples, failures = [], []
    for i, res in outputs:
        if isinstance(res, Exception):
            failures.append((i, str(res)))
        else:
            samples.append(SampleBott(i, res))
    if failures and not skip_failures:
        raise SingularBottError(f"samples failed: {failures}")
    if not samples:
        raise SingularBottError("all samples failed")
    mean, stderr = {}, {}
    for e in eps_refs:
        vals = np.array([s.results[e].raw for s in samples])
        mean[e] = float(vals.mean())
        stderr[e] = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
    return DisorderedBott(
        mean=mean,
        stderr=stderr,
        samples=samples,
        failures=failures,
        eps_refs=eps_refs,
        strength=spec.strength,
    )


def bott_disorder_sweep(
    p: ModelParams,
    lat: LatticeSpec,
    base: DisorderSpec,
    strengths,
    eps_refs=None,
    m_max: int = 2,
    n_jobs: int = 1,
    skip_failures: bool = False,
    progress=None,
) -> list[DisorderedBott]:
    """disorder_averaged_bott at each strength, reusing the clean operator."""
    if eps_refs is None:
        eps_refs = (0.0, p.omega / 2.0)
    cached = _clean_matrix(lat, p, m_max)
    out = []
    for wstr in strengths:
        spec = replace(base, strength=float(wstr))
        res = disorder_averaged_bott(
            p, lat, spec, eps_refs, m_max=m_max, n_jobs=n_jobs,
            skip_failures=skip_failures, _clean=cached,
        )
        out.append(res)
        if progress is not None:
            progress(res)
    return out


def sweep_rows(results: list[DisorderedBott], sigma: float) -> list[dict]:
    """Flatten a sweep into (W, sigma, sample, bott_eps0, bott_eps_half) rows."""
    rows = []
    for res in results:
        e0, eh = res.eps_refs
        for s in res.samples:
            rows.append(
                {
                    "W": res.strength,
                    "sigma": sigma,
                    "sample": s.sample_index,
                    "bott_eps0": s.results[e0].raw,
                    "bott_eps_half": s.results[eh].raw,
                }
            )
    return rows


def crossing_strength(strengths, means, level: float = -0.5) -> float | None:
    """First linear-interpolated crossing of `level`, or None if absent."""
    ws = np.asarray(strengths, dtype=float)
    ys = np.asarray(means, dtype=float)
    for i in range(len(ws) - 1):
        y0, y1 = ys[i] - level, ys[i + 1] - level
        if y0 == 0.0:
            return float(ws[i])
        if y0 * y1 < 0.0:
            return float(ws[i] + (ws[i + 1] - ws[i]) * y0 / (y0 - y1))
    if ys[-1] == level:
        return float(ws[-1])
    return None
