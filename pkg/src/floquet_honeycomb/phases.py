"""Clean-system phase structure: analytic boundaries and classification.

Gap closings of the driven lattice happen either at the zone center,
where the drive decouples and the level ladder m*w +- sqrt(mass^2 +
9 t_avg^2) is exact, or at the zone corners, where the static hopping
vanishes and neighboring sectors mix pairwise through the single drive
harmonic.  Both families reduce to one-parameter curves that can be
inverted in closed form; the numeric classifier cross-checks them.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.optimize

from .invariants import GapClosureError, NonIntegerFluxError, _fhs_flux, topo_indices
from .model import (
    ModelParams,
    bloch_drive_blocks,
    bond_vectors,
    build_bloch_blocks,
    dirac_points,
    nnn_vectors,
    reciprocal_vectors,
)

_LABELS = {
    (0, 0): "NI(0,0)",
    (-1, 0): "FTI(-1,0)",
    (1, 0): "FTI(+1,0)",
    (1, -1): "FTI(1,-1)",
    (0, -1): "AFTI(0,-1)",
    (2, -1): "SFTI(2,-1)",
}

SWEEP_COLUMNS = ["A", "B", "Lambda", "C", "W0", "Whalf", "label", "gap0", "gapHalf"]


@dataclass(frozen=True)
class PhaseLabel:
    """Classification outcome: a taxonomy name plus the raw indices and gaps."""

    name: str
    C: int | None
    W0: int | None
    W_half: int | None
    gap_zero: float
    gap_half: float
    closing_at: str | None = None


def label_from_indices(C: int, W_half: int) -> str:
    return _LABELS.get((int(C), int(W_half)), f"other({int(C)},{int(W_half)})")


# ---------------------------------------------------------------- analytic boundaries


def gamma_boundary_g(m: int, p: ModelParams) -> tuple[float, float]:
    """Dimensionless zone-center levels g_+-(m); crossings of 0 or 1/2 mark boundaries."""
    r = float(np.hypot(p.mass / p.omega, 3.0 * p.t_avg / p.omega))
    return m + r, m - r


def dirac_boundary_f(m: int, p: ModelParams) -> dict[tuple[int, int], float]:
    """Zone-corner pair levels for all four sign choices, keyed (outer, mass) sign.

    The sectors mix strictly pairwise at the corners, so these values are
    exact eigenvalues of the truncated operator there, not perturbative.
    """
    out = {}
    for s1 in (1, -1):
        for s2 in (1, -1):
            r = float(np.hypot(0.5 + s2 * p.mass / p.omega, 1.5 * p.t_mod / p.omega))
            out[(s1, s2)] = (m - 0.5) + s1 * r
    return out


def gamma_boundary_curve(m: int, eps_ref: float, lambdas, omega: float = 1.0) -> np.ndarray:
    """t_avg(mass) along which the zone-center gap closes at eps_ref; NaN outside."""
    lam = np.asarray(lambdas, dtype=float)
    rhs = (m * omega - eps_ref) ** 2 - lam**2
    with np.errstate(invalid="ignore"):
        return np.where(rhs >= 0.0, np.sqrt(np.abs(rhs)) / 3.0, np.nan)


def dirac_boundary_curve(
    m: int, eps_ref: float, lambdas, s2: int, omega: float = 1.0
) -> np.ndarray:
    """t_mod(mass) along which a zone-corner pair crosses eps_ref; NaN outside."""
    lam = np.asarray(lambdas, dtype=float)
    rhs = (eps_ref - (m - 0.5) * omega) ** 2 - (omega / 2.0 + s2 * lam) ** 2
    with np.errstate(invalid="ignore"):
        return np.where(rhs >= 0.0, 2.0 * np.sqrt(np.abs(rhs)) / 3.0, np.nan)


def analytic_boundaries(
    lambdas, omega: float = 1.0, m_max: int = 4, eps_refs=None
) -> list[dict]:
    """All boundary curves over the given mass values, as JSON-ready records."""
    if eps_refs is None:
        eps_refs = (0.0, omega / 2.0)
    lam = np.asarray(lambdas, dtype=float)
    curves = []

    def pack(vals):
        return [None if not np.isfinite(v) else float(v) for v in vals]

    for m in range(-m_max, m_max + 2):
        for eps in eps_refs:
            g = gamma_boundary_curve(m, eps, lam, omega)
            if np.isfinite(g).any():
                curves.append(
                    {
                        "kind": "gamma",
                        "axis": "t_avg",
                        "m": m,
                        "eps_ref": float(eps),
                        "mass": lam.tolist(),
                        "value": pack(g),
                    }
                )
            for s2 in (1, -1):
                f = dirac_boundary_curve(m, eps, lam, s2, omega)
                if np.isfinite(f).any():
                    curves.append(
                        {
                            "kind": "dirac",
                            "axis": "t_mod",
                            "m": m,
                            "eps_ref": float(eps),
                            "s2": s2,
                            "mass": lam.tolist(),
                            "value": pack(f),
                        }
                    )
    return curves


def signature_components(m_max: int = 4) -> list[str]:
    """Human-readable labels aligned with boundary_signature() entries."""
    names = []
    for m in range(-m_max, m_max + 2):
        levels = [f"g+(m={m})", f"g-(m={m})"]
        levels += [f"f(s1={s1:+d},s2={s2:+d},m={m})" for s1 in (1, -1) for s2 in (1, -1)]
        for lev in levels:
            for target in ("0", "1/2"):
                names.append(f"{lev} vs {target}")
    return names


def boundary_signature(p: ModelParams, m_max: int = 4) -> tuple:
    """Signs of every g/f level relative to 0 and 1/2.

    Two parameter points lie in the same analytic cell exactly when their
    signatures agree, because each level is monotone in the couplings;
    this gives crossing detection without sampling.
    """
    signs = []
    for m in range(-m_max, m_max + 2):
        gp, gm = gamma_boundary_g(m, p)
        fs = dirac_boundary_f(m, p)
        for val in (gp, gm, *fs.values()):
            for target in (0.0, 0.5):
                signs.append(int(np.sign(val - target)))
    return tuple(signs)


def locate_gamma_closing(
    eps_ref: float,
    mass: float,
    bracket: tuple[float, float],
    omega: float = 1.0,
    m_max: int = 4,
    a: float = 1.0,
    tol: float = 1e-6,
) -> float:
    """Hopping strength where the zone-center spectrum touches eps_ref.

    The minimal gap at the zone center is V-shaped in the hopping, so a
    bracketing minimization pins the closing; the bracket must contain
    exactly one crossing.  Levels often approach eps_ref symmetrically
    from both sides (the signed distance ties), which is why this works
    on the unsigned gap.  The drive amplitude does not enter at the zone
    center; t_mod is tied to t_avg for convenience.
    """

    def gap(t_avg):
        p = ModelParams(t_avg=float(t_avg), t_mod=float(t_avg), mass=mass, omega=omega, a=a)
        w = np.linalg.eigvalsh(build_bloch_blocks(np.zeros(2), p, m_max))
        return float(np.abs(w - eps_ref).min())

    res = scipy.optimize.minimize_scalar(
        gap, bounds=bracket, method="bounded", options={"xatol": 1e-10}
    )
    if gap(res.x) > tol * omega:
        raise ValueError(
            f"no zone-center closing at eps_ref={eps_ref} inside {bracket}: "
            f"residual gap {gap(res.x):.3e}"
        )
    return float(res.x)


# ---------------------------------------------------------------- effective model


@dataclass(frozen=True)
class HaldaneEffective:
    """High-frequency static limit: chiral second-neighbor hopping on top of H_00."""

    params: ModelParams
    nnn_amplitude: float
    critical_mass: float

    def bloch(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        h0, _, _ = bloch_drive_blocks(k, self.params)
        bvecs = nnn_vectors(self.params.a)
        sz_term = -2.0 * self.nnn_amplitude * float(np.sin(bvecs @ k).sum())
        return h0 + sz_term * np.diag([1.0, -1.0])

    def chern_lower_band(self, grid: int = 48) -> int:
        g1, g2 = reciprocal_vectors(self.params.a)
        a0 = bond_vectors(self.params.a)[0]
        F = np.empty((grid, grid, 2, 1), dtype=complex)
        for i in range(grid):
            for j in range(grid):
                k = (i * g1 + j * g2) / grid
                _, v = np.linalg.eigh(self.bloch(k))
                vec = v[:, :1].copy()
                vec[1] *= np.exp(1j * (k @ a0))
                F[i, j] = vec
        total = float(_fhs_flux(F).sum() / (2.0 * np.pi))
        if abs(total - round(total)) > 0.01:
            raise NonIntegerFluxError(f"effective-model flux {total:.4f} not integer")
        return int(round(total))


def haldane_effective(p: ModelParams) -> HaldaneEffective:
    """Leading high-frequency reduction of the driven model.

    Valid deep in the fast-drive regime; outside it the truncated-space
    invariants are the authority and a warning is issued.
    """
    if max(p.t_avg, p.t_mod) > 0.2 * p.omega:
        warnings.warn(
            "hoppings are not small against the drive frequency; the static "
            "reduction is qualitative at best",
            stacklevel=2,
        )
    t2 = np.sqrt(3.0) * p.t_mod**2 / (4.0 * p.omega)
    return HaldaneEffective(
        params=p,
        nnn_amplitude=float(t2),
        critical_mass=float(9.0 * p.t_mod**2 / (4.0 * p.omega)),
    )


# ---------------------------------------------------------------- classification


def min_gap_scan(
    p: ModelParams, eps_ref: float, m_max: int = 4, grid: int = 48
) -> tuple[float, np.ndarray]:
    """Minimal |quasienergy - eps_ref| over the BZ mesh and where it occurs."""
    g1, g2 = reciprocal_vectors(p.a)
    best = (np.inf, None)
    for i in range(grid):
        for j in range(grid):
            k = (i * g1 + j * g2) / grid
            w = np.linalg.eigvalsh(build_bloch_blocks(k, p, m_max))
            d = float(np.abs(w - eps_ref).min())
            if d < best[0]:
                best = (d, k)
    return best


def _name_k_point(k: np.ndarray, a: float, tol: float) -> str:
    g1, g2 = reciprocal_vectors(a)
    images = [i * g1 + j * g2 for i in (-1, 0, 1) for j in (-1, 0, 1)]
    def dist(target):
        return min(np.linalg.norm(k - target - im) for im in images)
    if dist(np.zeros(2)) < tol:
        return "Gamma"
    kpts = dirac_points(a)
    if dist(kpts[0]) < tol:
        return "K"
    if dist(kpts[1]) < tol:
        return "K'"
    return f"k=({k[0]:.4f},{k[1]:.4f})"


def classify_clean(
    p: ModelParams, m_max: int = 4, grid: int = 48, gap_tol: float | None = None
) -> PhaseLabel:
    """Phase label from (C, W_half), or a boundary report when a gap is closed."""
    if gap_tol is None:
        gap_tol = 1e-7 * p.omega
    half = p.omega / 2.0
    g0, k0 = min_gap_scan(p, 0.0, m_max, grid)
    gh, kh = min_gap_scan(p, half, m_max, grid)
    k_tol = 2.0 * np.pi / (grid * p.a)
    if min(g0, gh) < gap_tol:
        gap, k = (g0, k0) if g0 <= gh else (gh, kh)
        return PhaseLabel(
            name="boundary",
            C=None,
            W0=None,
            W_half=None,
            gap_zero=g0,
            gap_half=gh,
            closing_at=_name_k_point(k, p.a, k_tol),
        )
    try:
        ti = topo_indices(p, m_max=m_max, grid=grid)
    except GapClosureError as exc:
        where = _name_k_point(exc.k, p.a, k_tol) if exc.k is not None else "unknown"
        return PhaseLabel(
            name="boundary",
            C=None,
            W0=None,
            W_half=None,
            gap_zero=g0,
            gap_half=gh,
            closing_at=where,
        )
    return PhaseLabel(
        name=label_from_indices(ti.C, ti.W_half),
        C=ti.C,
        W0=ti.W0,
        W_half=ti.W_half,
        gap_zero=g0,
        gap_half=gh,
    )


# ---------------------------------------------------------------- sweeps


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _row_key(row: dict) -> tuple[str, str, str]:
    return (_fmt(row["Lambda"]), _fmt(row["A"]), _fmt(row["B"]))


def _load_sweep_csv(path: Path) -> dict:
    done = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            parsed = {
                "A": float(row["A"]),
                "B": float(row["B"]),
                "Lambda": float(row["Lambda"]),
                "C": int(row["C"]) if row["C"] else None,
                "W0": int(row["W0"]) if row["W0"] else None,
                "Whalf": int(row["Whalf"]) if row["Whalf"] else None,
                "label": row["label"],
                "gap0": float(row["gap0"]) if row["gap0"] else None,
                "gapHalf": float(row["gapHalf"]) if row["gapHalf"] else None,
            }
            done[_row_key(parsed)] = parsed
    return done


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(rows, key=lambda r: (r["Lambda"], r["A"], r["B"]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in ordered:
            w.writerow(
                [
                    _fmt(r["A"]),
                    _fmt(r["B"]),
                    _fmt(r["Lambda"]),
                    "" if r["C"] is None else int(r["C"]),
                    "" if r["W0"] is None else int(r["W0"]),
                    "" if r["Whalf"] is None else int(r["Whalf"]),
                    r["label"],
                    "" if r.get("gap0") is None else _fmt(r["gap0"]),
                    "" if r.get("gapHalf") is None else _fmt(r["gapHalf"]),
                ]
            )


def sweep_phase_diagram(
    a_values,
    lambda_values,
    b_values=None,
    m_max: int = 4,
    grid: int = 48,
    omega: float = 1.0,
    a: float = 1.0,
    out_path: str | Path | None = None,
    progress=None,
) -> list[dict]:
    """Classify every (t_avg, mass) grid point; failures are recorded, not fatal.

    With `out_path` the sweep is resumable: already-present points are
    kept as-is and only missing ones are computed, so rerunning an
    interrupted sweep is idempotent.
    """
    a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
    lambda_values = np.atleast_1d(np.asarray(lambda_values, dtype=float))
    if a_values.size == 0 or lambda_values.size == 0:
        if out_path is not None:
            write_sweep_csv([], out_path)
        return []
    if b_values is None:
        b_list = a_values
    elif np.isscalar(b_values):
        b_list = np.full(a_values.size, float(b_values))
    else:
        b_list = np.asarray(b_values, dtype=float)
        if b_list.size != a_values.size:
            raise ValueError("b_values must be a scalar or match a_values")
    done = {}
    if out_path is not None and Path(out_path).exists():
        done = _load_sweep_csv(Path(out_path))
    rows = []
    for lam in lambda_values:
        for av, bv in zip(a_values, b_list):
            probe = {"A": av, "B": bv, "Lambda": lam}
            key = _row_key(probe)
            if key in done:
                rows.append(done[key])
                continue
            p = ModelParams(t_avg=av, t_mod=bv, mass=lam, omega=omega, a=a)
            try:
                lab = classify_clean(p, m_max=m_max, grid=grid)
                name = lab.name if lab.closing_at is None else f"boundary({lab.closing_at})"
                row = {
                    "A": av,
                    "B": bv,
                    "Lambda": lam,
                    "C": lab.C,
                    "W0": lab.W0,
                    "Whalf": lab.W_half,
                    "label": name,
                    "gap0": lab.gap_zero,
                    "gapHalf": lab.gap_half,
                }
            except (GapClosureError, NonIntegerFluxError) as exc:
                row = {
                    "A": av,
                    "B": bv,
                    "Lambda": lam,
                    "C": None,
                    "W0": None,
                    "Whalf": None,
                    "label": f"failed({type(exc).__name__})",
                    "gap0": None,
                    "gapHalf": None,
                }
            rows.append(row)
            if progress is not None:
                progress(row)
    if out_path is not None:
        write_sweep_csv(rows, out_path)
    return rows
