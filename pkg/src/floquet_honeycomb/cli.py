"""Batch front end: presets, config files, and manifest-tracked runs.

Every invocation resolves to a :class:`RunConfig`, a plain serializable
record of the whole computation.  The config (minus the output
directory) is hashed, and the hash is written into ``manifest.json``
next to the artifacts; re-running with an unchanged config against a
completed output directory is a no-op.  Row order in every CSV is fixed
by sorting on the task key, never by completion order, so serial and
parallel runs of the same config produce identical files.

Exit codes: 0 on success, 2 for configuration errors (unknown preset,
empty sweep axes, contradictory flags), 3 when the computation itself
fails; in the last case the manifest records the error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from . import __version__
from .born import (
    ANALYSIS_POINTS,
    NearSingularError,
    analysis_point,
    bond_kernel_factor,
    born_coefficients,
    born_critical_disorder,
    born_shifted_boundaries,
)
from .disorder import DisorderSpec, covariance_table, sample_fields, write_covariance_csv
from .dynamics import chirality_fit, evolve_wavepacket
from .invariants import (
    GapClosureError,
    SingularBottError,
    bott_disorder_sweep,
    crossing_strength,
    sweep_rows,
)
from .model import LatticeSpec, ModelParams, build_ribbon_bloch
from .phases import analytic_boundaries, sweep_phase_diagram

SCHEMA_VERSION = 1

SUBCOMMANDS = (
    "phase-diagram",
    "bott-sweep",
    "born-report",
    "ribbon-spectrum",
    "dynamics",
    "disorder-stats",
)

#: errors that mean "the run was configured fine but the numerics gave up"
_NUMERICAL_ERRORS = (
    GapClosureError,
    SingularBottError,
    NearSingularError,
    np.linalg.LinAlgError,
    RuntimeError,
    FloatingPointError,
)


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class RunConfig:
    """Fully serializable description of one batch run.

    ``extras`` carries the subcommand-specific knobs (sweep axes, period
    counts, scan windows); everything JSON-representable is allowed
    there.  ``out_dir`` is excluded from the config hash so the same
    computation written to two places is recognized as the same run.
    """

    subcommand: str
    model: ModelParams
    lattice: LatticeSpec
    disorder: DisorderSpec | None = None
    m_max: int = 2
    k_grid: int = 48
    n_samples: int = 10
    seed: int = 0
    out_dir: str = "runs/out"
    preset: str | None = None
    scale: str = "desk"
    extras: dict = field(default_factory=dict)
    schema: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        schema = d.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ValueError(f"config schema {schema} not supported (expected {SCHEMA_VERSION})")
        d["model"] = ModelParams(**d["model"])
        d["lattice"] = LatticeSpec(**d["lattice"])
        if d.get("disorder") is not None:
            d["disorder"] = DisorderSpec(**d["disorder"])
        return cls(**d)


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical config JSON, ignoring the output path."""
    d = cfg.to_dict()
    d.pop("out_dir")
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | Path) -> RunConfig:
    with open(path) as fh:
        return RunConfig.from_dict(json.load(fh))


# ------------------------------------------------------------------ presets

_DESK_STRENGTHS = [0.02, 0.04, 0.06, 0.075, 0.09, 0.13, 0.2]
_PAPER_STRENGTHS = [round(0.02 * i, 10) for i in range(1, 11)]


def _bott_preset(point: str, scale: str, seed: int) -> RunConfig:
    p, _ = analysis_point(point)
    desk = scale == "desk"
    lat = LatticeSpec(20, 20, "torus") if desk else LatticeSpec(29, 34, "torus")
    n_samples = 10 if desk else 30
    return RunConfig(
        subcommand="bott-sweep",
        model=p,
        lattice=lat,
        disorder=DisorderSpec(strength=0.0, mode="uncorrelated", n_samples=n_samples, seed=seed),
        m_max=2,
        n_samples=n_samples,
        seed=seed,
        preset=point,
        scale=scale,
        extras={
            "strengths": list(_DESK_STRENGTHS if desk else _PAPER_STRENGTHS),
            "corr_lens": [0.0, 1.0] if desk else [0.0, 0.5, 1.0, 2.0],
        },
    )


def _born_preset(point: str, scale: str, seed: int) -> RunConfig:
    p, eps_ref = analysis_point(point)
    desk = scale == "desk"
    return RunConfig(
        subcommand="born-report",
        model=p,
        lattice=LatticeSpec(2, 2, "torus"),  # unused; the analysis is in momentum space
        m_max=2,
        k_grid=96 if desk else 192,
        seed=seed,
        preset=f"{point}-born",
        scale=scale,
        extras={
            "eps_ref": eps_ref,
            "corr_lens": [0.0, 0.5, 1.0, 2.0],
            "w_max": 0.2,
            "n_scan": 200,
        },
    )


def _phase_diagram_preset(scale: str, seed: int) -> RunConfig:
    desk = scale == "desk"
    if desk:
        a_values = [round(0.02 * i, 10) for i in range(1, 21)]
        lambda_values = [0.0, 0.1, 0.2, 0.3]
        m_max, grid = 3, 32
    else:
        a_values = [round(0.01 * i, 10) for i in range(1, 41)]
        lambda_values = [round(0.02 * i, 10) for i in range(0, 16)]
        m_max, grid = 4, 48
    return RunConfig(
        subcommand="phase-diagram",
        model=ModelParams(t_avg=a_values[0], t_mod=a_values[0]),
        lattice=LatticeSpec(2, 2, "torus"),  # unused; classification runs on Bloch grids
        m_max=m_max,
        k_grid=grid,
        seed=seed,
        preset="clean-phase-diagram",
        scale=scale,
        extras={"a_values": a_values, "lambda_values": lambda_values},
    )


def _dynamics_preset(point: str, scale: str, seed: int) -> RunConfig:
    params = {
        "afti-dynamics": ModelParams(t_avg=0.25, t_mod=0.25),
        "sfti-dynamics": ModelParams(t_avg=0.4, t_mod=0.25, mass=0.3),
    }[point]
    desk = scale == "desk"
    return RunConfig(
        subcommand="dynamics",
        model=params,
        lattice=LatticeSpec(60, 17, "ribbon"),
        seed=seed,
        preset=point,
        scale=scale,
        extras={
            "n_periods": 20 if desk else 40,
            "n_steps": 128,
            "frames_per_period": 1 if desk else 4,
        },
    )


def _ribbon_preset(point: str, scale: str, seed: int) -> RunConfig:
    params = {
        "afti-ribbon": ModelParams(t_avg=0.25, t_mod=0.25),
        "sfti-ribbon": ModelParams(t_avg=0.4, t_mod=0.25, mass=0.3),
    }[point]
    return RunConfig(
        subcommand="ribbon-spectrum",
        model=params,
        lattice=LatticeSpec(2, 17, "ribbon"),  # nx is irrelevant: kx is a free parameter
        m_max=4,
        seed=seed,
        preset=point,
        scale=scale,
        extras={"n_kx": 121 if scale == "desk" else 241},
    )


def _speckle_preset(scale: str, seed: int) -> RunConfig:
    desk = scale == "desk"
    n_samples = 100 if desk else 400
    return RunConfig(
        subcommand="disorder-stats",
        model=ModelParams(t_avg=0.25, t_mod=0.25),  # unused; the statistics are model-free
        lattice=LatticeSpec(24, 24, "torus"),
        disorder=DisorderSpec(strength=0.1, mode="uncorrelated", n_samples=n_samples, seed=seed),
        n_samples=n_samples,
        seed=seed,
        preset="speckle-stats",
        scale=scale,
        extras={"corr_lens": [0.0, 0.5, 1.0]},
    )


_PRESETS: dict[str, str] = {
    "P1": "disorder-averaged Bott sweep at the gap-omega/2 point below A=1/6",
    "P1p": "Bott sweep at the staggered-mass variant of P1",
    "P2": "Bott sweep at the gap-zero point above A=1/3",
    "P3": "Bott sweep at the staggered-mass point below the A=0.8/3 boundary",
    "P1-born": "lowest-order disorder report at P1",
    "P1p-born": "lowest-order disorder report at P1'",
    "P2-born": "lowest-order disorder report at P2",
    "P3-born": "lowest-order disorder report at P3",
    "clean-phase-diagram": "phase map over the drive amplitude and the staggered mass",
    "afti-dynamics": "edge wavepacket in the anomalous phase (ribbon)",
    "sfti-dynamics": "edge wavepacket in the staggered phase (ribbon)",
    "afti-ribbon": "quasienergy ribbon spectrum, anomalous phase",
    "sfti-ribbon": "quasienergy ribbon spectrum, staggered phase",
    "speckle-stats": "covariance check of the disorder generator",
}


def _normalize_preset(name: str) -> str:
    key = name.strip().replace("′", "p").replace("'", "p")
    for known in _PRESETS:
        if key.lower() == known.lower():
            return known
    raise KeyError(f"unknown preset {name!r}; see 'preset list'")


def resolve_preset(name: str, scale: str = "desk", seed: int = 0) -> RunConfig:
    """Build the RunConfig for a named preset at the given scale."""
    if scale not in ("desk", "paper"):
        raise ValueError(f"scale must be 'desk' or 'paper', got {scale!r}")
    key = _normalize_preset(name)
    if key in ("P1", "P1p", "P2", "P3"):
        return _bott_preset(key, scale, seed)
    if key.endswith("-born"):
        return _born_preset(key[:-5], scale, seed)
    if key == "clean-phase-diagram":
        return _phase_diagram_preset(scale, seed)
    if key.endswith("-dynamics"):
        return _dynamics_preset(key, scale, seed)
    if key.endswith("-ribbon"):
        return _ribbon_preset(key, scale, seed)
    return _speckle_preset(scale, seed)


_DEFAULT_PRESET = {
    "phase-diagram": "clean-phase-diagram",
    "bott-sweep": "P1",
    "born-report": "P1-born",
    "ribbon-spectrum": "afti-ribbon",
    "dynamics": "afti-dynamics",
    "disorder-stats": "speckle-stats",
}


# ------------------------------------------------------------------ output helpers


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, cols: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out: Path, cfg: RunConfig, status: str, t0: float, outputs: list[str],
                    solved: dict, error: str | None = None) -> None:
    manifest = {
        "schema": cfg.schema,
        "subcommand": cfg.subcommand,
        "preset": cfg.preset,
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "code_version": __version__,
        "seeds": {"master": cfg.seed},
        "wall_time_s": round(time.time() - t0, 3),
        "outputs": sorted(outputs),
        "solved": solved,
        "status": status,
        "error": error,
    }
    _write_json(out / "manifest.json", manifest)


def _completed(out: Path, cfg: RunConfig) -> bool:
    """True when a finished run with this exact config already sits in `out`."""
    path = out / "manifest.json"
    if not path.exists():
        return False
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return False
    return manifest.get("status") == "ok" and manifest.get("config_hash") == config_hash(cfg)


# ------------------------------------------------------------------ runners


def _run_phase_diagram(cfg: RunConfig, out: Path, workers: int) -> tuple[list[str], dict]:
    a_values = [float(x) for x in cfg.extras["a_values"]]
    lambda_values = [float(x) for x in cfg.extras["lambda_values"]]
    b_values = cfg.extras.get("b_values")
    rows = sweep_phase_diagram(
        a_values,
        lambda_values,
        b_values=b_values,
        m_max=cfg.m_max,
        grid=cfg.k_grid,
        omega=cfg.model.omega,
        a=cfg.model.a,
        out_path=out / "phase_map.csv",
    )
    bounds = analytic_boundaries(lambda_values, omega=cfg.model.omega, m_max=cfg.m_max)
    _write_json(out / "boundaries.json", bounds)
    counts: dict[str, int] = {}
    for r in rows:
        counts[r["label"]] = counts.get(r["label"], 0) + 1
    return ["phase_map.csv", "boundaries.json"], {"points": len(rows), "label_counts": counts}


def _run_bott_sweep(cfg: RunConfig, out: Path, workers: int) -> tuple[list[str], dict]:
    strengths = [float(w) for w in cfg.extras["strengths"]]
    corr_lens = [float(s) for s in cfg.extras["corr_lens"]]
    eps_half = cfg.model.omega / 2.0
    sample_rows: list[dict] = []
    mean_rows: list[dict] = []
    solved: dict = {}
    for sigma in corr_lens:
        if sigma > 0.0:
            base = DisorderSpec(strength=max(strengths), corr_len=sigma, mode="correlated",
                                n_samples=cfg.n_samples, seed=cfg.seed)
        else:
            base = DisorderSpec(strength=max(strengths), mode="uncorrelated",
                                n_samples=cfg.n_samples, seed=cfg.seed)
        results = bott_disorder_sweep(
            cfg.model, cfg.lattice, base, strengths,
            m_max=cfg.m_max, n_jobs=workers, skip_failures=True,
        )
        sample_rows.extend(sweep_rows(results, sigma))
        for res in results:
            mean_rows.append({
                "W": res.strength,
                "sigma": sigma,
                "mean_eps0": res.mean[0.0],
                "stderr_eps0": res.stderr[0.0],
                "mean_eps_half": res.mean[eps_half],
                "stderr_eps_half": res.stderr[eps_half],
                "n_samples": len(res.samples),
                "n_failures": len(res.failures),
            })
        for eps, tag in ((0.0, "eps0"), (eps_half, "eps_half")):
            wc = crossing_strength(strengths, [res.mean[eps] for res in results])
            solved[f"crossing_{tag}_sigma_{sigma:g}"] = wc
    sample_rows.sort(key=lambda r: (r["sigma"], r["W"], r["sample"]))
    mean_rows.sort(key=lambda r: (r["sigma"], r["W"]))
    _write_csv(out / "bott_samples.csv",
               ["W", "sigma", "sample", "bott_eps0", "bott_eps_half"], sample_rows)
    _write_csv(out / "bott_mean.csv",
               ["W", "sigma", "mean_eps0", "stderr_eps0", "mean_eps_half", "stderr_eps_half",
                "n_samples", "n_failures"], mean_rows)
    return ["bott_samples.csv", "bott_mean.csv"], solved


def _run_born_report(cfg: RunConfig, out: Path, workers: int) -> tuple[list[str], dict]:
    p = cfg.model
    eps_ref = float(cfg.extras["eps_ref"])
    corr_lens = [float(s) for s in cfg.extras["corr_lens"]]
    w_max = float(cfg.extras.get("w_max", 0.2))
    n_scan = int(cfg.extras.get("n_scan", 200))
    coeffs = born_coefficients(p, eps_ref, m_max=cfg.m_max, k_grid=cfg.k_grid)
    report: dict = {
        "inputs": {
            "model": dataclasses.asdict(p),
            "eps_ref": eps_ref,
            "m_max": cfg.m_max,
            "k_grid": cfg.k_grid,
        },
        "coefficients": {
            "note": "dOmega = c_omega W^2; dLambda = c_lambda W^2; "
                    "dA = c_A W^2 F(sigma); dB = c_B W^2 F(sigma)",
            "c_omega": coeffs.c_omega,
            "c_lambda": coeffs.c_lambda,
            "c_A": coeffs.c_A,
            "c_B_real": coeffs.c_B.real,
            "c_B_imag": coeffs.c_B.imag,
        },
        "bond_kernel_factor": {f"{s:g}": bond_kernel_factor(s, p.a) for s in corr_lens},
        "mass_sign_change": {},
        "boundary_scan": {},
    }
    solved: dict = {}
    for sigma in corr_lens:
        key = f"{sigma:g}"
        # the sign-change root applies to the zero-offset family only
        if p.mass != 0.0:
            report["mass_sign_change"][key] = {"not_applicable": "staggered offset present"}
        else:
            try:
                wc = born_critical_disorder(p.t_avg, sigma, omega=p.omega, a=p.a, w_max=w_max)
                report["mass_sign_change"][key] = wc
            except ValueError as e:
                report["mass_sign_change"][key] = {"not_applicable": str(e)}
        scan = born_shifted_boundaries(
            p, eps_ref=eps_ref, corr_len=sigma, coeffs=coeffs,
            w_max=w_max, n_scan=n_scan, m_max=cfg.m_max, k_grid=cfg.k_grid,
        )
        report["boundary_scan"][key] = {
            "crossing_W": scan.crossing_W,
            "level": scan.level,
            "w_max": scan.w_max,
        }
        solved[f"boundary_crossing_sigma_{key}"] = scan.crossing_W
    _write_json(out / "born_report.json", report)
    return ["born_report.json"], solved


def _run_ribbon_spectrum(cfg: RunConfig, out: Path, workers: int) -> tuple[list[str], dict]:
    lat = cfg.lattice
    p = cfg.model
    n_kx = int(cfg.extras["n_kx"])
    lx = np.sqrt(3.0) * p.a
    kxs = np.linspace(0.0, 2.0 * np.pi / lx, n_kx)
    half = p.omega / 2.0
    n_y = 2 * lat.ny
    rows: list[dict] = []
    for kx in kxs:
        h = build_ribbon_bloch(kx, lat, p, m_max=cfg.m_max)
        vals, vecs = scipy.linalg.eigh(h)
        keep = np.abs(vals) <= half + 1e-12
        # transverse profile: sum the |psi|^2 copies over the frequency sectors
        prob = np.abs(vecs[:, keep]) ** 2
        prob = prob.reshape(-1, n_y, keep.sum()).sum(axis=0)
        w_bottom = prob[:6].sum(axis=0)
        w_top = prob[-6:].sum(axis=0)
        for e, wb, wt in zip(vals[keep], w_bottom, w_top):
            rows.append({"kx": float(kx), "eps": float(e),
                         "weight_bottom": float(wb), "weight_top": float(wt)})
    rows.sort(key=lambda r: (r["kx"], r["eps"]))
    _write_csv(out / "ribbon_spectrum.csv",
               ["kx", "eps", "weight_bottom", "weight_top"], rows)
    return ["ribbon_spectrum.csv"], {"n_kx": n_kx, "states": len(rows)}


def _run_dynamics(cfg: RunConfig, out: Path, workers: int) -> tuple[list[str], dict]:
    lat = cfg.lattice
    n_periods = int(cfg.extras["n_periods"])
    n_steps = int(cfg.extras.get("n_steps", 128))
    frames = int(cfg.extras.get("frames_per_period", 1))
    initial = cfg.extras.get("initial_site")
    if initial is None:
        initial = lat.site_index(0, lat.nx // 2, 1)  # red site, mid bottom edge
    disorder = None
    if cfg.disorder is not None and cfg.disorder.strength > 0.0:
        disorder = sample_fields(lat, cfg.disorder, a=cfg.model.a)[0]
    h = evolve_wavepacket(
        int(initial), n_periods, lat, cfg.model,
        disorder=disorder, n_steps=n_steps, frames_per_period=frames,
    )
    fit = chirality_fit(h)
    edge_rows = [
        {"t": float(t), "x": float(x), "rho": float(v)}
        for f, t in enumerate(h.times)
        for x, v in zip(h.x_grid, h.rho_edge[f])
    ]
    total_rows = [
        {"t": float(t), "x": float(x), "rho": float(v)}
        for f, t in enumerate(h.times)
        for x, v in zip(h.x_grid, h.rho_total[f])
    ]
    _write_csv(out / "rho_edge.csv", ["t", "x", "rho"], edge_rows)
    _write_csv(out / "rho_total.csv", ["t", "x", "rho"], total_rows)
    solved = {
        "chirality": fit.value,
        "chirality_stderr": fit.stderr,
        "degenerate": fit.degenerate,
        "initial_site": int(initial),
        "n_steps": n_steps,
    }
    return ["rho_edge.csv", "rho_total.csv"], solved


def _run_disorder_stats(cfg: RunConfig, out: Path, workers: int) -> tuple[list[str], dict]:
    lat = cfg.lattice
    a = cfg.model.a
    corr_lens = [float(s) for s in cfg.extras["corr_lens"]]
    strength = cfg.disorder.strength if cfg.disorder is not None else 0.1
    outputs: list[str] = []
    solved: dict = {}
    for sigma in corr_lens:
        # displacements run along y, where the site rows sit on a 0.5a grid
        if sigma > 0.0:
            spec = DisorderSpec(strength=strength, corr_len=sigma, mode="correlated",
                                n_samples=cfg.n_samples, seed=cfg.seed)
            disp = [(0.0, 0.0), (0.0, a), (0.0, 2 * a)]
            if 2 * sigma not in (a, 2 * a):
                disp.append((0.0, 2 * sigma))
        else:
            spec = DisorderSpec(strength=strength, mode="uncorrelated",
                                n_samples=cfg.n_samples, seed=cfg.seed)
            disp = [(0.0, 0.0), (0.0, a), (0.0, 2 * a)]
        fields = sample_fields(lat, spec, a=a)
        rows = covariance_table(fields, lat, disp, strength, sigma, a=a)
        name = f"covariance_sigma_{sigma:g}.csv"
        write_covariance_csv(rows, out / name)
        outputs.append(name)
        dev = max(abs(r["estimate"] - r["target"]) / r["stderr"] for r in rows if r["stderr"] > 0)
        solved[f"max_deviation_se_sigma_{sigma:g}"] = dev
    return outputs, solved


_RUNNERS = {
    "phase-diagram": _run_phase_diagram,
    "bott-sweep": _run_bott_sweep,
    "born-report": _run_born_report,
    "ribbon-spectrum": _run_ribbon_spectrum,
    "dynamics": _run_dynamics,
    "disorder-stats": _run_disorder_stats,
}

#: extras keys that hold sweep axes; an empty axis is a config error
_AXIS_KEYS = ("strengths", "corr_lens", "a_values", "lambda_values")


def run(cfg: RunConfig, workers: int = 1) -> int:
    """Execute a resolved config; returns the process exit code."""
    if cfg.subcommand not in _RUNNERS:
        print(f"error: unknown subcommand {cfg.subcommand!r}", file=sys.stderr)
        return 2
    for key in _AXIS_KEYS:
        if key in cfg.extras and len(cfg.extras[key]) == 0:
            print(f"error: sweep axis {key!r} is empty", file=sys.stderr)
            return 2
    out = Path(cfg.out_dir)
    if _completed(out, cfg):
        print(f"{out}: up to date (config hash matches), skipping")
        return 0
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    try:
        outputs, solved = _RUNNERS[cfg.subcommand](cfg, out, workers)
    except (KeyError, ValueError) as e:
        # bad extras, wrong lattice kind for the subcommand, and similar
        msg = e.args[0] if e.args else str(e)
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as e:
        _write_manifest(out, cfg, "error", t0, [], {}, error=f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 3
    _write_manifest(out, cfg, "ok", t0, outputs + ["manifest.json"], solved)
    for name in sorted(outputs):
        print(f"wrote {out / name}")
    return 0


# ------------------------------------------------------------------ argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="floquet-honeycomb",
        description="Driven honeycomb lattice: phase maps, disorder-averaged "
                    "invariants, and edge dynamics.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True, metavar="subcommand")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=_PRESETS[_DEFAULT_PRESET[name]])
        sp.add_argument("--config", help="JSON run config (mutually exclusive with --preset)")
        sp.add_argument("--preset", help="named preset; see 'preset list'")
        sp.add_argument("--out", help="output directory (default runs/<subcommand>)")
        sp.add_argument("--workers", type=int, default=1,
                        help="worker processes for sample-parallel sweeps")
        sp.add_argument("--seed", type=int, default=None, help="master RNG seed")
        sp.add_argument("--scale", choices=("desk", "paper"), default="desk",
                        help="preset sizing: quick desk check or full-size run")
    pp = sub.add_parser("preset", help="list presets or show one as JSON")
    pp.add_argument("action", choices=("list", "show"))
    pp.add_argument("name", nargs="?", help="preset name (for 'show')")
    pp.add_argument("--scale", choices=("desk", "paper"), default="desk")
    pp.add_argument("--seed", type=int, default=0)
    return ap


def _handle_preset(ns: argparse.Namespace) -> int:
    if ns.action == "list":
        width = max(len(k) for k in _PRESETS)
        for name, desc in _PRESETS.items():
            print(f"{name:<{width}}  {desc}")
        return 0
    if not ns.name:
        print("error: 'preset show' needs a preset name", file=sys.stderr)
        return 2
    try:
        cfg = resolve_preset(ns.name, scale=ns.scale, seed=ns.seed)
    except KeyError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return 2
    print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.subcommand == "preset":
        return _handle_preset(ns)
    if ns.config and ns.preset:
        print("error: --config and --preset are mutually exclusive", file=sys.stderr)
        return 2
    try:
        if ns.config:
            cfg = load_config(ns.config)
        else:
            preset = ns.preset or _DEFAULT_PRESET[ns.subcommand]
            cfg = resolve_preset(preset, scale=ns.scale, seed=ns.seed or 0)
    except (OSError, KeyError, TypeError, ValueError) as e:
        msg = e.args[0] if e.args else str(e)
        print(f"error: {msg}", file=sys.stderr)
        return 2
    if cfg.subcommand != ns.subcommand:
        print(f"error: config is for {cfg.subcommand!r}, invoked as {ns.subcommand!r}",
              file=sys.stderr)
        return 2
    if ns.seed is not None:
        cfg = dataclasses.replace(cfg, seed=ns.seed)
        if cfg.disorder is not None:
            cfg = dataclasses.replace(cfg, disorder=dataclasses.replace(cfg.disorder, seed=ns.seed))
    if ns.out:
        cfg = dataclasses.replace(cfg, out_dir=ns.out)
    elif cfg.out_dir == "runs/out":
        cfg = dataclasses.replace(cfg, out_dir=f"runs/{cfg.preset or cfg.subcommand}")
    return run(cfg, workers=ns.workers)


if __name__ == "__main__":
    sys.exit(main())
