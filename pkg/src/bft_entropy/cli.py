"""
Command-line front end.

Every subcommand reads one JSON config (see ``bft_entropy.config``) and
writes CSV files to ``--out`` (default: $BFT_ENTROPY_OUT or the current
directory). Each file starts with a ``#`` provenance line. Floats are
written with 17 significant digits so that identical inputs give
byte-identical files.

Exit codes: 0 success, 2 configuration or guard error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from . import correlators as corr
from . import entropy as ent
from . import lattice_oracle as oracle
from . import replica_smatrix as rep
from .config import ConfigError, RunConfig, load_config
from .quadrature import QuadratureError
from .state import BranchRiskError, QuenchValidationError

SCHEMA_VERSION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
CONFIG_ERRORS = (ConfigError, oracle.RevivalGuardError, BranchRiskError, QuenchValidationError)
NUMERIC_ERRORS = (QuadratureError, rep.ReplicaConsistencyError, FloatingPointError,
                  np.linalg.LinAlgError, ValueError)


# output -----------------------------------------------------------------------
def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class Emitter:
    """Writes CSV and JSON files with a shared provenance line."""

    def __init__(self, out: Path, cfg: RunConfig, command: str, extra: dict | None = None):
        self.out = out
        self.out.mkdir(parents=True, exist_ok=True)
        fields = {"tool": f"bft_entropy {__version__}", "config": cfg.digest or "none",
                  "command": command, "rtol": fmt(cfg.quadrature.rtol), "seed": cfg.seed}
        fields.update(extra or {})
        self.provenance = " ".join(f"{k}={v}" for k, v in fields.items())
        self.written: list[Path] = []

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence], notes: Sequence[str] = ()) -> Path:
        path = self.out / name
        lines = [f"# {self.provenance}"] + [f"# {n}" for n in notes] + [",".join(header)]
        lines += [",".join(fmt(v) for v in row) for row in rows]
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        self.written.append(path)
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.out / name
        body = {"schema_version": SCHEMA_VERSION, "provenance": self.provenance, **payload}
        with open(path, "w", newline="\n") as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.written.append(path)
        return path


def pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _domain_tag(lo: float, hi: float) -> str:
    return f"{fmt(lo)}:{fmt(hi)}"


def _integer_alphas(cfg: RunConfig) -> list[int]:
    bad = [a for a in cfg.alphas if a != int(a) or a < 2]
    if bad:
        raise ConfigError(f"sector decompositions need integer alphas >= 2, got {bad}")
    return [int(a) for a in cfg.alphas]


# subcommands ------------------------------------------------------------------
def cmd_gge_entropy(cfg: RunConfig, args) -> int:
    state = cfg.build_state(args.allow_branch_risk)
    rtol = cfg.quadrature.rtol
    rows = pmap(lambda a: (a, ent.renyi_rate_space(state, a, rtol), ent.renyi_rate_time(state, a, rtol)),
                list(cfg.alphas), args.threads)
    em = Emitter(args.out, cfg, "gge-entropy", {"theta": _domain_tag(*state.domain())})
    em.csv("gge_entropy.csv", ["alpha", "rate_space", "rate_time"], rows)
    return 0


def cmd_quench_compare(cfg: RunConfig, args) -> int:
    spec = cfg.build_quench()
    L, ell = cfg.oracle.L, cfg.oracle.ell
    times = np.asarray(cfg.grids.t) if cfg.grids.t else None
    em = Emitter(args.out, cfg, "quench-compare",
                 {"theta": _domain_tag(*spec.domain()), "L": L, "ell": ell,
                  "guards": "ell<=L/4,t<=L/(4vmax)"})
    summary = {}
    for alpha in cfg.alphas:
        cmp = oracle.quench_comparison(spec, L, ell, alpha, times, allow_branch_risk=args.allow_branch_risk)
        rows = zip(cmp.times, cmp.profile, cmp.exact, cmp.relative_gap)
        em.csv(f"quench_compare_alpha{fmt(alpha)}.csv", ["t", "S_bft", "S_exact", "relative_gap"], rows)
        summary[fmt(alpha)] = {
            "slope": cmp.slope, "slope_reference": cmp.slope_reference,
            "slope_relative_error": cmp.slope_error,
            "plateau": cmp.plateau, "plateau_reference": cmp.plateau_reference,
            "plateau_relative_error": cmp.plateau_error,
        }
    em.json("quench_compare_summary.json", {"L": L, "ell": ell, "quench": spec.label, "alphas": summary})
    return 0


def cmd_fcs_check(cfg: RunConfig, args) -> int:
    state = cfg.build_state(args.allow_branch_risk)
    alphas = _integer_alphas(cfg)
    xs, ts = cfg.grids.x, cfg.grids.t
    if len(xs) != len(ts) or not xs:
        raise ConfigError("fcs-check needs equally long, nonempty x and t grids")
    jobs = [(a, x, t) for a in alphas for x, t in zip(xs, ts)]

    def one(job):
        a, x, t = job
        chk = ent.fcs_profile_check(state, a, x, t)
        return (a, x, t, x / t, chk.lhs.real, chk.lhs.imag, chk.rhs, chk.residual, chk.ok)

    em = Emitter(args.out, cfg, "fcs-check", {"theta": _domain_tag(*state.domain())})
    em.csv("fcs_check.csv", ["alpha", "x", "t", "xi", "lhs_re", "lhs_im", "profile", "residual", "ok"],
           pmap(one, jobs, args.threads))
    if state.dispersion.compact:
        rows = []
        for a in alphas:
            # log det(1 + (e^{ih} - 1) C) / ell tends to F_p(-i) on the space-like ray
            for p, h, bft in zip(ent.sector_momenta(a), ent.sector_charges(a),
                                 ent.sector_scgfs(state, a, "space")):
                fit = oracle.fcs_rate_extrapolation(state, 1j * h, (32, 64, 128, 256))
                rows.append((a, p, h, bft.real, bft.imag, fit.intercept.real, fit.intercept.imag,
                             abs(fit.intercept - bft)))
        em.csv("fcs_static.csv", ["alpha", "p", "h", "bft_re", "bft_im", "oracle_re", "oracle_im", "error"],
               rows, notes=["oracle: log det(1 + (e^{i h} - 1) C_ell) / ell extrapolated in 1/ell"])
    return 0


def _series_fit(xs, ys, model: str, scale: float):
    """Fit |ys|; samples below 1e-13 of the zero-separation value count as unresolved."""
    mags = np.abs(ys)
    if scale == 0 or not np.any(mags > 0):
        return None
    floor = 1e-13 * scale
    try:
        return corr.decay_exponent_fit(xs, mags, model=model, floor=floor)
    except corr.InsufficientDataError:
        return None


def _scale(correlator, state, samples) -> float:
    try:
        return abs(correlator(state, 0.0, 0.0))
    except ValueError:
        # coincident continuum correlators are UV divergent
        return float(np.max(np.abs(samples)))


def cmd_diagnostics(cfg: RunConfig, args) -> int:
    state = cfg.build_state(args.allow_branch_risk)
    em = Emitter(args.out, cfg, "diagnostics", {"theta": _domain_tag(*state.domain())})
    summary = []

    dts = np.geomspace(20, 640, 11)
    jj = np.array(pmap(lambda t: corr.gge_current_current(state, 0.0, t), list(dts), args.threads))
    fit = _series_fit(dts, jj, "power", _scale(corr.gge_current_current, state, jj))
    status = "SKIP" if fit is None else ("PASS" if abs(fit.exponent + 3) <= 0.3 else "FAIL")
    em.csv("diagnostic_current_current.csv", ["dt", "value_re", "value_im"], zip(dts, jj.real, jj.imag),
           notes=[f"power-law exponent {fmt(fit.exponent) if fit else 'nan'} target -3 +- 0.3 status {status}"])
    summary.append(("current_current", "power", fit.exponent if fit else np.nan,
                    fit.r2 if fit else np.nan, status))

    step = 2 if state.dispersion.compact else 1
    dxs = np.arange(1, 11) * step
    dd = np.array(pmap(lambda x: corr.gge_density_density(state, float(x), 0.0), list(dxs), args.threads))
    fit = _series_fit(dxs.astype(float), dd, "exponential", _scale(corr.gge_density_density, state, dd))
    status = "SKIP" if fit is None else ("PASS" if fit.r2 > 0.99 else "FAIL")
    em.csv("diagnostic_density_density.csv", ["dx", "value_re", "value_im"], zip(dxs, dd.real, dd.imag),
           notes=[f"exponential rate {fmt(fit.exponent) if fit else 'nan'} r2 {fmt(fit.r2) if fit else 'nan'} "
                  f"target r2 > 0.99 status {status}"])
    summary.append(("density_density", "exponential", fit.exponent if fit else np.nan,
                    fit.r2 if fit else np.nan, status))

    lc = cfg.lightcone
    if cfg.quench is not None and lc.theta0 and lc.zeta:
        spec = cfg.build_quench()
        scan = corr.light_cone_scan(spec, lc.theta0, lc.eps, lc.zeta, lc.ells)
        rows = [(th, z, scan.exponent[i, j], scan.predicted[i, j], scan.agrees[i, j], scan.boundary[i, j])
                for i, th in enumerate(scan.theta0) for j, z in enumerate(scan.zeta)]
        bad = scan.disagreements_off_boundary
        status = "PASS" if bad == 0 else "FAIL"
        em.csv("diagnostic_light_cone.csv", ["theta0", "zeta", "exponent", "in_cone", "agrees", "boundary"],
               rows, notes=[f"eps {fmt(lc.eps)} disagreements off boundary {bad} status {status}"])
        summary.append(("light_cone", "power", np.nan, np.nan, status))
    em.csv("diagnostics.csv", ["diagnostic", "model", "exponent", "r2", "status"], summary)
    return 0


def _phase_amplitude(a: float = 0.7):
    s = np.sin(a)
    return lambda t1, t2: (np.sinh(t1 - t2) - 1j * s) / (np.sinh(t1 - t2) + 1j * s)


def cmd_replica_check(cfg: RunConfig, args) -> int:
    rng = np.random.default_rng(cfg.seed)
    amplitudes = {"free": -1.0, "constant-phase": np.exp(0.3j), "rapidity-phase": _phase_amplitude()}
    rows = []
    for a in _integer_alphas(cfg):
        for name, S in amplitudes.items():
            for sigma in (1, -1):
                th = np.sort(rng.uniform(-2, 2, 3))
                R = rep.ReplicaSMatrix(a, S, sigma)
                mat = R.matrix(th[0], th[1])
                s01 = complex(S(th[0], th[1]) if callable(S) else S)
                back = rep.to_fourier(mat, a, inverse=True)
                rows.append((a, name, sigma, *th,
                             rep.yang_baxter_residual(a, S, sigma, th, "copy"),
                             rep.yang_baxter_residual(a, S, sigma, th, "fourier"),
                             rep.unitarity_residual(mat),
                             float(np.max(np.abs(back - rep.build_copy_basis(a, S, sigma, th[0], th[1])))),
                             rep.is_diagonal(mat), abs(s01 - sigma) < 1e-12))
    em = Emitter(args.out, cfg, "replica-check")
    em.csv("replica_check.csv", ["alpha", "amplitude", "sigma", "theta1", "theta2", "theta3",
                                 "yb_copy", "yb_fourier", "unitarity", "involution",
                                 "fourier_diagonal", "S_equals_sigma"], rows)
    for row in rows:
        print(f"alpha={row[0]} {row[1]} sigma={row[2]:+d} yang-baxter={row[7]:.3e} unitarity={row[8]:.3e}")
    return 0


def cmd_sector_check(cfg: RunConfig, args) -> int:
    state = cfg.build_state(args.allow_branch_risk)
    jobs = [(a, d) for a in _integer_alphas(cfg) for d in ("space", "time")]

    def one(job):
        a, d = job
        chk = ent.sector_identity_check(state, a, d)
        return (a, d, chk.lhs.real, chk.lhs.imag, chk.rhs, chk.residual, chk.ok)

    em = Emitter(args.out, cfg, "sector-check", {"theta": _domain_tag(*state.domain())})
    em.csv("sector_check.csv", ["alpha", "direction", "sum_re", "sum_im", "reference", "residual", "ok"],
           pmap(one, jobs, args.threads))
    return 0


COMMANDS = {
    "gge-entropy": cmd_gge_entropy,
    "quench-compare": cmd_quench_compare,
    "fcs-check": cmd_fcs_check,
    "diagnostics": cmd_diagnostics,
    "replica-check": cmd_replica_check,
    "sector-check": cmd_sector_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bft-entropy", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path(os.environ.get("BFT_ENTROPY_OUT", ".")))
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--allow-branch-risk", action="store_true")
        p.add_argument("--seed", type=int, default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            from dataclasses import replace
            cfg = replace(cfg, seed=args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        with np.errstate(over="ignore", under="ignore"):
            return COMMANDS[args.command](cfg, args)
    except CONFIG_ERRORS as exc:
        print(f"bft-entropy: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"bft-entropy: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
