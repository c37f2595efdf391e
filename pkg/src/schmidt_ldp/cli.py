"""Command-line runner: every figure-level experiment as seeded CSV/JSON files.

Commands (--command):

  density     constrained equilibrium curve + chain histogram + distances
  rate        analytic rate-function table over the wall position
  entropy     analytic and sampled mean entropy across all wall regimes
  ptspectrum  partial-transpose spectrum vs the shifted semicircle at one wall
  negativity  model and sampled mean log negativity across the wall position
  tail        small-n tail probabilities vs the exact survival law
  verify      the full acceptance suite, as a machine-readable report

Outputs land in the --out directory.  Every file starts with '#'-prefixed
metadata (version, seed, config hash, wall-clock, thresholds); apart from the
wall-clock line, identical config + seed reproduces files byte for byte.
Sweep commands dispatch grid points to a process pool capped by the
SCHMIDT_LDP_THREADS environment variable (default 1, serial); per-point seeds
come from SeedSequence((seed, point_index)), so results do not depend on the
pool size.  Exit codes: 0 pass, 1 criterion failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import analytics as an
from . import empirics as em
from . import sampler as sp
from . import verify as vf
from .params import BarrierSpec, Bipartition, EnsembleParams, WallSide

THREADS_ENV = "SCHMIDT_LDP_THREADS"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return format(v + 0.0 if v != 0 else 0.0, ".12g")
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and (math.isinf(v) or math.isnan(v)):
        return _fmt(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def config_hash(config: dict) -> str:
    blob = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class OutputWriter:
    """Writes tables and reports with a uniform metadata header."""

    def __init__(self, out_dir: Path, fmt: str, config: dict, started: float):
        self.dir = out_dir
        self.fmt = fmt
        self.config = config
        self.started = started
        out_dir.mkdir(parents=True, exist_ok=True)

    def _metadata(self, thresholds: dict | None) -> dict:
        return {
            "version": __version__,
            "command": self.config.get("command", ""),
            "seed": self.config.get("seed", ""),
            "config": _jsonable(self.config),
            "config_sha256": config_hash(self.config),
            "wallclock_s": round(time.time() - self.started, 3),
            "thresholds": _jsonable(thresholds or {}),
        }

    def table(self, name: str, columns: list[str], rows: list[dict],
              thresholds: dict | None = None) -> Path:
        meta = self._metadata(thresholds)
        if self.fmt == "json":
            path = self.dir / f"{name}.json"
            payload = {"metadata": meta, "columns": columns,
                       "rows": [_jsonable({c: r.get(c) for c in columns}) for r in rows]}
            path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
            return path
        path = self.dir / f"{name}.csv"
        with open(path, "w") as fh:
            for key in ("version", "command", "seed", "config_sha256",
                        "wallclock_s"):
                fh.write(f"# {key}: {meta[key]}\n")
            fh.write(f"# config: {json.dumps(meta['config'], sort_keys=True)}\n")
            fh.write(f"# thresholds: {json.dumps(meta['thresholds'], sort_keys=True)}\n")
            fh.write(",".join(columns) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(r.get(c)) for c in columns) + "\n")
        return path

    def raw_rows(self, name: str, header: str, rows) -> Path:
        """Stream plain numeric rows (e.g. one spectrum per line) under the
        usual metadata header; always CSV."""
        meta = self._metadata(None)
        path = self.dir / f"{name}.csv"
        with open(path, "w") as fh:
            for key in ("version", "command", "seed", "config_sha256",
                        "wallclock_s"):
                fh.write(f"# {key}: {meta[key]}\n")
            fh.write(f"# config: {json.dumps(meta['config'], sort_keys=True)}\n")
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(float(v)) for v in row) + "\n")
        return path

    def report(self, name: str, payload: dict, thresholds: dict | None = None) -> Path:
        path = self.dir / f"{name}.json"
        doc = {"metadata": self._metadata(thresholds), **_jsonable(payload)}
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        return path


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _barrier_from(args) -> BarrierSpec:
    side = args.side
    if side == "none":
        return BarrierSpec.none()
    if args.zeta is None:
        raise UsageError("--zeta is required when --side is min or max")
    if side == "min":
        return BarrierSpec.min_wall(args.zeta)
    return BarrierSpec.max_wall(args.zeta)


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def _pool_map(worker, payloads):
    threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(payloads))) as pool:
            return list(pool.map(worker, payloads))
    return [worker(p) for p in payloads]


def _wall_grid(step: float) -> list[tuple[float, str]]:
    """Wall positions across all regimes: floor in [0, 1), the deterministic
    pinning point 1, ceiling in (1, 4]."""
    lo = np.round(np.arange(0.0, 1.0 - 1e-9, step), 10)
    hi = np.round(np.arange(1.0 + step, 4.0 + 1e-9, step), 10)
    return ([(float(z), "min") for z in lo] + [(1.0, "degenerate")]
            + [(float(z), "max") for z in hi])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def run_density(args, writer: OutputWriter) -> int:
    params = EnsembleParams(args.n, args.m, beta=args.beta)
    barrier = _barrier_from(args)
    if barrier.is_degenerate:
        raise UsageError("zeta = 1 pins the spectrum; no density to sample")
    curve = an.density_curve(barrier, n_points=512)
    cfg = sp.ChainConfig(steps=args.sweeps, burn_in=args.burn_in,
                         thin=args.thin if args.thin else 5, seed=args.seed)
    kept, diags = sp.mcmc_sample(params, barrier, cfg)
    values = np.concatenate([s.values for s in kept]) * params.n
    hist = em.histogram(values, args.bins, curve.support)
    dist = em.compare_density(hist, curve)

    writer.table("density_curve", ["x", "density"],
                 [dict(x=x, density=v) for x, v in zip(curve.grid, curve.values)])
    dens = hist.density()
    writer.table("density_histogram", ["x", "density", "count"],
                 [dict(x=x, density=d, count=int(c))
                  for x, d, c in zip(hist.midpoints, dens, hist.counts)])
    if args.dump_spectra:
        writer.raw_rows("spectra", "# one spectrum per row, ascending",
                        (s.values for s in kept))
    writer.report("density_report", {
        "l1": dist.l1, "ks": dist.ks,
        "n_spectra": len(kept), "n_eigenvalues": int(hist.counts.sum()),
        "acceptance_rate": diags.acceptance_rate,
        "autocorrelation_time": diags.autocorrelation_time,
        "thin": diags.thin,
        "passed": bool(dist.l1 < 0.05),
    }, thresholds={"l1_max": 0.05})
    print(f"density: l1={dist.l1:.4f} ks={dist.ks:.4f} "
          f"({'pass' if dist.l1 < 0.05 else 'FAIL'})")
    return 0 if dist.l1 < 0.05 else 1


def run_rate(args, writer: OutputWriter) -> int:
    rows = []
    for z, side in _wall_grid(args.grid_step):
        if side == "degenerate":
            rows.append(dict(zeta=z, side="min", rate=math.inf, log_tail=-math.inf))
            continue
        b = BarrierSpec.min_wall(z) if side == "min" else BarrierSpec.max_wall(z)
        params = EnsembleParams(args.n, args.m, beta=args.beta)
        rows.append(dict(zeta=z, side=side, rate=an.rate_function(b),
                         log_tail=an.tail_log_probability(params, b)))
    writer.table("rate", ["zeta", "side", "rate", "log_tail"], rows)
    print(f"rate: {len(rows)} grid points")
    return 0


def _entropy_point(payload: tuple) -> dict:
    (z, side, n, m, beta, sweeps, burn_in, thin, seed) = payload
    analytic = an.avg_entropy(
        BarrierSpec.min_wall(z) if side == "min" else BarrierSpec.max_wall(z), n)
    if z == 1.0:
        # the wall pins the maximally mixed state: entropy is deterministic
        return dict(zeta=z, side=side, entropy=analytic, entropy_mc=math.log(n),
                    stderr_mc=0.0)
    barrier = BarrierSpec.min_wall(z) if side == "min" else BarrierSpec.max_wall(z)
    cfg = sp.ChainConfig(steps=sweeps, burn_in=burn_in, thin=thin, seed=seed)
    kept, _ = sp.mcmc_sample(EnsembleParams(n, m, beta=beta), barrier, cfg)
    ent = np.array([s.entropy() for s in kept])
    infl = math.sqrt(2 * sp.autocorrelation_time(ent)) if len(ent) > 16 else 1.0
    return dict(zeta=z, side=side, entropy=analytic,
                entropy_mc=float(ent.mean()),
                stderr_mc=float(infl * ent.std(ddof=1) / math.sqrt(len(ent))))


def run_entropy(args, writer: OutputWriter) -> int:
    if args.n != args.m:
        raise UsageError("the entropy sweep covers the equal-dimension case; set --n == --m")
    payloads = []
    for idx, (z, side) in enumerate(_wall_grid(args.grid_step)):
        side = "min" if side == "degenerate" else side
        payloads.append((z, side, args.n, args.m, args.beta, args.sweeps,
                         args.burn_in, args.thin, _point_seed(args.seed, idx)))
    rows = _pool_map(_entropy_point, payloads)
    writer.table("entropy", ["zeta", "side", "entropy", "entropy_mc", "stderr_mc"], rows)
    print(f"entropy: {len(rows)} grid points")
    return 0


def run_ptspectrum(args, writer: OutputWriter) -> int:
    parts = Bipartition(args.n1, args.n2)
    if parts.dim != args.n:
        raise UsageError(f"--n1*--n2 = {parts.dim} must equal --n = {args.n}")
    barrier = _barrier_from(args)
    if barrier.side is WallSide.NONE or barrier.is_degenerate:
        raise UsageError("ptspectrum needs an active, non-degenerate wall (--side min/max)")
    side = "min" if barrier.side is WallSide.MIN else "max"
    pt, pre, elns, _ = vf._pt_experiment(barrier.zeta, side, args.matrices,
                                         args.seed, thin=args.thin, parts=parts,
                                         m=args.m, beta=args.beta,
                                         burn_in=args.burn_in)
    radius = an.model_radius(barrier)
    curve = an.semicircle_curve(radius, n_points=512)
    xs = np.sort(pt.ravel())
    ecdf = np.arange(1, len(xs) + 1) / len(xs)
    ks = float(np.max(np.abs(ecdf - an.semicircle_cdf(xs, radius))))

    hist = em.histogram(pt.ravel(), args.bins,
                        (float(xs[0]) - 1e-9, float(xs[-1]) + 1e-9))
    writer.table("pt_histogram", ["x", "density", "count"],
                 [dict(x=x, density=d, count=int(c))
                  for x, d, c in zip(hist.midpoints, hist.density(), hist.counts)])
    if args.dump_spectra:
        writer.raw_rows("pt_spectra",
                        "# one rescaled PT spectrum per row, ascending", pt)
    writer.table("pt_semicircle", ["x", "density"],
                 [dict(x=x, density=v) for x, v in zip(curve.grid, curve.values)])
    writer.report("pt_report", {
        "zeta": barrier.zeta, "side": side, "radius": radius, "ks": ks,
        "pt_range": float(xs[-1] - xs[0]),
        "pre_range": float(pre.max() - pre.min()),
        "negativity_mean": float(elns.mean()),
        "npt_fraction": float(np.mean(elns > 0)),
        "n_matrices": args.matrices,
    }, thresholds={"ks_max": 0.03})
    print(f"ptspectrum: ks={ks:.4f} radius={radius:.4f}")
    return 0 if ks < 0.03 else 1


def _negativity_point(payload: tuple) -> dict:
    (z, seed, matrices, n1, n2, m, beta) = payload
    return vf.negativity_sweep_point(z, seed, matrices,
                                     parts=Bipartition(n1, n2), m=m, beta=beta)


def run_negativity(args, writer: OutputWriter) -> int:
    parts = Bipartition(args.n1, args.n2)
    if parts.dim != args.n:
        raise UsageError(f"--n1*--n2 = {parts.dim} must equal --n = {args.n}")
    zetas = [z for z, _ in _wall_grid(args.grid_step)]
    payloads = [(z, _point_seed(args.seed, i), args.matrices,
                 args.n1, args.n2, args.m, args.beta)
                for i, z in enumerate(zetas)]
    rows = _pool_map(_negativity_point, payloads)
    zmin, zmax = an.transition_points()
    writer.table("negativity",
                 ["zeta", "side", "model", "mc_mean", "mc_stderr", "npt_fraction"],
                 rows, thresholds={"transition_floor": zmin, "transition_ceiling": zmax})
    print(f"negativity: {len(rows)} grid points")
    return 0


def run_tail(args, writer: OutputWriter) -> int:
    params = EnsembleParams(args.n, args.m, beta=args.beta)
    zetas = np.round(np.arange(0.0, 0.5 + 1e-9, args.grid_step), 10)
    rng = np.random.default_rng(args.seed)
    ests = sp.tail_probability_curve(params, zetas, args.draws, rng)
    exact_available = params.beta == 2.0 and params.n == params.m
    rows = []
    for z, est in zip(zetas, ests):
        row = dict(zeta=float(z), p_hat=est.p_hat, stderr=est.stderr,
                   n_hits=est.n_hits,
                   rate=an.rate_function(BarrierSpec.min_wall(float(z))))
        row["exact"] = (1 - z) ** (params.n ** 2 - 1) if exact_available else math.nan
        row["rate_estimate"] = (-math.log(est.p_hat) / (params.beta * params.n ** 2)
                                if est.p_hat > 0 else math.inf)
        rows.append(row)
    writer.table("tail", ["zeta", "p_hat", "stderr", "n_hits", "exact",
                          "rate_estimate", "rate"], rows)
    print(f"tail: {len(rows)} grid points, {args.draws} draws")
    return 0


def run_verify(args, writer: OutputWriter) -> int:
    ids = None
    if args.criteria:
        ids = [int(tok) for tok in args.criteria.split(",") if tok.strip()]
    results = vf.run_criteria(ids, seed=args.seed, progress=print)
    if args.inject_failure:
        # test hook: corrupt one result so the failure path is exercised
        results[0].passed = False
        results[0].details["injected_failure"] = True
        print(results[0].summary())
    report = vf.build_report(results, args.seed)
    writer.report("verify_report", report)
    writer.table("verify_criteria", ["id", "name", "passed", "elapsed_s"],
                 [dict(id=r.cid, name=r.name, passed=r.passed,
                       elapsed_s=round(r.elapsed_s, 3)) for r in results])
    return 0 if report["all_passed"] else 1


COMMANDS = {
    "density": run_density,
    "rate": run_rate,
    "entropy": run_entropy,
    "ptspectrum": run_ptspectrum,
    "negativity": run_negativity,
    "tail": run_tail,
    "verify": run_verify,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="schmidt-ldp",
        description="Wall-constrained Schmidt spectra: densities, entropies, "
                    "partial-transpose negativity, and the acceptance suite.")
    p.add_argument("--command", required=True, choices=sorted(COMMANDS))
    p.add_argument("--zeta", type=float, default=None, help="wall position (rescaled units)")
    p.add_argument("--side", choices=["min", "max", "none"], default="none",
                   help="wall side: min = floor, max = ceiling")
    p.add_argument("--n", type=int, default=100, help="subsystem dimension")
    p.add_argument("--m", type=int, default=100, help="environment dimension (>= n)")
    p.add_argument("--beta", type=float, default=2.0, help="Dyson index")
    p.add_argument("--n1", type=int, default=10, help="first factor of the split")
    p.add_argument("--n2", type=int, default=10, help="second factor of the split")
    p.add_argument("--sweeps", type=int, default=200_000, help="total chain sweeps")
    p.add_argument("--burn-in", type=int, default=2000, dest="burn_in")
    p.add_argument("--thin", type=int, default=None,
                   help="keep every thin-th sweep (default: auto from the "
                        "measured autocorrelation time)")
    p.add_argument("--matrices", type=int, default=1000,
                   help="matrices per point for partial-transpose experiments")
    p.add_argument("--draws", type=int, default=1_000_000,
                   help="direct-sampler draws for the tail command")
    p.add_argument("--bins", type=int, default=200, help="histogram bins")
    p.add_argument("--grid-step", type=float, default=0.1, dest="grid_step",
                   help="wall-position step for sweep commands")
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", type=str, required=True, help="output directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--criteria", type=str, default=None,
                   help="verify: comma-separated criterion ids (default all)")
    p.add_argument("--inject-failure", action="store_true", dest="inject_failure",
                   help="verify: force one failure to test the exit path")
    p.add_argument("--dump-spectra", action="store_true", dest="dump_spectra",
                   help="density/ptspectrum: also stream raw spectra, one row "
                        "per sample")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # the destination is not part of the experiment: identical config + seed
    # must give byte-identical files wherever they are written
    config = {k: v for k, v in sorted(vars(args).items()) if k != "out"}
    writer = OutputWriter(Path(args.out), args.format, config, time.time())
    try:
        return COMMANDS[args.command](args, writer)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
