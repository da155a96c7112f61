"""Command line front end.

Subcommands::

    qtwave encode  --config run.ini --out runs/enc
    qtwave evolve  --config run.ini --out runs/mps [--state runs/enc/state.qtwv]
    qtwave oracle  --config run.ini --out runs/exact
    qtwave compare runs/mps runs/exact [--out runs/cmp]
    qtwave sample  --config run.ini --out runs/smp [--state runs/mps/state.qtwv]
    qtwave bench   --config bench.ini --out runs/bench

Every output directory receives a ``manifest.json`` with the configuration,
versions, seeds and wall times.  Exit codes: 0 success, 2 invalid input,
3 capacity exceeded, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .config import MODES, RunConfig, load_config
from .errors import (
    CapacityError,
    DimensionError,
    LayoutError,
    NumericalError,
    ParameterError,
    QtWaveError,
    ResourceError,
)
from .evolve import Diagnostics, build_trotter_step, evolve
from .initcond import FunctionSpec, function_mpo, initial_spinor
from .oracle import DenseField, KSpacePropagator, dft, exact_solution, idft, rk4_evolve
from .qft_mpo import apply_qft
from .registers import Layout, spinor_project
from .sampling import histogram, max_abs_error, sample_points
from .snapshot import SnapshotError, load, save
from .tt import Mps

log = logging.getLogger("qtwave")

EXIT_OK, EXIT_VALIDATION, EXIT_CAPACITY, EXIT_NUMERICAL = 0, 2, 3, 4
DENSE_EXPORT_POINTS = 2**24
STATE_FILE, FIELD_FILE, ENCODER_FILE = "state.qtwv", "field.qtwv", "encoder.qtwv"


# ---------------------------------------------------------------------------
# helpers


def _out_dir(args: argparse.Namespace, cfg: RunConfig) -> Path:
    out = args.out or cfg.out_dir
    if out is None:
        raise ParameterError("no output directory: pass --out or set [output] dir")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if getattr(args, "seed", None) is not None:
        if not 0 <= args.seed < 2**64:
            raise ParameterError(f"--seed must be a 64-bit unsigned integer, got {args.seed}")
        cfg = dataclasses.replace(cfg, sampling=dataclasses.replace(cfg.sampling, seed=args.seed))
    return cfg


def write_manifest(out: Path, command: str, cfg: RunConfig | None, args: argparse.Namespace, extra: dict) -> None:
    manifest = {
        "command": command,
        "argv": list(getattr(args, "argv", [])),
        "config": cfg.to_dict() if cfg is not None else None,
        "seed": cfg.sampling.seed if cfg is not None else None,
        "threads": args.threads,
        "versions": {
            "qtwave": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default))


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default))


def _time_layout(cfg: RunConfig) -> Layout:
    return cfg.layout.with_time_qubit(True)


def _load_state(path: str | Path) -> tuple[Mps, Layout]:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"snapshot not found: {p}")
    obj, layout = load(p)
    if not isinstance(obj, Mps) or layout is None:
        raise SnapshotError(f"{p} does not hold a state with its layout")
    return obj, layout


def _load_field(run_dir: Path) -> tuple[DenseField, dict]:
    """Dense field of a run directory: ``field.qtwv`` or the converted state."""
    if not run_dir.is_dir():
        raise FileNotFoundError(f"run directory not found: {run_dir}")
    fpath, spath = run_dir / FIELD_FILE, run_dir / STATE_FILE
    if fpath.is_file():
        obj, layout = load(fpath)
        if not isinstance(obj, DenseField):
            raise SnapshotError(f"{fpath} does not hold a dense field")
        return obj, {"source": str(fpath), "layout": layout.to_dict() if layout else None}
    if spath.is_file():
        state, layout = _load_state(spath)
        return DenseField.from_mps(state, layout), {"source": str(spath), "layout": layout.to_dict()}
    raise FileNotFoundError(f"no {FIELD_FILE} or {STATE_FILE} in {run_dir}")


def _initial_state(cfg: RunConfig) -> tuple[Mps, float]:
    t0 = time.perf_counter()
    psi = initial_spinor(cfg.function, _time_layout(cfg), cfg.evolve.svd)
    return psi, time.perf_counter() - t0


def _diagnostics_summary(diag: Diagnostics) -> dict:
    if not len(diag):
        return {"steps": 0}
    return {
        "steps": len(diag),
        "max_bond": int(max(diag.max_bond)),
        "final_norm": diag.norm[-1],
        "discarded_weight": diag.discarded[-1],
        "step_ms_mean": float(np.mean(diag.wall_ms)),
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_encode(cfg: RunConfig, args: argparse.Namespace) -> int:
    out = _out_dir(args, cfg)
    meta: dict = {"function": dataclasses.asdict(cfg.function)}
    if cfg.function.kind != "tapered_gaussian3d":
        t0 = time.perf_counter()
        enc = function_mpo(cfg.function, cfg.layout, cfg.evolve.svd)
        meta["encoder_build_s"] = time.perf_counter() - t0
        meta["encoder_max_bond"] = enc.max_bond
        meta["encoder_bond_dims"] = enc.bond_dims
        save(out / ENCODER_FILE, enc, cfg.layout)
    psi, secs = _initial_state(cfg)
    layout = _time_layout(cfg)
    save(out / STATE_FILE, psi, layout)
    meta.update(
        state_build_s=secs,
        state_max_bond=psi.max_bond,
        state_bond_dims=psi.bond_dims,
        norm=psi.norm(),
        n_sites=psi.n_sites,
    )
    _write_json(out / "metadata.json", meta)
    write_manifest(out, "encode", cfg, args, {"wall_s": {"encode": secs}})
    print(f"encoded {cfg.function.kind} on {layout.shape}: max bond {psi.max_bond} -> {out}")
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, args: argparse.Namespace) -> int:
    out = _out_dir(args, cfg)
    if cfg.mode not in ("trotter", "small_angle"):
        raise ParameterError(f"evolve runs the trotter or small_angle modes, config has {cfg.mode!r}")
    if args.state:
        psi0, layout = _load_state(args.state)
        enc_s = 0.0
    else:
        psi0, enc_s = _initial_state(cfg)
        layout = _time_layout(cfg)
    kind = "exact" if cfg.mode == "trotter" else "small_angle"
    t0 = time.perf_counter()
    plan = build_trotter_step(layout, cfg.evolve, kind)
    plan_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    psi, diag = evolve(psi0, plan, cfg.evolve)
    run_s = time.perf_counter() - t0
    save(out / STATE_FILE, psi, layout)
    diag.write_csv(out / "diagnostics.csv")
    exported = math.prod(layout.shape) <= DENSE_EXPORT_POINTS and layout.n_total <= 26
    if exported:
        save(out / FIELD_FILE, DenseField.from_mps(psi, layout), layout)
    summary = _diagnostics_summary(diag) | {
        "mode": cfg.mode,
        "t_final": cfg.evolve.n_steps * cfg.evolve.dt,
        "initial_norm": psi0.norm(),
        "final_norm": psi.norm(),
        "dense_field_written": exported,
    }
    _write_json(out / "metadata.json", summary)
    write_manifest(out, "evolve", cfg, args, {"wall_s": {"encode": enc_s, "plan": plan_s, "evolve": run_s}})
    print(f"evolved {cfg.evolve.n_steps} steps, max bond {summary.get('max_bond', psi.max_bond)} -> {out}")
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, args: argparse.Namespace) -> int:
    cfg.check_dense_budget()
    out = _out_dir(args, cfg)
    layout = _time_layout(cfg)
    if layout.n_total > 26:
        raise CapacityError(f"{layout.n_total} qubits exceed the dense conversion limit of 26")
    psi0, enc_s = _initial_state(cfg)
    field0 = DenseField.from_mps(psi0, layout)
    t = cfg.evolve.n_steps * cfg.evolve.dt
    t0 = time.perf_counter()
    if cfg.mode == "rk4_oracle":
        result = rk4_evolve(field0, cfg.evolve.dt, cfg.evolve.n_steps)
        method = "rk4"
    else:
        result = exact_solution(field0, t)
        method = "exact"
    secs = time.perf_counter() - t0
    save(out / FIELD_FILE, result, layout)
    _write_json(out / "metadata.json", {"method": method, "t_final": t, "norm": result.norm()})
    write_manifest(out, "oracle", cfg, args, {"wall_s": {"encode": enc_s, "oracle": secs}})
    print(f"{method} oracle to t={t:g} on {layout.shape} -> {out}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    a, ameta = _load_field(Path(args.a_dir))
    b, bmeta = _load_field(Path(args.b_dir))
    if a.shape != b.shape:
        raise DimensionError(f"grids differ: {a.shape} vs {b.shape}")
    report = {
        "a": ameta,
        "b": bmeta,
        "psi0": max_abs_error(a, b, "psi0").to_dict(),
        "psi1": max_abs_error(a, b, "psi1").to_dict(),
        "both": max_abs_error(a, b, "both").to_dict(),
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "compare.json", report)
        write_manifest(out, "compare", None, args, {"inputs": [str(args.a_dir), str(args.b_dir)]})
    rel = report["psi0"]["relative_error"]
    rel_txt = "undefined" if rel is None else f"{rel:.4%}"
    print(f"psi0 max abs error {report['psi0']['max_abs_error']:.6e} (relative {rel_txt})")
    return EXIT_OK


def cmd_sample(cfg: RunConfig, args: argparse.Namespace) -> int:
    out = _out_dir(args, cfg)
    if args.state:
        psi, layout = _load_state(args.state)
    else:
        psi, _ = _initial_state(cfg)
        layout = _time_layout(cfg)
    spatial = layout.with_time_qubit(False)
    comp = spinor_project(psi, cfg.sampling.component, layout)
    t0 = time.perf_counter()
    samples = sample_points(comp, spatial, cfg.sampling.count, cfg.sampling.seed, threads=args.threads)
    hist = histogram(samples, cfg.sampling.bins)
    secs = time.perf_counter() - t0
    samples.write_csv(out / "samples.csv")
    hist.write_csv(out / "histogram.csv")
    _write_json(
        out / "metadata.json",
        {"count": len(samples), "seed": samples.seed, "bins": hist.bins, "empty_bins": int(hist.empty.sum())},
    )
    write_manifest(out, "sample", cfg, args, {"wall_s": {"sample": secs}})
    print(f"{len(samples)} samples (seed {samples.seed}) into {hist.bins} bins -> {out}")
    return EXIT_OK


BENCH_COLUMNS = (
    "n_per_axis",
    "grid_points",
    "fft_ms",
    "qft_mpo_ms",
    "exact_prop_ms",
    "mps_prop_ms",
    "max_bond",
    "rel_error",
)


def _best_ms(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, (time.perf_counter() - t0) * 1e3)
    return best


def bench_row(n: int, cfg: RunConfig) -> dict:
    """Time every stage of one sweep point; dense columns stay empty beyond the budget."""
    b = cfg.bench
    spatial = Layout.uniform(n, b.dims)
    layout = spatial.with_time_qubit(True)
    spec = FunctionSpec(cfg.function.kind, (cfg.function.mu[0],) * b.dims, cfg.function.sigma, cfg.function.alpha)
    ev = dataclasses.replace(cfg.evolve, t_final=b.t_final)
    psi0 = initial_spinor(spec, layout, ev.svd)
    row: dict = {"n_per_axis": n, "grid_points": math.prod(spatial.shape)}

    row["qft_mpo_ms"] = _best_ms(lambda: apply_qft(psi0, layout, opts=ev.svd), b.repeats)
    plan = build_trotter_step(layout, ev)
    result: dict = {}

    def run() -> None:
        result["psi"], result["diag"] = evolve(psi0, plan, ev)

    row["mps_prop_ms"] = _best_ms(run, b.repeats)
    diag = result["diag"]
    row["max_bond"] = max(diag.max_bond) if len(diag) else result["psi"].max_bond

    pts = row["grid_points"]
    row["fft_ms"] = row["exact_prop_ms"] = row["rel_error"] = None
    if pts <= b.dense_max_points:
        rng = np.random.default_rng(0)
        arr = rng.standard_normal(spatial.shape) + 1j * rng.standard_normal(spatial.shape)

        def ffts() -> None:
            # two forward transforms of the initial data plus one back-transform
            k = dft(arr)
            dft(arr)
            idft(k)

        row["fft_ms"] = _best_ms(ffts, b.repeats)
        prop = KSpacePropagator(spatial.shape)
        fk = DenseField(arr, np.zeros_like(arr))
        t = ev.n_steps * ev.dt
        row["exact_prop_ms"] = _best_ms(lambda: prop.apply(fk, t), b.repeats)
        del arr, fk, prop
    if pts <= b.error_max_points and layout.n_total <= 26:
        field0 = DenseField.from_mps(psi0, layout)
        exact = exact_solution(field0, ev.n_steps * ev.dt)
        row["rel_error"] = max_abs_error(DenseField.from_mps(result["psi"], layout), exact, "psi0").relative
    return row


def cmd_bench(cfg: RunConfig, args: argparse.Namespace) -> int:
    out = _out_dir(args, cfg)
    rows = []
    t0 = time.perf_counter()
    for n in range(cfg.bench.n_min, cfg.bench.n_max + 1):
        row = bench_row(n, cfg)
        rows.append(row)
        log.info("bench n=%d: %s", n, row)
    secs = time.perf_counter() - t0
    with open(out / "bench.csv", "w") as fh:
        fh.write(",".join(BENCH_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join("" if row[c] is None else _fmt(row[c]) for c in BENCH_COLUMNS) + "\n")
    write_manifest(out, "bench", cfg, args, {"wall_s": {"bench": secs}})
    print(f"bench n={cfg.bench.n_min}..{cfg.bench.n_max} ({cfg.bench.dims}D) -> {out / 'bench.csv'}")
    return EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI-style run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads (1 = canonical)")
    common.add_argument("--seed", type=int, default=None, metavar="S", help="override [sampling] seed")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="qtwave", description="Tensor-train wave propagation")
    p.add_argument("--version", action="version", version=f"qtwave {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("encode", parents=[common], help="build the initial state")
    ev = sub.add_parser("evolve", parents=[common], help="run the Trotter pipeline")
    ev.add_argument("--state", metavar="PATH", help="initial state snapshot (default: encode from config)")
    sub.add_parser("oracle", parents=[common], help=f"dense reference solve (modes: {', '.join(MODES[2:])})")
    cmp_ = sub.add_parser("compare", parents=[common], help="max abs error between two run directories")
    cmp_.add_argument("a_dir")
    cmp_.add_argument("b_dir", help="reference run")
    smp = sub.add_parser("sample", parents=[common], help="sample amplitudes and bin them")
    smp.add_argument("--state", metavar="PATH", help="state snapshot (default: encode from config)")
    sub.add_parser("bench", parents=[common], help="timing sweep over qubits per axis")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.threads < 1:
            raise ParameterError(f"--threads must be >= 1, got {args.threads}")
        if args.command == "compare":
            return cmd_compare(args)
        cfg = _apply_overrides(load_config(args.config), args)
        handler = {
            "encode": cmd_encode,
            "evolve": cmd_evolve,
            "oracle": cmd_oracle,
            "sample": cmd_sample,
            "bench": cmd_bench,
        }[args.command]
        return handler(cfg, args)
    except (CapacityError, ResourceError, MemoryError) as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterError, DimensionError, LayoutError, SnapshotError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QtWaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
