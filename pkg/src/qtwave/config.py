"""Run configuration: an INI-style file parsed into validated dataclasses.

Example::

    [layout]
    axes = x:8, y:8

    [function]
    kind = ricker2d
    mu = 0.5, 0.5
    sigma = 0.1

    [evolve]
    dt = 0.0005
    t_final = 0.3
    mode = trotter

Every key is optional; missing keys take the defaults below.  Errors are
reported as :class:`qtwave.errors.ConfigError` naming ``section.key``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import CapacityError, ConfigError, QtWaveError
from .evolve import EvolveConfig
from .initcond import FunctionSpec
from .oracle import DENSE_POINTS_BUDGET
from .registers import AXIS_LABELS, Layout
from .tensor_core import SvdOptions

MODES = ("trotter", "small_angle", "exact_oracle", "rk4_oracle")
SECTIONS = ("layout", "function", "evolve", "sampling", "bench", "output")


@dataclass(frozen=True)
class SamplingConfig:
    count: int = 100_000
    seed: int = 0
    bins: tuple[int, ...] = (32,)
    component: int = 0


@dataclass(frozen=True)
class BenchConfig:
    n_min: int = 4
    n_max: int = 12
    dims: int = 2
    t_final: float = 0.01
    dense_max_points: int = 2**24
    error_max_points: int = 2**20
    repeats: int = 1


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs; see the module docstring for the file format."""

    layout: Layout = field(default_factory=lambda: Layout.uniform(8, 2))
    function: FunctionSpec = field(default_factory=lambda: FunctionSpec("ricker2d", (0.5, 0.5), 0.1, 1.2))
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    mode: str = "trotter"
    out_dir: str | None = None

    def to_dict(self) -> dict:
        ev = self.evolve
        return {
            "layout": self.layout.to_dict(),
            "function": asdict(self.function),
            "evolve": {
                "dt": ev.dt,
                "t_final": ev.t_final,
                "n_steps": ev.n_steps,
                "cutoff": ev.svd.cutoff,
                "max_rank": ev.svd.max_rank,
                "eps_pauli": ev.eps_pauli,
                "bond_cap": ev.bond_cap,
                "record_diagnostics": ev.record_diagnostics,
                "mode": self.mode,
            },
            "sampling": asdict(self.sampling),
            "bench": asdict(self.bench),
            "output": {"dir": self.out_dir},
        }

    def check_dense_budget(self) -> None:
        """Raise :class:`CapacityError` if a dense oracle would be too large."""
        pts = math.prod(self.layout.shape)
        if pts > DENSE_POINTS_BUDGET:
            raise CapacityError(
                f"layout {self.layout.shape} has {pts} points, above the dense budget {DENSE_POINTS_BUDGET}"
            )


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _parse_axes(text: str) -> Layout:
    axes = []
    for item in text.replace(",", " ").split():
        label, _, n = item.partition(":")
        if label not in AXIS_LABELS or not n:
            raise ValueError(f"expected items like x:8, got {item!r}")
        axes.append((label, int(n)))
    return Layout(tuple(axes))


class _Reader:
    def __init__(self, parser: configparser.ConfigParser):
        self.p = parser

    def get(self, section: str, key: str, conv, default):
        if not self.p.has_option(section, key):
            return default
        raw = self.p.get(section, key).strip()
        if raw == "":
            return default
        try:
            return conv(raw)
        except (ValueError, QtWaveError) as exc:
            raise ConfigError(f"{section}.{key}", f"cannot parse {raw!r}: {exc}") from None


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a validated :class:`RunConfig`."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc)) from None
    for sec in parser.sections():
        if sec not in SECTIONS:
            raise ConfigError(sec, f"unknown section; expected one of {SECTIONS}")
    r = _Reader(parser)
    d = RunConfig()

    layout = r.get("layout", "axes", _parse_axes, None)
    if layout is None:
        dims = r.get("layout", "dims", int, 2)
        qubits = r.get("layout", "qubits", int, 8)
        if not 1 <= dims <= 3:
            raise ConfigError("layout.dims", f"must be 1, 2 or 3, got {dims}")
        if qubits < 1:
            raise ConfigError("layout.qubits", f"must be >= 1, got {qubits}")
        layout = Layout.uniform(qubits, dims)

    kind = r.get("function", "kind", str, d.function.kind)
    mu = r.get("function", "mu", _floats, (0.5,) * len(layout.axes))
    sigma = r.get("function", "sigma", float, d.function.sigma)
    alpha = r.get("function", "alpha", float, d.function.alpha)
    if not sigma > 0:
        raise ConfigError("function.sigma", f"must be > 0, got {sigma}")
    if not alpha > 0:
        raise ConfigError("function.alpha", f"must be > 0, got {alpha}")
    try:
        fn = FunctionSpec(kind, mu, sigma, alpha)
        fn.centers(len(layout.axes))
    except QtWaveError as exc:
        raise ConfigError("function", str(exc)) from None

    cutoff = r.get("evolve", "cutoff", float, 1e-14)
    max_rank = r.get("evolve", "max_rank", int, None)
    try:
        svd = SvdOptions(cutoff, max_rank)
    except QtWaveError as exc:
        raise ConfigError("evolve.cutoff", str(exc)) from None
    dt = r.get("evolve", "dt", float, d.evolve.dt)
    if not (math.isfinite(dt) and dt > 0):
        raise ConfigError("evolve.dt", f"must be > 0, got {dt}")
    t_final = r.get("evolve", "t_final", float, d.evolve.t_final)
    if not (math.isfinite(t_final) and t_final >= 0):
        raise ConfigError("evolve.t_final", f"must be >= 0, got {t_final}")
    eps = r.get("evolve", "eps_pauli", float, d.evolve.eps_pauli)
    if not eps >= 0:
        raise ConfigError("evolve.eps_pauli", f"must be >= 0, got {eps}")
    bond_cap = r.get("evolve", "bond_cap", int, d.evolve.bond_cap)
    if bond_cap < 1:
        raise ConfigError("evolve.bond_cap", f"must be >= 1, got {bond_cap}")
    record = r.get("evolve", "record_diagnostics", _bool, True)
    mode = r.get("evolve", "mode", str, d.mode)
    if mode not in MODES:
        raise ConfigError("evolve.mode", f"must be one of {MODES}, got {mode!r}")
    ev = EvolveConfig(dt, t_final, svd, eps, record, bond_cap)

    count = r.get("sampling", "count", int, d.sampling.count)
    if count < 1:
        raise ConfigError("sampling.count", f"must be >= 1, got {count}")
    seed = r.get("sampling", "seed", int, d.sampling.seed)
    if not 0 <= seed < 2**64:
        raise ConfigError("sampling.seed", f"must be a 64-bit unsigned integer, got {seed}")
    bins = r.get("sampling", "bins", lambda t: tuple(int(b) for b in _floats(t)), d.sampling.bins)
    if any(b < 1 for b in bins) or len(bins) not in (1, len(layout.axes)):
        raise ConfigError("sampling.bins", f"need one positive count or one per axis, got {bins}")
    component = r.get("sampling", "component", int, 0)
    if component not in (0, 1):
        raise ConfigError("sampling.component", f"must be 0 or 1, got {component}")
    sampling = SamplingConfig(count, seed, bins, component)

    b = BenchConfig(
        r.get("bench", "n_min", int, d.bench.n_min),
        r.get("bench", "n_max", int, d.bench.n_max),
        r.get("bench", "dims", int, d.bench.dims),
        r.get("bench", "t_final", float, d.bench.t_final),
        r.get("bench", "dense_max_points", int, d.bench.dense_max_points),
        r.get("bench", "error_max_points", int, d.bench.error_max_points),
        r.get("bench", "repeats", int, d.bench.repeats),
    )
    if not 1 <= b.n_min <= b.n_max:
        raise ConfigError("bench.n_min", f"need 1 <= n_min <= n_max, got {b.n_min}, {b.n_max}")
    if not 1 <= b.dims <= 3:
        raise ConfigError("bench.dims", f"must be 1, 2 or 3, got {b.dims}")
    if not b.t_final >= 0:
        raise ConfigError("bench.t_final", f"must be >= 0, got {b.t_final}")
    if b.repeats < 1:
        raise ConfigError("bench.repeats", f"must be >= 1, got {b.repeats}")

    out_dir = r.get("output", "dir", str, None)
    return RunConfig(layout, fn, ev, sampling, b, mode, out_dir)


def load_config(path: str | Path | None) -> RunConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError("--config", f"file not found: {p}")
    return parse_config(p.read_text())
