"""Time evolution in wavenumber space.

The state is transformed once with the per-register QFT core, stepped
``N_t`` times with a symmetric Trotter product of per-axis propagators, and
transformed back.  Each propagator is the exponential of a time-qubit Pauli
times the lattice dispersion of one register, compiled from IZ strings.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, LayoutError, ParameterError, ResourceError
from .pauli_iz import IZSum, affine, exp_iz_mpo, index_operator, reverse_strings, sin_dispersion
from .qft_mpo import FORWARD_SIGN, apply_qft
from .registers import Layout
from .tensor_core import EXACT, SvdOptions
from .tt import Mpo, Mps, spread_mpo, zip_up

PAULI_ORDER = ("X", "Y", "Z")
PLAN_KINDS = ("exact", "small_angle")


@dataclass(frozen=True)
class EvolveConfig:
    """Step size, horizon and truncation settings for one run.

    Attributes:
        dt: time step; negative values run backwards.
        t_final: final time, ``>= 0``.
        svd: truncation applied after every operator application.
        eps_pauli: coefficient floor for the dispersion IZ sums.
        record_diagnostics: collect per-step statistics.
        bond_cap: hard limit on the state bond dimension.
        operator_svd: truncation used while compiling propagators and the QFT
            core.  Defaults to the square of the state cutoff: for a unitary
            the relative cutoff ``c`` leaves entry errors near ``sqrt(c)``, so
            squaring keeps the operator error at the level of the state
            truncation.
    """

    dt: float = 0.0005
    t_final: float = 0.3
    svd: SvdOptions = field(default_factory=lambda: SvdOptions(1e-14))
    eps_pauli: float = 1e-8
    record_diagnostics: bool = True
    bond_cap: int = 256
    operator_svd: SvdOptions | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.dt) or self.dt == 0:
            raise ParameterError(f"dt must be finite and nonzero, got {self.dt}")
        if not self.t_final >= 0 or not math.isfinite(self.t_final):
            raise ParameterError(f"t_final must be finite and >= 0, got {self.t_final}")
        if not self.eps_pauli >= 0:
            raise ParameterError(f"eps_pauli must be >= 0, got {self.eps_pauli}")
        if self.bond_cap < 1:
            raise ParameterError(f"bond_cap must be >= 1, got {self.bond_cap}")

    @property
    def op_svd(self) -> SvdOptions:
        if self.operator_svd is not None:
            return self.operator_svd
        return SvdOptions(self.svd.cutoff**2)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / abs(self.dt)))


@dataclass
class Diagnostics:
    """Per-step statistics; all lists have one entry per Trotter step."""

    max_bond: list[int] = field(default_factory=list)
    norm: list[float] = field(default_factory=list)
    discarded: list[float] = field(default_factory=list)
    wall_ms: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.max_bond)

    def record(self, bond: int, nrm: float, disc: float, ms: float) -> None:
        self.max_bond.append(int(bond))
        self.norm.append(float(nrm))
        self.discarded.append(float(disc))
        self.wall_ms.append(float(ms))

    def rows(self):
        for k in range(len(self)):
            yield k + 1, self.max_bond[k], self.norm[k], self.discarded[k], self.wall_ms[k]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "max_bond", "norm", "discarded_weight", "wall_ms"])
            for step, bond, nrm, disc, ms in self.rows():
                w.writerow([step, bond, f"{nrm:.17g}", f"{disc:.6e}", f"{ms:.3f}"])


@dataclass(frozen=True)
class TrotterPlan:
    """Factors of one symmetric Trotter step, applied left to right.

    Attributes:
        factors: ``(axis, Mpo)`` in application order.
        layout: register layout including the time qubit.
        generators: reversed-string generator per axis, kept for rebuilding.
        paulis: time-qubit Pauli per axis.
        kind: ``"exact"`` (lattice dispersion) or ``"small_angle"`` (linearised).
    """

    factors: tuple[tuple[str, Mpo], ...]
    layout: Layout
    generators: dict
    paulis: dict
    kind: str = "exact"
    dt: float = 0.0

    def __len__(self) -> int:
        return len(self.factors)


def pauli_assignment(layout: Layout) -> dict[str, str]:
    """Axis to time-qubit Pauli, by axis position: first X, second Y, third Z."""
    return {label: PAULI_ORDER[k] for k, label in enumerate(layout.labels)}


def trotter_schedule(layout: Layout) -> list[tuple[str, float]]:
    """Palindromic ``(axis, coeff)`` sequence for one step."""
    labels = layout.labels
    if len(labels) == 1:
        return [(labels[0], 1.0)]
    if len(labels) == 2:
        return [(labels[0], 0.5), (labels[1], 1.0), (labels[0], 0.5)]
    return [(labels[0], 0.5), (labels[1], 0.5), (labels[2], 1.0), (labels[1], 0.5), (labels[0], 0.5)]


def _require_time(layout: Layout) -> None:
    if not layout.has_time_qubit:
        raise LayoutError("evolution needs a layout with a time qubit")


def dispersion_generator(n: int, eps_pauli: float = 0.0) -> IZSum:
    """``N sin(2 pi k / N)`` in bit-reversed wavenumber order."""
    return reverse_strings(sin_dispersion(n, eps_pauli))


def linear_generator(n: int) -> IZSum:
    """``2 pi k`` with ``k`` the signed wavenumber, in bit-reversed order.

    The centred index ``i - N/2`` becomes the signed wrap-around wavenumber
    once the most significant bit is flipped, which negates every term that
    has ``Z`` on that qubit.
    """
    big_n = 2**n
    centred = affine(index_operator(n), 2 * math.pi, -2 * math.pi * (big_n // 2))
    msb = 1 << (n - 1)
    flipped = IZSum({m: (-c if m & msb else c) for m, c in centred.terms.items()}, n)
    return reverse_strings(flipped)


def _place(op: Mpo, axis: str, layout: Layout) -> Mpo:
    sites = [0] + list(layout.register_span(axis))
    return spread_mpo(op, sites, layout.n_total)


def build_direction_propagator(
    axis: str,
    coeff: float,
    layout: Layout,
    cfg: EvolveConfig,
    pauli: str | None = None,
    generator: IZSum | None = None,
) -> Mpo:
    """``exp(-i coeff dt sigma (x) D_axis)`` on the full chain.

    Args:
        axis: register label.
        coeff: fraction of the time step (1/2 for split factors).
        layout: layout with a time qubit.
        cfg: supplies ``dt``, ``eps_pauli`` and the truncation.
        pauli: time-qubit Pauli; defaults to the positional assignment.
        generator: diagonal generator to use instead of the lattice dispersion.
    """
    _require_time(layout)
    n = layout.n_of(axis)
    pauli = pauli or pauli_assignment(layout)[axis]
    gen = generator if generator is not None else dispersion_generator(n, cfg.eps_pauli)
    local = exp_iz_mpo(gen, -1j * coeff * cfg.dt, pauli, cfg.op_svd)
    return _place(local, axis, layout)


def build_trotter_step(layout: Layout, cfg: EvolveConfig, kind: str = "exact") -> TrotterPlan:
    """One symmetric Trotter step; identical factors are built once and shared."""
    _require_time(layout)
    if kind not in PLAN_KINDS:
        raise ParameterError(f"kind must be one of {PLAN_KINDS}, got {kind!r}")
    paulis = pauli_assignment(layout)
    gens = {
        a: (dispersion_generator(n, cfg.eps_pauli) if kind == "exact" else linear_generator(n))
        for a, n in layout.axes
    }
    cache: dict[tuple[str, float], Mpo] = {}
    factors = []
    for axis, coeff in trotter_schedule(layout):
        key = (axis, coeff)
        if key not in cache:
            cache[key] = build_direction_propagator(axis, coeff, layout, cfg, paulis[axis], gens[axis])
        factors.append((axis, cache[key]))
    return TrotterPlan(tuple(factors), layout, gens, paulis, kind, cfg.dt)


def small_angle_propagator(
    axis: str, t: float, layout: Layout, pauli: str | None = None, opts: SvdOptions = EXACT
) -> Mpo:
    """``exp(-i t sigma (x) 2 pi k)`` on one register, ``k`` the signed wavenumber."""
    _require_time(layout)
    pauli = pauli or pauli_assignment(layout)[axis]
    local = exp_iz_mpo(linear_generator(layout.n_of(axis)), -1j * t, pauli, opts)
    return _place(local, axis, layout)


def trotter_step(psi: Mps, plan: TrotterPlan, opts: SvdOptions) -> tuple[Mps, float]:
    """Apply every factor of ``plan`` once; returns the state and discarded weight."""
    disc = 0.0
    for _, op in plan.factors:
        psi, d = zip_up(op, psi, opts)
        disc += d
    return psi, disc


def evolve(psi0: Mps, plan: TrotterPlan, cfg: EvolveConfig, sign: int = FORWARD_SIGN) -> tuple[Mps, Diagnostics]:
    """``Q^dagger U^{N_t} Q |psi0>`` with per-step diagnostics.

    Raises:
        DimensionError: if the state does not match the plan layout.
        ResourceError: if the bond dimension exceeds ``cfg.bond_cap``.
    """
    layout = plan.layout
    if psi0.n_sites != layout.n_total:
        raise DimensionError(f"state has {psi0.n_sites} sites, layout expects {layout.n_total}")
    if not math.isclose(plan.dt, cfg.dt, rel_tol=1e-15, abs_tol=0.0):
        raise ParameterError(f"plan was built for dt={plan.dt}, config has dt={cfg.dt}")
    diag = Diagnostics()
    psi = apply_qft(psi0, layout, inverse=False, opts=cfg.svd, sign=sign, build_opts=cfg.op_svd)
    total_disc = 0.0
    for step in range(cfg.n_steps):
        t0 = time.perf_counter()
        psi, disc = trotter_step(psi, plan, cfg.svd)
        total_disc += disc
        if psi.max_bond > cfg.bond_cap:
            raise ResourceError(
                f"bond dimension {psi.max_bond} exceeds the cap {cfg.bond_cap} at step {step + 1}"
            )
        if cfg.record_diagnostics:
            ms = (time.perf_counter() - t0) * 1e3
            diag.record(psi.max_bond, psi.norm(), total_disc, ms)
    out = apply_qft(psi, layout, inverse=True, opts=cfg.svd, sign=sign, build_opts=cfg.op_svd)
    return out, diag


def evolve_to(
    psi0: Mps, layout: Layout, cfg: EvolveConfig, kind: str = "exact"
) -> tuple[Mps, Diagnostics]:
    """Build the plan for ``cfg`` and run :func:`evolve`."""
    return evolve(psi0, build_trotter_step(layout, cfg, kind), cfg)


def norm_drift_bound(cfg: EvolveConfig, factor: float = 10.0) -> float:
    """Allowed loss of norm over a run, ``factor * N_t * cutoff``."""
    return factor * cfg.n_steps * cfg.svd.cutoff


def max_bonds(diag: Diagnostics) -> int:
    return int(np.max(diag.max_bond)) if len(diag) else 0


__all__: Sequence[str] = (
    "EvolveConfig",
    "Diagnostics",
    "TrotterPlan",
    "pauli_assignment",
    "trotter_schedule",
    "dispersion_generator",
    "linear_generator",
    "build_direction_propagator",
    "build_trotter_step",
    "small_angle_propagator",
    "trotter_step",
    "evolve",
    "evolve_to",
)
