"""Run configuration: JSON text <-> dataclasses, with named validation diagnostics."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .grid import GridSpec, GridState
from .propagator import Model

SEED_MAX = 2 ** 64 - 1


class ConfigError(ValueError):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


@dataclass
class GridBlock:
    L: float = 16.0
    points: int = 1024
    dt: float = 1e-3


@dataclass
class TimeBlock:
    t_end: float = 2 * math.pi
    samples: int = 16


@dataclass
class InitialBlock:
    """``kind`` is one of hermite_mode, multi_peak, grid_file, random."""

    kind: str = "hermite_mode"
    n: list = field(default_factory=lambda: [0])
    M: float = 1.0
    a: list | None = None
    b: list | None = None
    peaks: list = field(default_factory=list)
    path: str | None = None
    modes: int = 6


@dataclass
class StabilityBlock:
    s: float = 1.0
    delta: float = 1e-3
    deltas: list | None = None
    periods: float = 20.0
    samples_per_period: int = 16
    perturbations: list = field(default_factory=lambda: [{"kind": "mode"}])
    y_max: float = 5.0


@dataclass
class MorseBlock:
    case: str = "I"
    n: list = field(default_factory=lambda: [2])
    cutoff: int = 200
    subspace: str = "even"


@dataclass
class RunConfig:
    model: str = "H"
    d: int = 1
    lam: float = 0.0
    eta: float = 1.0
    cutoff: int | None = None
    seed: int = 0
    initial: InitialBlock = field(default_factory=InitialBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    time: TimeBlock = field(default_factory=TimeBlock)
    stability: StabilityBlock = field(default_factory=StabilityBlock)
    morse: MorseBlock = field(default_factory=MorseBlock)

    @property
    def kappa(self) -> float:
        return self.lam + self.eta * self.initial.M

    def grid_spec(self) -> GridSpec:
        return GridSpec(self.d, self.grid.L, self.grid.points, self.grid.dt)

    def to_dict(self) -> dict:
        return {("lambda" if k == "lam" else k): v for k, v in asdict(self).items()}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


_BLOCKS = {"initial": InitialBlock, "grid": GridBlock, "time": TimeBlock,
           "stability": StabilityBlock, "morse": MorseBlock}


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError("block_not_object", where)
    names = {f.name for f in fields(cls)}
    extra = sorted(set(data) - names)
    if extra:
        raise ConfigError("unknown_key", f"{where}: {', '.join(extra)}")
    return cls(**data)


def from_dict(data: dict) -> RunConfig:
    data = dict(data)
    if "lambda" in data:
        data["lam"] = data.pop("lambda")
    blocks = {k: _build(cls, data.pop(k), k) for k, cls in _BLOCKS.items() if k in data}
    cfg = _build(RunConfig, data, "top level")
    for k, v in blocks.items():
        setattr(cfg, k, v)
    return cfg


def parse(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("malformed_json", str(exc)) from None
    return from_dict(data)


def load(path) -> RunConfig:
    return parse(Path(path).read_text())


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def validate(cfg: RunConfig, command: str | None = None) -> RunConfig:
    """Raise :class:`ConfigError` on the first violated constraint."""
    try:
        Model.parse(cfg.model)
    except ValueError:
        raise ConfigError("unknown_model", str(cfg.model)) from None
    if cfg.d not in (1, 2):
        raise ConfigError("dimension_unsupported", f"d = {cfg.d}")
    for name in ("lam", "eta"):
        if not math.isfinite(getattr(cfg, name)):
            raise ConfigError("nonfinite_parameter", name)
    if not (isinstance(cfg.seed, int) and 0 <= cfg.seed <= SEED_MAX):
        raise ConfigError("seed_out_of_range", str(cfg.seed))
    g = cfg.grid
    if g.points < 64 or g.points & (g.points - 1):
        raise ConfigError("grid_points_invalid", "points must be a power of two >= 64")
    if g.L <= 0 or g.dt <= 0:
        raise ConfigError("grid_nonpositive", "L and dt must be positive")
    if cfg.cutoff is not None and cfg.cutoff < 1:
        raise ConfigError("cutoff_invalid", str(cfg.cutoff))
    if cfg.time.samples < 1 or cfg.time.t_end < 0:
        raise ConfigError("time_invalid", "need samples >= 1 and t_end >= 0")
    ini = cfg.initial
    if ini.kind not in ("hermite_mode", "multi_peak", "grid_file", "random"):
        raise ConfigError("initial_kind_unknown", ini.kind)
    if ini.kind == "grid_file" and not ini.path:
        raise ConfigError("grid_file_missing", "initial.path is required")
    if ini.kind == "multi_peak" and not ini.peaks:
        raise ConfigError("multi_peak_empty", "initial.peaks is empty")
    if ini.kind in ("hermite_mode", "random"):
        if len(_as_list(ini.n)) != cfg.d and ini.kind == "hermite_mode":
            raise ConfigError("mode_dimension_mismatch", f"n = {ini.n} for d = {cfg.d}")
        if any(int(k) < 0 for k in _as_list(ini.n)):
            raise ConfigError("mode_negative", str(ini.n))
    if ini.M <= 0:
        raise ConfigError("mass_nonpositive", str(ini.M))
    needs_kappa = command in ("standing-wave", "stability") or (
        command == "propagate" and ini.kind != "grid_file")
    if needs_kappa and cfg.kappa <= 0:
        raise ConfigError("kappa_nonpositive", f"lambda + eta M = {cfg.kappa:g}")
    if command == "stability":
        st = cfg.stability
        if cfg.lam < 0:
            raise ConfigError("lambda_negative", "stability needs lambda >= 0")
        if ini.kind != "hermite_mode":
            raise ConfigError("stability_needs_mode", "initial.kind must be hermite_mode")
        s_min = 1.0 if Model.parse(cfg.model) is Model.H else 0.5
        if st.s < s_min:
            raise ConfigError("sigma_exponent_too_small", f"s = {st.s} < {s_min}")
        for d in ([st.delta] if st.deltas is None else st.deltas):
            if d < 0:
                raise ConfigError("delta_negative", str(d))
        for p in st.perturbations:
            if p.get("kind") not in ("mode", "boost", "shift", "mass", "random"):
                raise ConfigError("perturbation_kind_unknown", str(p.get("kind")))
    if command == "morse":
        m = cfg.morse
        if str(m.case).upper() not in ("I", "II"):
            raise ConfigError("morse_case_unknown", str(m.case))
        for n in _as_list(m.n):
            if int(n) < 0 or int(n) % 2:
                raise ConfigError("morse_n_odd", f"n = {n} must be a non-negative even integer")
            if int(n) + 2 >= m.cutoff:
                raise ConfigError("cutoff_too_small", f"cutoff {m.cutoff} for n = {n}")
        if m.subspace not in ("even", "full"):
            raise ConfigError("subspace_unknown", m.subspace)
    return cfg


def read_grid_file(path, spec: GridSpec) -> GridState:
    """Load ``x,re,im`` (1-D) or ``x,y,re,im`` (2-D) rows in row-major order."""
    want = ["x", "re", "im"] if spec.d == 1 else ["x", "y", "re", "im"]
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError("grid_file_unreadable", str(exc)) from None
    if not rows or [h.strip() for h in rows[0]] != want:
        raise ConfigError("grid_file_header", f"expected header {','.join(want)}")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if data.shape != (spec.points ** spec.d, len(want)):
        raise ConfigError("grid_file_shape", f"expected {spec.points ** spec.d} rows")
    coords = data[:, :spec.d]
    expect = np.stack([np.broadcast_to(spec.axis(k), spec.shape).ravel() for k in range(spec.d)], axis=1)
    if np.max(np.abs(coords - expect)) > 1e-9 * spec.half_width:
        raise ConfigError("grid_file_coordinates", "coordinates do not match the configured grid")
    values = (data[:, -2] + 1j * data[:, -1]).reshape(spec.shape)
    return GridState(spec, values)


def write_grid_file(path, u: GridState) -> None:
    spec = u.spec
    head = ["x", "re", "im"] if spec.d == 1 else ["x", "y", "re", "im"]
    cols = [np.broadcast_to(spec.axis(k), spec.shape).ravel() for k in range(spec.d)]
    v = u.values.ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for row in zip(*cols, v.real, v.imag):
            w.writerow([format(float(x), ".17g") for x in row])
