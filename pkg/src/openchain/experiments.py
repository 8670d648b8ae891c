"""Scenario configuration, the three comparison experiments, and result output.

Experiments:

* ``steady-fidelity-vs-g``: fidelity between the local and global steady states
  as the inter-oscillator coupling is swept.
* ``exact-timeseries``: fidelity between each steady state and its image under
  the exact finite-bath evolution, as a function of time.
* ``gc-vs-Tr``: critical coupling where the better of the two approximations
  switches, as a function of the bath temperatures.

Everything is deterministic: no clocks and no random numbers enter the results.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .bath import SpectralDensity, discretize
from .errors import ConfigError, InvalidArgumentError
from .exact import assemble, exact_channel
from .gaussian import GaussianState, analytic_equal_temp_fidelity, fidelity
from .markov import global_steady_analytic, local_generator, steady_state
from .params import ChainParams

KINDS = ("steady-fidelity-vs-g", "exact-timeseries", "gc-vs-Tr")
_TOP_KEYS = {
    "omega0", "lambda", "omega_c", "g", "T_left", "T_right", "spectral", "M_left", "M_right",
    "t_max", "t_step", "compare_time", "which", "gc", "output",
}
_GC_KEYS = {"statistic", "plateau_window", "bracket", "tol", "scan_points"}
_OUTPUT_KEYS = {"dir", "format", "svg"}


# ---------------------------------------------------------------------------
# configuration


def _values(spec: Any, name: str) -> tuple[float, ...]:
    """Scalar, explicit list, or ``{"min", "max", "steps"}`` sweep -> tuple of floats."""
    if isinstance(spec, bool):
        raise ConfigError(f"{name}: expected a number, list or sweep")
    if isinstance(spec, (int, float)):
        return (float(spec),)
    if isinstance(spec, list):
        if not spec or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in spec):
            raise ConfigError(f"{name}: list must be a non-empty list of numbers")
        return tuple(float(v) for v in spec)
    if isinstance(spec, dict):
        if set(spec) != {"min", "max", "steps"}:
            raise ConfigError(f"{name}: sweep needs exactly the keys min, max, steps")
        lo, hi, steps = spec["min"], spec["max"], spec["steps"]
        if not isinstance(steps, int) or isinstance(steps, bool) or steps < 2:
            raise ConfigError(f"{name}: steps must be an integer >= 2")
        if not hi > lo:
            raise ConfigError(f"{name}: sweep max must exceed min")
        return tuple(float(v) for v in np.linspace(float(lo), float(hi), steps))
    raise ConfigError(f"{name}: expected a number, list or sweep, got {type(spec).__name__}")


def _number(data: dict, key: str, default: float) -> float:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number")
    return float(value)


def _count(data: dict, key: str, default: int) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{key}: expected a positive integer")
    return value


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario: every sweep is stored as its explicit list of values.

    ``gc_statistic`` selects how the exact-vs-Markovian fidelities are compared
    when searching for the critical coupling: ``"point"`` at ``compare_time`` or
    ``"plateau"`` as the mean over ``plateau_window`` on the ``t_step`` grid.
    """

    omega0: float = 1.0
    lam: float = 0.1
    omega_c: float = 3.0
    g: tuple[float, ...] = tuple(float(v) for v in np.linspace(1e-3, 0.7, 100))
    t_left: tuple[float, ...] = (10.0,)
    t_right: tuple[float, ...] = (10.0,)
    spectral_left: SpectralDensity = field(default_factory=SpectralDensity)
    spectral_right: SpectralDensity = field(default_factory=SpectralDensity)
    m_left: int = 50
    m_right: int = 50
    t_max: float = 50.0
    t_step: float = 0.1
    compare_time: float = 50.0
    which: str = "both"
    gc_statistic: str = "point"
    plateau_window: tuple[float, float] = (20.0, 45.0)
    gc_bracket: tuple[float, float] | None = None
    gc_tol: float = 1e-3
    gc_scan_points: int = 12
    output_dir: str | None = None
    output_format: str = "csv"
    svg: bool = False

    def __post_init__(self):
        try:
            chain = ChainParams(self.omega0, 0.0, self.lam)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc
        for g in self.g:
            if not 0 <= g < chain.g_max:
                raise ConfigError(f"g={g} outside [0, omega0/sqrt(2))")
        for t in self.t_left + self.t_right:
            if t < 0:
                raise ConfigError(f"temperatures must be non-negative, got {t}")
        if self.omega_c <= self.omega0:
            raise ConfigError("omega_c must exceed omega0")
        if not (self.t_step > 0 and self.t_max > 0):
            raise ConfigError("t_max and t_step must be positive")
        if not 0 <= self.compare_time:
            raise ConfigError("compare_time must be non-negative")
        if self.which not in ("local", "global", "both"):
            raise ConfigError(f"which must be local, global or both, got {self.which!r}")
        if self.gc_statistic not in ("point", "plateau"):
            raise ConfigError(f"gc statistic must be point or plateau, got {self.gc_statistic!r}")
        t0, t1 = self.plateau_window
        if not 0 <= t0 < t1:
            raise ConfigError("plateau_window must be an increasing pair of times")
        if self.gc_bracket is None:
            object.__setattr__(self, "gc_bracket", (1e-3, self.omega0 / math.sqrt(2.0) - 0.007))
        lo, hi = self.bracket
        if not 0 < lo < hi < chain.g_max:
            raise ConfigError(f"gc bracket must satisfy 0 < lo < hi < omega0/sqrt(2), got {self.bracket}")
        if not self.gc_tol > 0 or self.gc_scan_points < 2:
            raise ConfigError("gc tol must be positive and scan_points >= 2")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {self.output_format!r}")

    @property
    def bracket(self) -> tuple[float, float]:
        """Bisection interval for ``g_c``; by default ``[1e-3, omega0/sqrt(2) - 0.007]``."""
        return self.gc_bracket

    def chain(self, g: float) -> ChainParams:
        return ChainParams(self.omega0, g, self.lam)

    def times(self) -> np.ndarray:
        n = int(round(self.t_max / self.t_step))
        return np.arange(n + 1) * self.t_step

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        """Build from the JSON layout; a metadata sidecar (``{"config": ...}``) is accepted too."""
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        if "config" in data and "kind" in data:
            data = data["config"]
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        omega_c = _number(data, "omega_c", 3.0)
        spectral = data.get("spectral", {})
        if not isinstance(spectral, dict):
            raise ConfigError("spectral must be an object")
        sides = spectral if set(spectral) & {"left", "right"} else {"left": spectral, "right": spectral}
        if set(sides) - {"left", "right"}:
            raise ConfigError("spectral must be one density or an object with left/right")
        try:
            j = {s: SpectralDensity.from_json(sides.get(s, {}), omega_c) for s in ("left", "right")}
        except InvalidArgumentError as exc:
            raise ConfigError(f"spectral: {exc}") from exc
        gc = data.get("gc", {})
        output = data.get("output", {})
        if not isinstance(gc, dict) or set(gc) - _GC_KEYS:
            raise ConfigError(f"gc must be an object with keys among {sorted(_GC_KEYS)}")
        if not isinstance(output, dict) or set(output) - _OUTPUT_KEYS:
            raise ConfigError(f"output must be an object with keys among {sorted(_OUTPUT_KEYS)}")
        kwargs: dict[str, Any] = dict(
            omega0=_number(data, "omega0", 1.0),
            lam=_number(data, "lambda", 0.1),
            omega_c=omega_c,
            t_left=_values(data.get("T_left", 10.0), "T_left"),
            t_right=_values(data.get("T_right", 10.0), "T_right"),
            spectral_left=j["left"],
            spectral_right=j["right"],
            m_left=_count(data, "M_left", 50),
            m_right=_count(data, "M_right", 50),
            t_max=_number(data, "t_max", 50.0),
            t_step=_number(data, "t_step", 0.1),
            compare_time=_number(data, "compare_time", 50.0),
            which=data.get("which", "both"),
            gc_statistic=gc.get("statistic", "point"),
            gc_tol=_number(gc, "tol", 1e-3),
            gc_scan_points=_count(gc, "scan_points", 12),
            output_format=output.get("format", "csv"),
            svg=bool(output.get("svg", False)),
            output_dir=output.get("dir"),
        )
        if "g" in data:
            kwargs["g"] = _values(data["g"], "g")
        for key, name in (("plateau_window", "plateau_window"), ("bracket", "gc_bracket")):
            if key in gc:
                pair = gc[key]
                if not (isinstance(pair, list) and len(pair) == 2):
                    raise ConfigError(f"gc.{key} must be a two-element list")
                kwargs[name] = (float(pair[0]), float(pair[1]))
        return cls(**kwargs)

    def to_dict(self) -> dict:
        """Resolved JSON layout; ``from_dict(to_dict())`` reproduces this config exactly.

        The output directory is left out so that results written elsewhere from
        the same configuration are byte-identical.
        """
        return {
            "omega0": self.omega0,
            "lambda": self.lam,
            "omega_c": self.omega_c,
            "g": list(self.g),
            "T_left": list(self.t_left),
            "T_right": list(self.t_right),
            "spectral": {"left": self.spectral_left.to_json(), "right": self.spectral_right.to_json()},
            "M_left": self.m_left,
            "M_right": self.m_right,
            "t_max": self.t_max,
            "t_step": self.t_step,
            "compare_time": self.compare_time,
            "which": self.which,
            "gc": {
                "statistic": self.gc_statistic,
                "plateau_window": list(self.plateau_window),
                "bracket": list(self.bracket),
                "tol": self.gc_tol,
                "scan_points": self.gc_scan_points,
            },
            "output": {"format": self.output_format, "svg": self.svg},
        }


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ScenarioConfig.from_dict(data)


def _single(values: tuple[float, ...], name: str) -> float:
    if len(values) != 1:
        raise ConfigError(f"{name} must be a single value for this experiment, got {len(values)}")
    return values[0]


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    kind: str
    columns: dict[str, np.ndarray]
    metadata: dict

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown result kind {self.kind!r}")
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise InvalidArgumentError("result columns must have equal length")


def _metadata(kind: str, cfg: ScenarioConfig, **extra) -> dict:
    meta = {"kind": kind, "version": __version__, "config": cfg.to_dict()}
    if extra:
        meta["diagnostics"] = extra
    return meta


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# steady states


def steady_pair(cfg: ScenarioConfig, g: float, t_left: float, t_right: float) -> tuple[GaussianState, GaussianState]:
    """Local (numerical Lyapunov) and global (closed-form) steady states in the site basis."""
    chain = cfg.chain(g)
    jl, jr = cfg.spectral_left, cfg.spectral_right
    local = steady_state(local_generator(chain, jl, jr, t_left, t_right))
    glob = global_steady_analytic(chain, jl, jr, t_left, t_right)
    return local, glob


def _steady_point(args) -> tuple[float, float]:
    cfg, g, tl, tr, analytic = args
    local, glob = steady_pair(cfg, g, tl, tr)
    f = fidelity(local, glob)
    fa = analytic_equal_temp_fidelity(cfg.omega0, g, tl, cfg.spectral_left) if analytic else math.nan
    return f, fa


def run_steady_fidelity_sweep(cfg: ScenarioConfig, jobs: int = 1) -> ScenarioResult:
    """Columns ``g, F``; ``F_analytic`` is added when both baths are identical."""
    tl, tr = _single(cfg.t_left, "T_left"), _single(cfg.t_right, "T_right")
    analytic = tl == tr and cfg.spectral_left == cfg.spectral_right
    points = _map(_steady_point, [(cfg, g, tl, tr, analytic) for g in cfg.g], jobs)
    columns = {"g": np.array(cfg.g), "F": np.array([p[0] for p in points])}
    if analytic:
        columns["F_analytic"] = np.array([p[1] for p in points])
    return ScenarioResult("steady-fidelity-vs-g", columns, _metadata("steady-fidelity-vs-g", cfg))


# ---------------------------------------------------------------------------
# exact evolution


@dataclass(frozen=True, eq=False)
class ExactComparison:
    """Joint system and both steady states for one ``(g, T_l, T_r)``."""

    system: Any
    local: GaussianState
    glob: GaussianState

    def fidelities(self, t: float) -> tuple[float, float]:
        fl = fidelity(self.local, exact_channel(self.system, self.local, t))
        fg = fidelity(self.glob, exact_channel(self.system, self.glob, t))
        return fl, fg


def exact_comparison(cfg: ScenarioConfig, g: float, t_left: float, t_right: float) -> ExactComparison:
    left = discretize(cfg.spectral_left, cfg.m_left, t_left)
    right = discretize(cfg.spectral_right, cfg.m_right, t_right)
    local, glob = steady_pair(cfg, g, t_left, t_right)
    return ExactComparison(assemble(cfg.chain(g), left, right), local, glob)


def recurrence_onset(t: np.ndarray, f: np.ndarray, rebound: float = 0.01) -> float:
    """First time the curve rises more than ``rebound`` above its running minimum; ``nan`` if never."""
    running = np.minimum.accumulate(f)
    hit = np.nonzero(f - running > rebound)[0]
    return float(t[hit[0]]) if hit.size else math.nan


def plateau_interval(t: np.ndarray, f: np.ndarray, slope: float = 1e-4) -> tuple[float, float]:
    """Longest interval with ``|dF/dt| < slope``, skipping the flat start at ``t = 0``."""
    flat = np.abs(np.gradient(f, t)) < slope
    start = int(np.argmax(~flat)) if not flat.all() else 0
    best, best_len, i = (math.nan, math.nan), 0, start
    while i < len(t):
        if flat[i]:
            j = i
            while j + 1 < len(t) and flat[j + 1]:
                j += 1
            if j - i + 1 > best_len:
                best, best_len = (float(t[i]), float(t[j])), j - i + 1
            i = j + 1
        else:
            i += 1
    return best


def run_exact_timeseries(cfg: ScenarioConfig, which: str | None = None) -> ScenarioResult:
    """Columns ``t`` and ``F_loc`` and/or ``F_glb`` on the ``[0, t_max]`` grid."""
    which = cfg.which if which is None else which
    if which not in ("local", "global", "both"):
        raise ConfigError(f"which must be local, global or both, got {which!r}")
    g = _single(cfg.g, "g")
    tl, tr = _single(cfg.t_left, "T_left"), _single(cfg.t_right, "T_right")
    comp = exact_comparison(cfg, g, tl, tr)
    t = cfg.times()
    columns: dict[str, np.ndarray] = {"t": t}
    selected = []
    if which in ("local", "both"):
        selected.append(("F_loc", comp.local))
    if which in ("global", "both"):
        selected.append(("F_glb", comp.glob))
    diagnostics = {}
    for name, state in selected:
        f = np.array([fidelity(state, exact_channel(comp.system, state, ti)) for ti in t])
        columns[name] = f
        diagnostics[name] = {"recurrence_onset": recurrence_onset(t, f), "plateau": list(plateau_interval(t, f))}
    cfg = replace(cfg, which=which)
    return ScenarioResult("exact-timeseries", columns, _metadata("exact-timeseries", cfg, **diagnostics))


# ---------------------------------------------------------------------------
# critical coupling


def fidelity_gap(cfg: ScenarioConfig, g: float, t_left: float, t_right: float) -> float:
    """``F_loc - F_glb`` under the exact evolution, using the configured statistic."""
    comp = exact_comparison(cfg, g, t_left, t_right)
    if cfg.gc_statistic == "point":
        fl, fg = comp.fidelities(cfg.compare_time)
        return fl - fg
    t = cfg.times()
    t0, t1 = cfg.plateau_window
    window = t[(t >= t0 - 1e-12) & (t <= t1 + 1e-12)]
    if window.size == 0:
        raise ConfigError("plateau window contains no grid times")
    pairs = np.array([comp.fidelities(ti) for ti in window])
    return float(np.mean(pairs[:, 0] - pairs[:, 1]))


@dataclass(frozen=True)
class CriticalCoupling:
    """``status``: ``bracketed``, ``global-everywhere`` (``g_c = 0``) or ``above-interval``.

    For ``above-interval`` the local approach wins on the whole bracket and
    ``g_c`` holds the bracket top as a lower bound, not an estimate.
    """

    g_c: float
    status: str
    evaluations: int


def find_gc(cfg: ScenarioConfig, t_left: float | None = None, t_right: float | None = None) -> CriticalCoupling:
    """Coupling where ``F_loc - F_glb`` changes sign, to absolute tolerance ``gc_tol``.

    A geometric scan over the bracket locates the first sign change, which is
    then refined by bisection.
    """
    tl = _single(cfg.t_left, "T_left") if t_left is None else t_left
    tr = _single(cfg.t_right, "T_right") if t_right is None else t_right
    lo, hi = cfg.bracket
    grid = np.geomspace(lo, hi, cfg.gc_scan_points)
    gap = [fidelity_gap(cfg, g, tl, tr) for g in grid]
    count = len(grid)
    if gap[0] <= 0 and all(d <= 0 for d in gap):
        return CriticalCoupling(0.0, "global-everywhere", count)
    change = [k for k in range(len(grid) - 1) if (gap[k] > 0) != (gap[k + 1] > 0)]
    if not change:
        return CriticalCoupling(float(hi), "above-interval", count)
    k = change[0]
    a, b = grid[k], grid[k + 1]
    sign_a = gap[k] > 0
    while b - a > cfg.gc_tol:
        mid = 0.5 * (a + b)
        count += 1
        if (fidelity_gap(cfg, mid, tl, tr) > 0) == sign_a:
            a = mid
        else:
            b = mid
    return CriticalCoupling(float(0.5 * (a + b)), "bracketed", count)


def _gc_point(args) -> CriticalCoupling:
    cfg, tl, tr = args
    return find_gc(cfg, tl, tr)


def run_gc_scan(cfg: ScenarioConfig, jobs: int = 1) -> ScenarioResult:
    """Columns ``T_l, T_r, g_c`` over every ``(T_left, T_right)`` pair of the config."""
    pairs = [(tl, tr) for tl in cfg.t_left for tr in cfg.t_right]
    found = _map(_gc_point, [(cfg, tl, tr) for tl, tr in pairs], jobs)
    columns = {
        "T_l": np.array([p[0] for p in pairs], float),
        "T_r": np.array([p[1] for p in pairs], float),
        "g_c": np.array([f.g_c for f in found]),
    }
    diagnostics = {"status": [f.status for f in found], "evaluations": [f.evaluations for f in found]}
    return ScenarioResult("gc-vs-Tr", columns, _metadata("gc-vs-Tr", cfg, **diagnostics))


# ---------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def to_csv(result: ScenarioResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(result.columns)
    writer.writerow(names)
    for row in zip(*(result.columns[n] for n in names)):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> dict[str, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    names, body = rows[0], rows[1:]
    return {n: np.array([float(r[i]) for r in body]) for i, n in enumerate(names)}


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump(obj, sort_keys: bool = True) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=sort_keys) + "\n"


def _plot(result: ScenarioResult, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = list(result.columns)
    x, ys = names[0], names[1:]
    if result.kind == "gc-vs-Tr":
        x, ys = "T_r", ["g_c"]
    with matplotlib.rc_context({"svg.hashsalt": "openchain", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        if result.kind == "gc-vs-Tr":
            tl = result.columns["T_l"]
            for value in dict.fromkeys(tl.tolist()):
                sel = tl == value
                ax.plot(result.columns["T_r"][sel], result.columns["g_c"][sel], "o-", label=f"T_l={value:g}")
        else:
            for y in ys:
                ax.plot(result.columns[x], result.columns[y], label=y)
        ax.set_xlabel(x)
        ax.set_ylabel(ys[0] if len(ys) == 1 else "fidelity")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def emit(result: ScenarioResult, out_dir: str | Path, fmt: str = "csv", svg: bool = False) -> list[Path]:
    """Write ``<kind>.<fmt>``, ``<kind>.meta.json`` and optionally ``<kind>.svg``; returns the paths."""
    if fmt not in ("csv", "json"):
        raise InvalidArgumentError(f"unknown output format {fmt!r}")
    out = Path(out_dir)
    data_path = out / f"{result.kind}.{fmt}"
    meta_path = out / f"{result.kind}.meta.json"
    if fmt == "csv":
        body = to_csv(result)
    else:
        # column order is part of the format, so keys keep insertion order here
        body = _dump({"kind": result.kind, "columns": {k: v.tolist() for k, v in result.columns.items()}}, sort_keys=False)
    written = [data_path, meta_path]
    try:
        out.mkdir(parents=True, exist_ok=True)
        data_path.write_text(body)
        meta_path.write_text(_dump(result.metadata))
        if svg:
            svg_path = out / f"{result.kind}.svg"
            _plot(result, svg_path)
            written.append(svg_path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write results: {exc.strerror}", exc.filename) from exc
    return written


def run(kind: str, cfg: ScenarioConfig, jobs: int = 1) -> ScenarioResult:
    if kind == "steady-fidelity-vs-g":
        return run_steady_fidelity_sweep(cfg, jobs)
    if kind == "exact-timeseries":
        return run_exact_timeseries(cfg)
    if kind == "gc-vs-Tr":
        return run_gc_scan(cfg, jobs)
    raise InvalidArgumentError(f"unknown scenario kind {kind!r}")
