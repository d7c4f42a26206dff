"""Scenario files and the shipped preset networks.

A scenario file is YAML with explicit row-major matrices::

    schema_version: 1
    dimension: 2
    channel: {eps: 1.0, alpha: 4.0, fading: {kind: nakagami, m: 2.0}}
    nodes:
      - {id: 0, role: reference, A: [[0, 0], [0, 0]], C: [[1, 0], [0, 1]],
         Q: [[1, 0], [0, 1]], x0: [0, 0], s: 0.0}
      - ...
    run: {t: [10, 50, 100, 500], beta: [0.5], M: 10000, seed: 1, horizon: 1.0, gap_tol: 0.01}

``run.t`` may also be ``{start, stop, step}`` or ``{start, stop, num}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
import yaml

from .cgppf import PathLoss
from .errors import GlcError, ScenarioValidationError
from .lindyn import GlcModel, NodeState
from .predict import FadingKind, FadingModel, Scenario

__all__ = [
    "SCHEMA_VERSION",
    "RunSpec",
    "ScenarioFile",
    "parse_time_grid",
    "loads_scenario_file",
    "dumps_scenario_file",
    "load_scenario_file",
    "load_scenario",
    "write_scenario",
    "list_presets",
    "preset_path",
    "load_preset",
    "build_preset",
    "brownian2d",
    "inertia2d",
    "ucm2d",
    "ucm3d",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunSpec:
    """Default run settings carried by a scenario file."""

    times: Tuple[float, ...] = ()
    betas: Tuple[float, ...] = ()
    M: int = 10000
    seed: int = 0
    horizon: Optional[float] = None
    gap_tol: float = 1e-2


@dataclass(frozen=True)
class ScenarioFile:
    """A validated scenario plus node ids and run settings."""

    scenario: Scenario
    node_ids: Tuple[Any, ...] = ()
    run: RunSpec = field(default_factory=RunSpec)
    schema_version: int = SCHEMA_VERSION


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def _fail(where: str, msg: str):
    raise ScenarioValidationError(f"{where}: {msg}")


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        _fail(where, f"expected a finite number, got {value!r}")
    return float(value)


def _matrix(value, where, shape=None) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        _fail(where, "expected a non-empty row-major list of rows")
    rows = [[_number(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(value)]
    if len({len(r) for r in rows}) != 1:
        _fail(where, "rows have different lengths")
    arr = np.array(rows, dtype=float)
    if shape is not None and arr.shape != shape:
        _fail(where, f"expected shape {shape}, got {arr.shape}")
    return arr


def _vector(value, where, length=None) -> np.ndarray:
    if not isinstance(value, list):
        _fail(where, "expected a list")
    arr = np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)], dtype=float)
    if length is not None and arr.size != length:
        _fail(where, f"expected {length} entries, got {arr.size}")
    return arr


def parse_time_grid(grid, where: str = "t") -> Tuple[float, ...]:
    """Time grid from a list, a ``start:stop:step`` string, or a start/stop/step|num mapping."""
    if grid is None:
        return ()
    if isinstance(grid, str):
        text = grid.strip()
        if not text:
            return ()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                _fail(where, f"range must be start:stop:step, got {grid!r}")
            try:
                start, stop, step = (float(p) for p in parts)
            except ValueError:
                _fail(where, f"range must be numeric, got {grid!r}")
            grid = {"start": start, "stop": stop, "step": step}
        else:
            try:
                return tuple(float(p) for p in text.split(",") if p.strip())
            except ValueError:
                _fail(where, f"expected comma-separated numbers, got {grid!r}")
    if isinstance(grid, (int, float)) and not isinstance(grid, bool):
        return (_number(grid, where),)
    if isinstance(grid, list):
        return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(grid))
    if isinstance(grid, dict):
        start = _number(grid.get("start"), f"{where}.start")
        stop = _number(grid.get("stop"), f"{where}.stop")
        if "num" in grid:
            num = grid["num"]
            if isinstance(num, bool) or not isinstance(num, int) or num < 0:
                _fail(f"{where}.num", f"expected a non-negative integer, got {num!r}")
            return tuple(float(v) for v in np.linspace(start, stop, num))
        step = _number(grid.get("step"), f"{where}.step")
        if step <= 0 or stop < start:
            _fail(where, "range needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + k * step) for k in range(count))
    _fail(where, f"unsupported time grid {grid!r}")


def _parse_fading(value, where) -> FadingModel:
    if value is None or value == "none":
        return FadingModel.none()
    if isinstance(value, str) and value.startswith("nakagami(") and value.endswith(")"):
        try:
            return FadingModel.nakagami(float(value[len("nakagami("):-1]))
        except (ValueError, GlcError) as exc:
            _fail(where, str(exc))
    if isinstance(value, dict):
        kind = value.get("kind")
        if kind == "none":
            return FadingModel.none()
        if kind == "nakagami":
            try:
                return FadingModel.nakagami(_number(value.get("m"), f"{where}.m"))
            except GlcError as exc:
                _fail(where, str(exc))
    _fail(where, f"expected none, nakagami(m) or {{kind, m}}, got {value!r}")


def _parse_node(raw, k, d):
    where = f"nodes[{k}]"
    if not isinstance(raw, dict):
        _fail(where, "expected a mapping")
    missing = [key for key in ("role", "A", "C", "Q", "x0") if key not in raw]
    if missing:
        _fail(where, f"missing field(s) {', '.join(missing)}")
    role = raw["role"]
    if role not in ("reference", "interferer"):
        _fail(f"{where}.role", f"expected reference or interferer, got {role!r}")
    A = _matrix(raw["A"], f"{where}.A")
    n = A.shape[0]
    if A.shape != (n, n):
        _fail(f"{where}.A", f"must be square, got {A.shape}")
    C = _matrix(raw["C"], f"{where}.C", (d, n))
    Q = _matrix(raw["Q"], f"{where}.Q", (n, n))
    x0 = _vector(raw["x0"], f"{where}.x0", n)
    s = _number(raw.get("s", 0.0), f"{where}.s")
    try:
        model = GlcModel(A, C, Q)
        state = NodeState(x0, s)
    except GlcError as exc:
        _fail(where, str(exc))
    return raw.get("id", k), role, (model, state)


def _parse_run(raw) -> RunSpec:
    if raw is None:
        return RunSpec()
    if not isinstance(raw, dict):
        _fail("run", "expected a mapping")
    times = parse_time_grid(raw.get("t"), "run.t")
    betas = raw.get("beta", [])
    if isinstance(betas, (int, float)) and not isinstance(betas, bool):
        betas = [betas]
    betas = tuple(_vector(betas, "run.beta")) if betas else ()
    M = raw.get("M", RunSpec.M)
    if isinstance(M, bool) or not isinstance(M, int) or M < 1:
        _fail("run.M", f"expected a positive integer, got {M!r}")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        _fail("run.seed", f"expected an unsigned 64-bit integer, got {seed!r}")
    horizon = raw.get("horizon")
    horizon = None if horizon is None else _number(horizon, "run.horizon")
    gap_tol = _number(raw.get("gap_tol", RunSpec.gap_tol), "run.gap_tol")
    if gap_tol <= 0:
        _fail("run.gap_tol", "must be positive")
    return RunSpec(tuple(float(t) for t in times), tuple(float(b) for b in betas), M, seed, horizon, gap_tol)


def _from_document(doc) -> ScenarioFile:
    if not isinstance(doc, dict):
        _fail("document", "expected a mapping at the top level")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    d = doc.get("dimension")
    if isinstance(d, bool) or not isinstance(d, int) or not 1 <= d <= 3:
        _fail("dimension", f"expected an integer in 1..3, got {d!r}")
    channel = doc.get("channel")
    if not isinstance(channel, dict):
        _fail("channel", "expected a mapping with eps, alpha, fading")
    try:
        pl = PathLoss(_number(channel.get("eps"), "channel.eps"), _number(channel.get("alpha"), "channel.alpha"))
    except GlcError as exc:
        _fail("channel", str(exc))
    fading = _parse_fading(channel.get("fading"), "channel.fading")
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        _fail("nodes", "expected a non-empty list")
    parsed = [_parse_node(raw, k, d) for k, raw in enumerate(nodes)]
    refs = [k for k, (_, role, _) in enumerate(parsed) if role == "reference"]
    if len(refs) != 1:
        _fail("nodes", f"expected exactly one reference node, found {len(refs)}")
    ids = [node_id for node_id, _, _ in parsed]
    if len(set(map(str, ids))) != len(ids):
        _fail("nodes", "node ids must be unique")
    ref = parsed[refs[0]]
    interferers = [p for p in parsed if p is not ref]
    if not interferers:
        _fail("nodes", "expected at least one interferer")
    try:
        sc = Scenario(ref[2], tuple(p[2] for p in interferers), pl, fading, d)
    except GlcError as exc:
        _fail("nodes", str(exc))
    node_ids = (ref[0],) + tuple(p[0] for p in interferers)
    return ScenarioFile(sc, node_ids, _parse_run(doc.get("run")), version)


def loads_scenario_file(text: str) -> ScenarioFile:
    """Parse and validate scenario YAML text."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark is not None else "document"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioValidationError(f"{where}: YAML parse error: {problem}") from exc
    return _from_document(doc)


def load_scenario_file(path: Union[str, Path]) -> ScenarioFile:
    """Read a scenario file; ``OSError`` propagates for unreadable paths."""
    text = Path(path).read_text(encoding="utf-8")
    return loads_scenario_file(text)


def load_scenario(path: Union[str, Path]) -> Scenario:
    return load_scenario_file(path).scenario


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def _plain(arr) -> list:
    return np.asarray(arr, dtype=float).tolist()


def _fading_doc(f: FadingModel):
    if f.kind is FadingKind.NONE:
        return {"kind": "none"}
    return {"kind": "nakagami", "m": float(f.m)}


def _document(sf: ScenarioFile) -> dict:
    sc = sf.scenario
    ids = list(sf.node_ids) or list(range(sc.N + 1))
    nodes = []
    for node_id, role, (model, state) in zip(
            ids, ["reference"] + ["interferer"] * sc.N, (sc.reference,) + sc.interferers):
        nodes.append({
            "id": node_id,
            "role": role,
            "A": _plain(model.A),
            "C": _plain(model.C),
            "Q": _plain(model.Q),
            "x0": _plain(state.x),
            "s": float(state.s),
        })
    run = sf.run
    run_doc = {
        "t": [float(t) for t in run.times],
        "beta": [float(b) for b in run.betas],
        "M": int(run.M),
        "seed": int(run.seed),
        "gap_tol": float(run.gap_tol),
    }
    if run.horizon is not None:
        run_doc["horizon"] = float(run.horizon)
    return {
        "schema_version": SCHEMA_VERSION,
        "dimension": int(sc.d),
        "channel": {"eps": sc.pathloss.eps, "alpha": sc.pathloss.alpha, "fading": _fading_doc(sc.fading)},
        "nodes": nodes,
        "run": run_doc,
    }


def dumps_scenario_file(obj: Union[Scenario, ScenarioFile]) -> str:
    sf = obj if isinstance(obj, ScenarioFile) else ScenarioFile(obj)
    return yaml.safe_dump(_document(sf), sort_keys=False, default_flow_style=None, width=100)


def write_scenario(obj: Union[Scenario, ScenarioFile], path: Union[str, Path]) -> Path:
    """Write a scenario (or scenario file) as YAML; returns the path."""
    path = Path(path)
    path.write_text(dumps_scenario_file(obj), encoding="utf-8", newline="\n")
    return path


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

_PRESETS = ("brownian2d", "inertia2d", "ucm2d", "ucm3d")
_TABLE_TIMES = (10.0, 50.0, 100.0, 500.0)


def _ucm_block(omega: float) -> np.ndarray:
    return np.array([[0.0, omega], [-omega, 0.0]])


def brownian2d(n_interferers: int = 6, offsets: Optional[Sequence[Sequence[float]]] = None) -> ScenarioFile:
    """Planar Brownian nodes with unit-power noise per axis, all starting at the origin."""
    model = GlcModel(np.zeros((2, 2)), np.eye(2), np.eye(2))
    ref = (model, NodeState(np.zeros(2)))
    if offsets is None:
        offsets = [np.zeros(2)] * n_interferers
    interferers = tuple((model, NodeState(np.asarray(p, dtype=float))) for p in offsets)
    sc = Scenario(ref, interferers, PathLoss(1.0, 4.0), FadingModel.nakagami(2.0), 2)
    run = RunSpec(_TABLE_TIMES, (0.5,), 10000, 20240607, 1.0, 1e-2)
    return ScenarioFile(sc, tuple(range(len(interferers) + 1)), run)


# Velocities from U[-1, 1] (seeded); redraw until every interferer differs from
# the reference by >= 0.5 per axis.
def _inertia_velocities(n_nodes: int = 7, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    while True:
        v = rng.uniform(-1.0, 1.0, size=(n_nodes, 2))
        if np.all(np.abs(v[1:] - v[0]) >= 0.5):
            return np.round(v, 4)


def inertia2d(velocities: Optional[Sequence[Sequence[float]]] = None) -> ScenarioFile:
    """Planar Brownian motion with velocity inertia.

    State ``(p1, v1, p2, v2)``; unit-power noise enters both position
    components, so the relative covariance is ``2 (t - s) I``. Row 0 of
    ``velocities`` belongs to the reference node.
    """
    A = np.zeros((4, 4))
    A[0, 1] = A[2, 3] = 1.0
    C = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
    Q = np.diag([1.0, 0.0, 1.0, 0.0])
    model = GlcModel(A, C, Q)
    v = _inertia_velocities() if velocities is None else np.asarray(velocities, dtype=float)
    nodes = [(model, NodeState(np.array([0.0, vx, 0.0, vy]))) for vx, vy in v]
    sc = Scenario(nodes[0], tuple(nodes[1:]), PathLoss(1.0, 4.0), FadingModel.nakagami(2.0), 2)
    run = RunSpec(_TABLE_TIMES, (0.5,), 10000, 20240607, 1.0, 1e-2)
    return ScenarioFile(sc, tuple(range(len(nodes))), run)


def ucm2d() -> ScenarioFile:
    """Three UAVs circling a target in the plane, singular ``r**-2`` path loss, no fading."""
    layout = [(0.1, (500.0, 500.0)), (-0.1, (-400.0, -300.0)), (0.1, (400.0, 0.0))]
    nodes = [(GlcModel(_ucm_block(w), np.eye(2), np.eye(2)), NodeState(np.array(x0))) for w, x0 in layout]
    sc = Scenario(nodes[0], tuple(nodes[1:]), PathLoss(0.0, 2.0), FadingModel.none(), 2)
    run = RunSpec(tuple(float(t) for t in range(0, 101, 5)), (), 1000, 20240607, None, 1e-2)
    return ScenarioFile(sc, (0, 1, 2), run)


def ucm3d() -> ScenarioFile:
    """Three UAVs circling at different altitudes, noise power 100 per axis, ``eps=1, alpha=2``."""
    def block(omega):
        A = np.zeros((3, 3))
        A[:2, :2] = _ucm_block(omega)
        return A

    layout = [(-0.1, (500.0, 500.0, 500.0)), (0.1, (-400.0, -300.0, 700.0)), (-0.1, (400.0, 0.0, 300.0))]
    nodes = [(GlcModel(block(w), np.eye(3), 100.0 * np.eye(3)), NodeState(np.array(x0))) for w, x0 in layout]
    sc = Scenario(nodes[0], tuple(nodes[1:]), PathLoss(1.0, 2.0), FadingModel.none(), 3)
    run = RunSpec(tuple(float(t) for t in range(0, 101, 5)), (), 1000, 20240607, None, 1e-2)
    return ScenarioFile(sc, (0, 1, 2), run)


_BUILDERS = {"brownian2d": brownian2d, "inertia2d": inertia2d, "ucm2d": ucm2d, "ucm3d": ucm3d}


def list_presets() -> List[str]:
    return list(_PRESETS)


def preset_path(name: str) -> Path:
    """Filesystem path of a shipped preset file (``name`` with or without ``.scn``)."""
    stem = name[:-4] if name.endswith(".scn") else name
    if stem not in _PRESETS:
        raise ScenarioValidationError(f"unknown preset {name!r}; available: {', '.join(_PRESETS)}")
    return Path(str(resources.files("glcinterference") / "presets" / f"{stem}.scn"))


def load_preset(name: str) -> ScenarioFile:
    return load_scenario_file(preset_path(name))


def build_preset(name: str) -> ScenarioFile:
    """Construct a preset in code (the shipped file is generated from this)."""
    stem = name[:-4] if name.endswith(".scn") else name
    if stem not in _BUILDERS:
        raise ScenarioValidationError(f"unknown preset {name!r}")
    return _BUILDERS[stem]()
