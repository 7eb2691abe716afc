"""End-to-end experiment: grow -> per phase (couple, synchronize, rewire,
repair, analyze) -> reports.

The network grows while it synchronizes.  Growth steps of the generator are
split into ``phases`` equal windows; phase ``p`` takes the previous phase's
(rewired, repaired) graph, replays the growth events of window ``p`` on top
of it and gives newly born nodes fresh random states.  That graph and its
states form the phase snapshot; everything computed in the phase derives
from the snapshot plus per-phase random streams, so a single phase can be
rerun in isolation.

Randomness: one master seed is split into independent streams (growth,
initial states, rewiring, bootstrap) so that toggling one component never
perturbs another's draws.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import json
import math
import os
import platform
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from sfsync import __version__, kernels
from sfsync.analysis import PhaseReport, analyze_graph
from sfsync.centrality import MEASURES
from sfsync.dynamics import (COUPLING_MODES, LOCAL_DYNAMICS, StateVector,
                             build_centrality_coupling, build_coupling_from_graph, cap_for_euler,
                             local_dynamics, run_sync, SyncResult)
from sfsync.errors import ConfigInvalid, PhaseError, SfsyncError
from sfsync.evolution import RewireRule, repair_isolated, rewire_phase
from sfsync.generator import GenParams, GrowthTrace, grow
from sfsync.graph import Graph, PhaseSnapshot, isolated_nodes, write_edgelist

# seed-stream identifiers
STREAM_GROWTH, STREAM_STATES, STREAM_REWIRE, STREAM_BOOTSTRAP = range(4)


@dataclass
class ExperimentConfig:
    # growth
    n_target: int = 1000
    alpha: float = 0.41
    beta: float = 0.54
    gamma: float = 0.05
    delta_in: float = 0.2
    delta_out: float = 0.0
    # coupling; "diffusive" is edge coupling with c_ij = strength
    coupling: str = "closeness"
    strength: float = 1.0
    edge_masked: bool = True
    literal: bool = False
    pagerank_coupling_damping: float = 1.0
    # scale strength per phase so that h * max|c_ii| <= 1 (forward-Euler stability)
    stability_cap: bool = True
    # local dynamics
    dynamics: str = "linear_decay"
    dynamics_a: float = 0.0
    dynamics_r: float = 1.0
    # integrator
    h: float = 0.01
    steps: int = 5000
    record_every: int = 50
    # evolution
    theta: float = 0.5
    d_low: float = 2
    p_drop: float = 0.3
    growth_edges: int | None = None
    growth_fraction: float = 0.15
    repair: bool = True
    # analysis
    phases: int = 30
    bootstrap: int = 200
    pagerank_damping: float = 0.85
    correlation: str = "pearson"
    threshold: float = 0.80
    # run
    seed: int = 0
    out: str | None = None

    def validate(self) -> "ExperimentConfig":
        try:
            if self.phases < 1:
                raise ConfigInvalid("phases must be >= 1")
            if self.coupling not in COUPLING_MODES[1:] + ("diffusive",):
                raise ConfigInvalid(f"unknown coupling {self.coupling!r}")
            if self.dynamics not in LOCAL_DYNAMICS:
                raise ConfigInvalid(f"unknown dynamics {self.dynamics!r}")
            if self.h <= 0 or self.steps < 0 or self.record_every < 1:
                raise ConfigInvalid("h must be > 0, steps >= 0, record_every >= 1")
            if self.strength <= 0:
                raise ConfigInvalid("strength must be > 0")
            if self.bootstrap < 0:
                raise ConfigInvalid("bootstrap must be >= 0")
            if self.correlation not in ("pearson", "spearman"):
                raise ConfigInvalid(f"unknown correlation {self.correlation!r}")
            if not (0 <= self.seed < 2**64):
                raise ConfigInvalid("seed must be an unsigned 64-bit integer")
            self.gen_params().validate()
            self.rewire_rule().validate()
        except SfsyncError as exc:
            if isinstance(exc, ConfigInvalid):
                raise
            raise ConfigInvalid(str(exc)) from exc
        return self

    def gen_params(self) -> GenParams:
        base = GenParams(self.alpha, self.beta, self.gamma, self.delta_in, self.delta_out,
                         self.n_target, seed=derive_seed(self.seed, STREAM_GROWTH))
        window = max(1, math.ceil(base.expected_steps() / self.phases))
        return dataclasses.replace(base, snapshot_every=window)

    def rewire_rule(self) -> RewireRule:
        return RewireRule(self.theta, self.d_low, self.p_drop, self.growth_edges,
                          self.growth_fraction)

    def local(self):
        if self.dynamics == "linear_decay":
            return local_dynamics("linear_decay", a=self.dynamics_a)
        if self.dynamics == "logistic":
            return local_dynamics("logistic", r=self.dynamics_r)
        return local_dynamics(self.dynamics)

    def state_dim(self) -> int:
        return 3 if self.dynamics == "lorenz" else 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# -- config file -----------------------------------------------------------
# Flat "key = value" text, '#' comments, keys in any order, every key optional.

def _coerce(name, raw, ftype):
    raw = raw.strip()
    if raw.lower() in ("none", "auto", "") and "None" in str(ftype):
        return None
    try:
        if "bool" in str(ftype):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "int" in str(ftype) and "float" not in str(ftype):
            return int(raw)
        if "float" in str(ftype):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigInvalid(f"bad value for {name}: {raw!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), delimiters=("=", ":"))
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigInvalid(str(exc)) from None
    fields = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for key, raw in parser["experiment"].items():
        name = key.replace("-", "_").replace(".", "_")
        if name not in fields:
            raise ConfigInvalid(f"unknown config key {key!r}")
        values[name] = _coerce(name, raw, fields[name])
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for k, v in cfg.to_dict().items():
        if v is None:
            v = "none"
        elif isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


# -- seeds -----------------------------------------------------------------

def derive_seed(master: int, stream: int, *key: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(stream,) + tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def stream_rng(master: int, stream: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=(stream,) + tuple(key)))


# -- phases ----------------------------------------------------------------

@dataclass
class PhaseOutcome:
    snapshot: PhaseSnapshot
    sync: SyncResult
    graph: Graph          # after rewire and repair; what the report describes
    report: PhaseReport
    removed_edges: list
    added_edges: list
    repaired_nodes: list


def _coupling(cfg: ExperimentConfig, g: Graph):
    inner = np.eye(cfg.state_dim())
    if cfg.coupling == "diffusive":
        spec = build_coupling_from_graph(g, cfg.strength, inner=inner, literal=cfg.literal)
    else:
        spec = build_centrality_coupling(g, cfg.coupling, cfg.strength, cfg.edge_masked,
                                         inner=inner,
                                         pagerank_damping=cfg.pagerank_coupling_damping,
                                         literal=cfg.literal)
    if cfg.stability_cap:
        spec = cap_for_euler(spec, cfg.h)
    return spec


def run_phase(cfg: ExperimentConfig, snapshot: PhaseSnapshot) -> PhaseOutcome:
    """Synchronize, rewire, repair and analyze one phase snapshot."""
    p = snapshot.phase
    g = snapshot.graph
    spec = _coupling(cfg, g)
    sync = run_sync(snapshot, spec, cfg.local(), cfg.h, cfg.steps, cfg.record_every)
    rewired, log = rewire_phase(g, sync.final, cfg.rewire_rule(), stream_rng(cfg.seed, STREAM_REWIRE, p))
    lonely = isolated_nodes(rewired)
    repaired = []
    if cfg.repair and rewired.n_nodes >= 2:
        res = repair_isolated(rewired)
        repaired = [v for v in lonely if v != res.hub]
        rewired = res.graph
    rewired.freeze()
    report = analyze_graph(rewired, phase=p, isolated_before_repair=len(lonely),
                           damping=cfg.pagerank_damping, bootstrap_samples=cfg.bootstrap,
                           rng=stream_rng(cfg.seed, STREAM_BOOTSTRAP, p),
                           method=cfg.correlation, threshold=cfg.threshold)
    return PhaseOutcome(snapshot, sync, rewired, report, log.removed_edges, log.added_edges,
                        repaired)


def phase_windows(trace: GrowthTrace, phases: int) -> list[list]:
    """Split the growth events into ``phases`` windows of ``snapshot_every`` steps;
    the last window takes whatever remains."""
    size = trace.params.snapshot_every
    windows = [[] for _ in range(phases)]
    for ev in trace.events:
        windows[min((ev.step - 1) // size, phases - 1)].append(ev)
    return windows


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    outcomes: list[PhaseOutcome]
    manifest: dict = field(default_factory=dict)

    @property
    def reports(self) -> list[PhaseReport]:
        return [o.report for o in self.outcomes]


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    cfg.validate()
    params = cfg.gen_params()
    trace = grow(params)
    windows = phase_windows(trace, cfg.phases)
    dim = cfg.state_dim()
    g = Graph(3)
    for u, v in ((0, 1), (1, 2), (2, 0)):
        g.add_edge(u, v)
    states = np.empty((0, dim))
    outcomes = []
    for p in range(cfg.phases):
        g = g.copy()
        for ev in windows[p]:
            while g.n_nodes <= max(ev.u, ev.v):
                g.add_node()
            g.add_edge(ev.u, ev.v)
        born = g.n_nodes - states.shape[0]
        if born:
            fresh = stream_rng(cfg.seed, STREAM_STATES, p).uniform(-1.0, 1.0, size=(born, dim))
            states = np.vstack([states, fresh])
        step = windows[p][-1].step if windows[p] else (outcomes[-1].snapshot.step if outcomes else 0)
        snap = PhaseSnapshot(g.freeze(), StateVector(states), phase=p, step=step)
        try:
            out = run_phase(cfg, snap)
        except SfsyncError as exc:
            raise PhaseError(p, exc) from exc
        outcomes.append(out)
        g = out.graph
        states = out.sync.final.values
    result = ExperimentResult(cfg, outcomes, _manifest(cfg, params))
    if write and cfg.out:
        write_result(result, cfg.out)
    return result


def _manifest(cfg, params) -> dict:
    return {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "stream_seeds": {"growth": params.seed},
        "snapshot_every": params.snapshot_every,
        "versions": {"sfsync": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version(), "kernels": kernels.BACKEND},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }


# -- output ----------------------------------------------------------------

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def write_result(result: ExperimentResult, outdir) -> Path:
    outdir = Path(outdir)
    cfg = result.config
    _atomic_write(outdir / "manifest.json", json.dumps(result.manifest, indent=2, sort_keys=True) + "\n")
    _atomic_write(outdir / "config.txt", dump_config(cfg))
    _atomic_write(outdir / "reports.jsonl", _jsonl(r.to_json() for r in result.reports))
    _atomic_write(outdir / "events.jsonl", _jsonl(
        {"phase": o.snapshot.phase,
         "removed_edges": [list(e) for e in o.removed_edges],
         "added_edges": [list(e) for e in o.added_edges],
         "repaired_nodes": o.repaired_nodes} for o in result.outcomes))
    snap_lines = []
    for o in result.outcomes:
        p = o.snapshot.phase
        _atomic_write(outdir / "trajectories" / f"phase_{p:04d}.csv", _csv_text(
            ["step", "time", "sync_error", "state_mean", "state_min", "state_max"], o.sync.rows()))
        _atomic_write(outdir / "centralities" / f"phase_{p:04d}.csv", _csv_text(
            ["node_id"] + [f"{m}_c" for m in MEASURES],
            ([i] + [float(x) for x in row] for i, row in enumerate(o.report.table.as_matrix()))))
        name = f"phase_{p:04d}.edgelist"
        path = outdir / "snapshots" / name
        path.parent.mkdir(parents=True, exist_ok=True)
        write_edgelist(o.graph, path, comments=[f"seed: {cfg.seed}", f"phase: {p}"])
        snap_lines.append({"phase": p, "file": name, "step": o.snapshot.step,
                           "isolated_before_repair": o.report.isolated_before_repair,
                           "seed": cfg.seed})
    _atomic_write(outdir / "snapshots" / "manifest.jsonl", _jsonl(snap_lines))
    emit_plot_data(result, outdir / "plots")
    return outdir


def emit_plot_data(result: ExperimentResult, outdir) -> list[Path]:
    """Degree histograms, fitted CCDF curves and sync-error series per phase,
    plus a one-row-per-phase overview."""
    outdir = Path(outdir)
    written = []
    overview = []
    for o in result.outcomes:
        r = o.report
        p = r.phase
        hist = r.histogram or {}
        path = outdir / f"degree_hist_phase_{p:04d}.csv"
        _atomic_write(path, _csv_text(["degree", "count"], sorted(hist.items())))
        written.append(path)
        written.append(_write_fit_curves(outdir / f"fit_curves_phase_{p:04d}.csv", r))
        path = outdir / f"sync_error_phase_{p:04d}.csv"
        _atomic_write(path, _csv_text(["step", "time", "sync_error"],
                                      zip(o.sync.step.tolist(), o.sync.time.tolist(),
                                          o.sync.sync_error.tolist())))
        written.append(path)
        overview.append([p, r.verdict,
                         float(r.power_fit.alpha_hat) if r.power_fit else "",
                         float(r.deg_bet)])
    path = outdir / "phases_overview.csv"
    _atomic_write(path, _csv_text(["phase", "verdict", "alpha_hat", "deg_bet_corr"], overview))
    written.append(path)
    return written


def _write_fit_curves(path, report: PhaseReport) -> Path:
    hist = report.histogram or {}
    degrees = np.array(sorted(k for k in hist if k >= 1), dtype=float)
    counts = np.array([hist[int(k)] for k in degrees], dtype=float)
    rows = []
    if len(degrees):
        total = counts.sum()
        emp_ccdf = (total - np.concatenate([[0.0], np.cumsum(counts)[:-1]])) / total
        pf, nf = report.power_fit, report.normal_fit
        for k, e in zip(degrees, emp_ccdf):
            pl = float(pf.ccdf(k)) if pf and k >= pf.k_min else ""
            nm = float(1.0 - nf.cdf(k - 1)) if nf else ""
            rows.append([int(k), float(e), pl, nm])
    _atomic_write(Path(path), _csv_text(["degree", "empirical_ccdf", "power_law_ccdf",
                                         "normal_ccdf"], rows))
    return Path(path)


def analyze_snapshots(snapdir, damping: float = 0.85, bootstrap: int = 0, seed: int = 0,
                      method: str = "pearson") -> list[PhaseReport]:
    """Re-analyze stored phase edge lists without resimulating."""
    from sfsync.graph import read_edgelist

    snapdir = Path(snapdir)
    manifest = snapdir / "manifest.jsonl"
    if manifest.exists():
        entries = [json.loads(line) for line in manifest.read_text().splitlines() if line.strip()]
    else:
        entries = [{"phase": i, "file": f.name}
                   for i, f in enumerate(sorted(snapdir.glob("*.edgelist")))]
    reports = []
    for e in entries:
        g = read_edgelist(snapdir / e["file"]).freeze()
        p = int(e["phase"])
        reports.append(analyze_graph(
            g, phase=p, isolated_before_repair=e.get("isolated_before_repair"),
            damping=damping, bootstrap_samples=bootstrap,
            rng=stream_rng(e.get("seed", seed), STREAM_BOOTSTRAP, p), method=method))
    return reports
