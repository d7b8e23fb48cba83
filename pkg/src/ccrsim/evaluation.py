"""Frozen-policy evaluation, trajectory phase labels, run comparison and
trace export (JSONL and SVG)."""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .ccr import CcrConfig
from .core import STREAM_EVAL, RngStream
from .marl.agents import select_actions
from .marl.episode import Episode
from .scenarios import (ScenarioKind, ScenarioSpec, danger_sense, generate_scenario,
                        observation_dim)

EPS_MODEL = 1e-4


class Phase(enum.IntEnum):
    STANDBY = 0
    SENSING = 1
    ACTIVE = 2


PHASE_COLORS = {
    Phase.STANDBY: "#1f77b4",  # blue
    Phase.SENSING: "#f2b701",  # yellow
    Phase.ACTIVE: "#e377c2",  # pink
}


@dataclass
class EpisodeTrace:
    spec: ScenarioSpec
    positions: list = field(default_factory=list)  # per step (N, 2), after the step
    velocities: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    env_rewards: list = field(default_factory=list)
    intrinsic_rewards: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    danger: list = field(default_factory=list)
    phases: list = field(default_factory=list)
    success: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class MetricsSummary:
    scenario: str
    episodes: int
    dangerous_behavior_frequency: float
    success_rate: float
    mean_distance_to_danger_center: float
    mean_return: float

    def as_row(self) -> dict:
        return asdict(self)


SUMMARY_COLUMNS = ("scenario", "episodes", "dangerous_behavior_frequency", "success_rate",
                   "mean_distance_to_danger_center", "mean_return")


def phase_labels(scores, intrinsic, sensing, comm_masks, eps: float = EPS_MODEL) -> np.ndarray:
    """Label every robot for one step.

    ``scores`` (N,) smoothed scores, ``intrinsic`` (N,) intrinsic rewards,
    ``sensing`` (N,) bool danger-sense flags, ``comm_masks`` (N, N).
    Active: intrinsic reward is non-zero while some in-range score (own
    included) exceeds ``eps``. Sensing: otherwise, if the robot senses the
    danger or any in-range score exceeds ``eps``. Standby: everything else.
    """
    scores = np.asarray(scores, dtype=float)
    masks = np.asarray(comm_masks, dtype=bool)
    elevated = np.any(masks & (scores[None, :] > eps), axis=1)
    active = (np.abs(np.asarray(intrinsic)) > 0) & elevated
    sensing = np.asarray(sensing, dtype=bool) | elevated
    out = np.full(len(scores), Phase.STANDBY, dtype=int)
    out[sensing] = Phase.SENSING
    out[active] = Phase.ACTIVE
    return out


def _sensing_flags(run: Episode) -> np.ndarray:
    return danger_sense(run.world, run.spec)[:, 2] > 0


def rollout(policy, spec: ScenarioSpec, episode_rng: RngStream, ccr: CcrConfig | None = None,
            actor_fn=None) -> EpisodeTrace:
    """Noise-free episode with the policy's actors (or a scripted ``actor_fn``
    mapping the observation matrix to actions)."""
    ccr = ccr or policy.train_cfg.ccr
    run = Episode(spec, policy.physics, policy.model, ccr, episode_rng, policy.train_cfg.window)
    trace = EpisodeTrace(spec)
    while not run.done:
        masks_t = run.masks
        if actor_fn is None:
            actions = select_actions(policy.bundle, run.obs, 0.0, None)
        else:
            actions = np.clip(np.asarray(actor_fn(run.obs, run), dtype=float), -1.0, 1.0)
        rec = run.step(actions)
        trace.positions.append(run.world.positions.copy())
        trace.velocities.append(run.world.velocities.copy())
        trace.actions.append(np.asarray(actions).copy())
        trace.env_rewards.append(rec.env_rewards.copy())
        trace.intrinsic_rewards.append(rec.intrinsic.copy())
        trace.scores.append(rec.scores.copy())
        trace.danger.append(rec.danger.copy())
        trace.phases.append(phase_labels(rec.scores, rec.intrinsic, _sensing_flags(run), masks_t))
    trace.success = run.success()
    return trace


def summarize(traces, scenario) -> MetricsSummary:
    kind = ScenarioKind.parse(scenario).value
    if not traces:
        return MetricsSummary(kind, 0, 0.0, 0.0, 0.0, 0.0)
    danger = np.array([np.mean(t.danger) for t in traces])
    success = np.array([np.mean(t.success) for t in traces])
    dist = []
    returns = []
    for t in traces:
        d = np.stack(t.positions) - t.spec.danger_center
        dist.append(np.mean(np.sqrt(np.sum(d * d, axis=-1))))
        returns.append(np.mean(np.sum(np.stack(t.env_rewards), axis=0)))
    # episodes have equal length, so the mean of episode means equals the
    # pooled robot-step mean
    return MetricsSummary(kind, len(traces), float(np.mean(danger)), float(np.mean(success)),
                          float(np.mean(dist)), float(np.mean(returns)))


def evaluate(policy, scenario_kind=None, episodes: int = 200, seed: int = 0, actor_fn=None):
    """Run ``episodes`` noise-free episodes; returns ``(MetricsSummary, traces)``.

    ``policy`` is a :class:`~ccrsim.marl.training.RunArtifacts` (freshly
    trained or loaded with :func:`ccrsim.cli.load_run`).
    """
    kind = ScenarioKind.parse(scenario_kind or policy.scenario_kind)
    params = policy.scenario_params
    expected = observation_dim(params.n_robots, policy.train_cfg.ccr.enabled)
    if actor_fn is None and policy.bundle.obs_dim != expected:
        raise ValueError(f"checkpoint expects observations of width {policy.bundle.obs_dim}, "
                         f"scenario provides {expected}")
    base = RngStream(seed, STREAM_EVAL)
    traces = []
    for ep in range(episodes):
        spec = generate_scenario(kind, base.child(ep, 0), params)
        traces.append(rollout(policy, spec, base.child(ep, 1), actor_fn=actor_fn))
    return summarize(traces, kind), traces


# ---------------------------------------------------------------- comparison

def compare_runs(a: MetricsSummary, b: MetricsSummary) -> dict:
    """Changes from run ``a`` (baseline) to run ``b``.

    Relative changes are fractions of the baseline value; success and danger
    point deltas are in percentage points.
    """
    if a.scenario != b.scenario:
        raise ValueError(f"scenario mismatch: {a.scenario} vs {b.scenario}")

    def rel(x, y):
        return 0.0 if x == y else ((y - x) / x if x != 0 else float("inf") * np.sign(y - x))

    return {
        "scenario": a.scenario,
        "danger_a": a.dangerous_behavior_frequency,
        "danger_b": b.dangerous_behavior_frequency,
        "danger_delta_points": 100.0 * (b.dangerous_behavior_frequency - a.dangerous_behavior_frequency),
        "danger_relative_reduction": -rel(a.dangerous_behavior_frequency, b.dangerous_behavior_frequency),
        "success_a": a.success_rate,
        "success_b": b.success_rate,
        "success_delta_points": 100.0 * (b.success_rate - a.success_rate),
        "distance_ratio": (b.mean_distance_to_danger_center / a.mean_distance_to_danger_center
                           if a.mean_distance_to_danger_center else float("nan")),
        "return_delta": b.mean_return - a.mean_return,
    }


def format_comparison(row: dict, label_a: str = "baseline", label_b: str = "candidate") -> str:
    s = row["scenario"]
    lines = [
        f"{'':24s}{s:>18s}",
        "Dangerous behavior frequency",
        f"  {label_a:22s}{100 * row['danger_a']:17.2f}%",
        f"  {label_b:22s}{100 * row['danger_b']:17.2f}%",
        f"  {'relative reduction':22s}{100 * row['danger_relative_reduction']:17.2f}%",
        "Success rate",
        f"  {label_a:22s}{100 * row['success_a']:17.2f}%",
        f"  {label_b:22s}{100 * row['success_b']:17.2f}%",
        f"  {'delta (points)':22s}{row['success_delta_points']:+17.2f}",
        f"Distance to danger ratio{row['distance_ratio']:18.3f}",
    ]
    return "\n".join(lines)


def summary_csv(summaries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for s in summaries:
        row = s.as_row()
        w.writerow([row[c] if isinstance(row[c], (str, int)) else repr(float(row[c]))
                    for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def read_summary_csv(path) -> MetricsSummary:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no summary rows")
    r = rows[0]
    return MetricsSummary(r["scenario"], int(r["episodes"]),
                          *(float(r[c]) for c in SUMMARY_COLUMNS[2:]))


def comparison_csv(row: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    w.writeheader()
    w.writerow({k: (v if isinstance(v, str) else repr(float(v))) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------- traces

def _geometry(spec: ScenarioSpec) -> dict:
    g = {"kind": spec.kind.value, "target": spec.target.tolist(),
         "target_radius": spec.target_radius}
    if hasattr(spec.danger, "radius"):
        g["danger"] = {"disc": {"center": spec.danger.center.tolist(), "radius": spec.danger.radius}}
    else:
        g["danger"] = {"rect": {"min": spec.danger.lo.tolist(), "max": spec.danger.hi.tolist()}}
    return g


def trace_records(traces):
    for ep, t in enumerate(traces):
        for k in range(len(t)):
            rec = {
                "episode": ep, "step": k,
                "position": t.positions[k].tolist(),
                "velocity": t.velocities[k].tolist(),
                "score": t.scores[k].tolist(),
                "intrinsic": t.intrinsic_rewards[k].tolist(),
                "flag": [bool(x) for x in t.danger[k]],
                "phase": [Phase(int(x)).name.lower() for x in t.phases[k]],
            }
            if k == 0:
                rec["scenario"] = _geometry(t.spec)
            yield rec


def write_traces_jsonl(traces, path) -> None:
    with open(path, "w") as fh:
        for rec in trace_records(traces):
            fh.write(json.dumps(rec) + "\n")


def read_traces_jsonl(path) -> dict:
    """Group records by episode. Raises ``ValueError`` naming the bad line."""
    episodes: dict[int, list] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                episodes.setdefault(int(rec["episode"]), []).append(rec)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed trace record ({exc})") from None
    return episodes


def episode_svg(records, size: int = 480, extent: float = 2.0) -> str:
    """One SVG: danger geometry, target, one polyline per robot and a
    phase-coloured marker at every step."""
    scale = size / (2 * extent)

    def px(x, y):
        return (x + extent) * scale, (extent - y) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">', '<rect width="100%" height="100%" fill="white"/>']
    geo = next((r["scenario"] for r in records if "scenario" in r), None)
    if geo is not None:
        dz = geo["danger"]
        if "disc" in dz:
            cx, cy = px(*dz["disc"]["center"])
            out.append(f'<circle class="danger" cx="{cx:.2f}" cy="{cy:.2f}" '
                       f'r="{dz["disc"]["radius"] * scale:.2f}" fill="#d62728" fill-opacity="0.25"/>')
        else:
            (x0, y0), (x1, y1) = dz["rect"]["min"], dz["rect"]["max"]
            sx, sy = px(x0, y1)
            out.append(f'<rect class="danger" x="{sx:.2f}" y="{sy:.2f}" width="{(x1 - x0) * scale:.2f}" '
                       f'height="{(y1 - y0) * scale:.2f}" fill="#7f7f7f" fill-opacity="0.5"/>')
        tx, ty = px(*geo["target"])
        out.append(f'<circle class="target" cx="{tx:.2f}" cy="{ty:.2f}" '
                   f'r="{max(geo["target_radius"] * scale, 3):.2f}" fill="#2ca02c" fill-opacity="0.5"/>')
    records = sorted(records, key=lambda r: r["step"])
    n = len(records[0]["position"]) if records else 0
    for i in range(n):
        pts = " ".join("%.2f,%.2f" % px(*r["position"][i]) for r in records)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#444444" stroke-width="1"/>')
        for r in records:
            x, y = px(*r["position"][i])
            color = PHASE_COLORS[Phase[r["phase"][i].upper()]]
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out)


def write_plots(traces_path, out_dir) -> list[Path]:
    episodes = read_traces_jsonl(traces_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for ep in sorted(episodes):
        p = out / f"episode_{ep:04d}.svg"
        p.write_text(episode_svg(episodes[ep]))
        written.append(p)
    return written
