"""Extended least angle regression: deletion-insertion steps along parameter
lines, the piecewise-linear path driver, and breadth-first zone enumeration.

A single step starts from an indicator whose zone contains the moving point
(b(t), lambda(t)), computes in closed form the time t_plus at which the point
leaves that zone, and edits the indicator: support entries whose sign
constraint binds at t_plus are deleted, off-support entries whose correlation
bound binds are inserted with the sign of the binding correlation.  Chaining
verified steps yields the solution map along the whole line; sweeping lines
through anchor points of known zones discovers the zone adjacency graph.
"""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .candidate import (
    CandidatePiece,
    IncompatibleIndicatorError,
    candidate_slope,
    zone_membership,
)
from .model import (
    ProblemInstance,
    as_indicator,
    indicator_to_string,
    zero_indicator,
)
from .optimality import encode_sopt
from .oracle import OracleConfig, solve_saddle
from .sweep import (
    LineRestrictedPiece,
    ParameterLine,
    restrict_to_line,
    zone_exit_times,
)

TIE_TOL = 1e-9  # scale-aware tie window for simultaneous exit events


class InitializationError(RuntimeError):
    """Raised when no valid starting indicator can be certified."""


def _ties(value: float, t_plus: float, tol: float) -> bool:
    if math.isinf(value) or math.isinf(t_plus):
        return value == t_plus
    return abs(value - t_plus) <= tol * (1.0 + abs(t_plus))


@dataclass(frozen=True)
class IterationResult:
    """Outcome of one deletion-insertion step.

    `never_exits` marks rays that stay in the zone forever (t_plus = +inf);
    `lambda_terminus` marks exits through the lambda -> 0 wall, where the
    path ends rather than crossing into a neighbor.
    """

    s: np.ndarray
    t_plus: float
    s_plus: np.ndarray
    deleted: tuple[int, ...]
    inserted: tuple[int, ...]
    one_at_a_time: bool
    never_exits: bool
    lambda_terminus: bool
    restricted: LineRestrictedPiece


def elars_iterate(
    inst: ProblemInstance,
    s: np.ndarray,
    line: ParameterLine,
    tie_tol: float = TIE_TOL,
    piece: CandidatePiece | None = None,
) -> IterationResult:
    """One E-LARS step along `line` out of the zone of `s`."""
    s = as_indicator(s)
    restricted = restrict_to_line(inst, s, line, piece=piece)
    times = zone_exit_times(inst, s, line, restricted=restricted)
    t_plus = times.t_sup

    if math.isinf(t_plus):
        # +inf: the ray never leaves the zone; -inf: the line misses it
        # entirely (degenerate call, surfaces as an empty interval)
        return IterationResult(
            s=s, t_plus=t_plus, s_plus=s.copy(), deleted=(), inserted=(),
            one_at_a_time=False, never_exits=t_plus > 0, lambda_terminus=False,
            restricted=restricted,
        )

    terminus = math.isfinite(times.t_c) and _ties(times.t_c, t_plus, tie_tol)
    deleted = tuple(
        int(i) for i, v in times.t_a.items() if _ties(v, t_plus, tie_tol)
    )
    residual = restricted.residual_at(t_plus)
    corr = inst.matrices.C.T @ residual
    inserted = []
    signs = {}
    for i, v in times.t_b.items():
        if _ties(v, t_plus, tie_tol):
            sign = int(np.sign(corr[i]))
            # a zero sign only happens where the binding value is
            # lambda(t_plus) = 0, i.e. at the terminus wall: not a real event
            if sign != 0:
                inserted.append(int(i))
                signs[int(i)] = sign
    inserted = tuple(inserted)

    s_plus = s.copy()
    for i in deleted:
        s_plus[i] = 0
    for i in inserted:
        s_plus[i] = signs[i]
    return IterationResult(
        s=s, t_plus=float(t_plus), s_plus=s_plus, deleted=deleted,
        inserted=inserted, one_at_a_time=(len(deleted) + len(inserted) == 1),
        never_exits=False, lambda_terminus=terminus, restricted=restricted,
    )


@dataclass(frozen=True)
class AssumptionReport:
    one_at_a_time: bool
    multi_event_indices: tuple[int, ...]


def diagnose_assumptions(result: IterationResult) -> AssumptionReport:
    """Report whether the completed step changed exactly one component; when
    it did not, list every tied index (the step may still be correct, but the
    sufficient one-at-a-time condition failed)."""
    changed = tuple(sorted(set(result.deleted) | set(result.inserted)))
    one = len(changed) == 1
    return AssumptionReport(
        one_at_a_time=one, multi_event_indices=() if one else changed
    )


# -- path driver -------------------------------------------------------------

def _finite_to_json(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _json_to_finite(x) -> float:
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    return float(x)


@dataclass(frozen=True)
class PathSegment:
    """One linear piece of the solution map along a line: on [t_start, t_end]
    the map is w(t) = q - p*t with indicator s.  `deleted`/`inserted` record
    the transition into the next segment (empty on final segments)."""

    s: np.ndarray
    t_start: float
    t_end: float
    p: np.ndarray
    q: np.ndarray
    deleted: tuple[int, ...]
    inserted: tuple[int, ...]

    def weq_at(self, t: float) -> np.ndarray:
        return self.q - self.p * t

    def to_dict(self) -> dict:
        return {
            "s": indicator_to_string(self.s),
            "t_range": [_finite_to_json(self.t_start), _finite_to_json(self.t_end)],
            "p": self.p.tolist(),
            "q": self.q.tolist(),
            "deleted": list(self.deleted),
            "inserted": list(self.inserted),
        }

    @staticmethod
    def from_dict(data: dict) -> "PathSegment":
        from .model import indicator_from_string

        return PathSegment(
            s=indicator_from_string(data["s"]),
            t_start=_json_to_finite(data["t_range"][0]),
            t_end=_json_to_finite(data["t_range"][1]),
            p=np.array(data["p"], dtype=float),
            q=np.array(data["q"], dtype=float),
            deleted=tuple(data["deleted"]),
            inserted=tuple(data["inserted"]),
        )


@dataclass(frozen=True)
class PathSweepResult:
    segments: tuple[PathSegment, ...]
    truncated: bool
    stop_reason: str
    line: ParameterLine

    def to_dict(self) -> dict:
        return {
            "segments": [seg.to_dict() for seg in self.segments],
            "truncated": self.truncated,
            "stop_reason": self.stop_reason,
            "line": {
                "b0": self.line.b0.tolist(),
                "lambda0": self.line.lam0,
                "delta_b": self.line.delta_b.tolist(),
                "delta_lambda": self.line.delta_lam,
            },
        }


def line_from_dict(data: dict) -> ParameterLine:
    return ParameterLine(
        b0=np.array(data["b0"], dtype=float),
        lam0=float(data["lambda0"]),
        delta_b=np.array(data["delta_b"], dtype=float),
        delta_lam=float(data["delta_lambda"]),
    )


class CycleError(RuntimeError):
    pass


def path_sweep(
    inst: ProblemInstance,
    line: ParameterLine,
    s_init: np.ndarray,
    t_start: float,
    t_end: float = math.inf,
    max_segments: int = 64,
    tol: float = 1e-9,
) -> PathSweepResult:
    """Piecewise-linear solution map along `line` for t in [t_start, t_end].

    Starts from an indicator whose zone contains (b(t_start), lambda(t_start))
    and chains deletion-insertion steps.  Each step is verified a posteriori:
    the new indicator must contain a point just past the breakpoint, otherwise
    the sweep stops and reports `unverified_step` instead of silently emitting
    a wrong path.  Repeated (indicator, breakpoint) pairs abort as
    `cycle_detected`.
    """
    s = as_indicator(s_init)
    b_start, lam_start = line.point_at(t_start)
    if not zone_membership(inst, s, b_start, lam_start, tol=max(tol, 1e-9)):
        raise ValueError(
            "s_init is not a valid zone indicator at t_start "
            f"(s={indicator_to_string(s)}, t={t_start})"
        )

    segments: list[PathSegment] = []
    seen: list[tuple[str, float]] = []
    t_cur = t_start
    truncated = False
    stop = "t_end_reached"
    while True:
        if len(segments) >= max_segments:
            truncated = True
            stop = "max_segments"
            break
        res = elars_iterate(inst, s, line)
        if res.t_plus >= t_end or res.never_exits:
            end = min(res.t_plus, t_end)
            if end > t_cur:
                segments.append(
                    PathSegment(s, t_cur, float(end), res.restricted.p,
                                res.restricted.q, (), ())
                )
            stop = "unbounded" if math.isinf(end) else "t_end_reached"
            break
        if res.lambda_terminus:
            if res.t_plus > t_cur:
                segments.append(
                    PathSegment(s, t_cur, res.t_plus, res.restricted.p,
                                res.restricted.q, (), ())
                )
            stop = "lambda_terminus"
            break
        if res.t_plus < t_cur - TIE_TOL * (1.0 + abs(t_cur)):
            # the line only touches this zone; closed forms carry no guarantee
            stop = "degenerate_interval"
            break

        key = (indicator_to_string(res.s_plus), res.t_plus)
        if any(k == key[0] and _ties(tp, key[1], TIE_TOL) for k, tp in seen):
            stop = "cycle_detected"
            break
        seen.append(key)

        if res.t_plus > t_cur:
            segments.append(
                PathSegment(s, t_cur, res.t_plus, res.restricted.p,
                            res.restricted.q, res.deleted, res.inserted)
            )
        eps = 1e-6 * (1.0 + abs(res.t_plus))
        probe_t = res.t_plus + eps
        if math.isfinite(t_end):
            probe_t = min(probe_t, 0.5 * (res.t_plus + t_end))
        b_probe, lam_probe = line.point_at(probe_t)
        if not zone_membership(inst, res.s_plus, b_probe, lam_probe, tol=1e-7):
            stop = "unverified_step"
            break
        s = res.s_plus
        t_cur = res.t_plus
    return PathSweepResult(
        segments=tuple(segments), truncated=truncated, stop_reason=stop, line=line
    )


def evaluate_path(result: PathSweepResult, t: float) -> np.ndarray | None:
    """Value of the swept solution map at time t, or None if t is outside
    every segment."""
    for seg in result.segments:
        if seg.t_start - 1e-12 <= t <= seg.t_end + 1e-12:
            return seg.weq_at(t)
    return None


# -- initialization ----------------------------------------------------------

def initialize_indicator(
    inst: ProblemInstance,
    b: np.ndarray,
    lam: float,
    strategy: str = "zero",
    oracle_config: OracleConfig | None = None,
    tol: float = 1e-9,
) -> np.ndarray:
    """Starting indicator whose zone contains (b, lambda).

    `zero` needs max_i |c_i^T b| <= lambda (the all-zero zone); `from_oracle`
    solves the instance iteratively, encodes the equicorrelation signs and
    certifies them by zone membership, failing loudly on zone boundaries
    (the caller may perturb lambda and retry).
    """
    b = np.ravel(b)
    if strategy == "zero":
        corr_max = float(np.abs(inst.matrices.C.T @ b).max())
        if corr_max > lam * (1.0 + tol) + tol:
            raise ValueError(
                f"zero strategy needs max|c_i^T b| <= lambda, got {corr_max} > {lam}"
            )
        return zero_indicator(inst.n)
    if strategy != "from_oracle":
        raise ValueError(f"unknown strategy {strategy!r}")
    probe = inst.with_params(b=b, lam=lam)
    cfg = oracle_config or OracleConfig()
    w = solve_saddle(probe, cfg)
    s = encode_sopt(probe, w, tol=max(tol, 10.0 * cfg.tol))
    if not zone_membership(inst, s, b, lam, tol=max(tol, 1e-8)):
        raise InitializationError(
            "oracle indicator failed zone membership; the point may sit on a "
            "zone boundary (perturb lambda and retry)"
        )
    return s


# -- zone graph enumeration ---------------------------------------------------

@dataclass(frozen=True)
class EnumerationConfig:
    """Knobs of the breadth-first zone search.

    Coverage is declared over `n_coverage` sampled points with ||y|| = r_y,
    r = 0 and lambda = delta_lambda_min; the search stops once every sample
    lies in a discovered zone (or `max_nodes` is hit).
    """

    r_y: float
    delta_lambda_min: float
    max_nodes: int = 256
    n_coverage: int = 64
    seed: int = 0
    max_segments_per_ray: int = 32
    b_axes: int | None = None
    workers: int | None = None
    oracle_rescue: bool = True
    coverage_points: tuple[tuple[np.ndarray, float], ...] | None = None


@dataclass
class ZoneGraph:
    """Discovered zone indicators with adjacency edges.

    `nodes` maps indicator strings to arrays; `edges` holds
    (s_a, s_b, witness_b, witness_lambda) with the witness on the shared
    boundary; `frontier` is whatever part of the work queue was left when the
    search stopped."""

    nodes: dict[str, np.ndarray] = field(default_factory=dict)
    edges: list[tuple[str, str, np.ndarray, float]] = field(default_factory=list)
    frontier: list[str] = field(default_factory=list)
    coverage_points: list[tuple[np.ndarray, float]] = field(default_factory=list)
    covered: list[bool] = field(default_factory=list)
    incomplete: bool = False

    @property
    def coverage_required(self) -> int:
        return len(self.coverage_points)

    @property
    def coverage_covered(self) -> int:
        return sum(self.covered)

    def to_dict(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [
                [sa, sb, {"witness_b": bw.tolist(), "witness_lambda": lw}]
                for sa, sb, bw, lw in sorted(
                    self.edges, key=lambda e: (e[0], e[1])
                )
            ],
            "coverage": {
                "required": self.coverage_required,
                "covered": self.coverage_covered,
            },
            "incomplete": self.incomplete,
        }


def _worker_count(config: EnumerationConfig) -> int:
    env = os.environ.get("SGMC_THREADS")
    cap = int(env) if env else None
    requested = config.workers if config.workers is not None else (cap or 1)
    if cap is not None:
        requested = min(requested, cap)
    return max(1, requested)


def _sample_coverage_points(
    inst: ProblemInstance, config: EnumerationConfig, rng: np.random.Generator
) -> list[tuple[np.ndarray, float]]:
    if config.coverage_points is not None:
        return [(np.ravel(b), float(l)) for b, l in config.coverage_points]
    pts = []
    for _ in range(config.n_coverage):
        u = rng.normal(size=inst.m)
        norm = np.linalg.norm(u)
        u = u / norm if norm > 0 else np.eye(inst.m)[0]
        b = np.concatenate([config.r_y * u, np.zeros(inst.m)])
        pts.append((b, config.delta_lambda_min))
    return pts


def _anchor_from_segment(line: ParameterLine, seg: PathSegment) -> tuple[np.ndarray, float]:
    # midpoint of the segment, renormalized to lambda = 1 (zones are cones)
    if math.isinf(seg.t_end):
        t_mid = seg.t_start + 1.0
    elif math.isinf(seg.t_start):
        t_mid = seg.t_end - 1.0
    else:
        t_mid = 0.5 * (seg.t_start + seg.t_end)
    b, lam = line.point_at(t_mid)
    if lam > 1e-8:
        return b / lam, 1.0
    return b, lam


def _ray_directions(inst: ProblemInstance, config: EnumerationConfig):
    two_m = 2 * inst.m
    dirs = [(np.zeros(two_m), 1.0), (np.zeros(two_m), -1.0)]
    n_axes = two_m if config.b_axes is None else min(config.b_axes, two_m)
    for j in range(n_axes):
        e = np.zeros(two_m)
        e[j] = 1.0
        dirs.append((e, 0.0))
        dirs.append((-e, 0.0))
    return dirs


def _sweep_ray(inst, s, anchor, direction, config):
    """Walk one ray out of a zone anchor; returns the sweep result or None."""
    db, dl = direction
    line = ParameterLine(anchor[0], anchor[1], db, dl)
    try:
        return path_sweep(
            inst, line, s, t_start=0.0,
            max_segments=config.max_segments_per_ray,
        )
    except (ValueError, IncompatibleIndicatorError):
        return None


def enumerate_zones(inst: ProblemInstance, config: EnumerationConfig) -> ZoneGraph:
    """Breadth-first search of the zone graph from the all-zero indicator.

    Each frontier zone is expanded by sweeping rays from a strictly interior
    anchor: along +/-lambda and along +/-e_j for the configured subset of b
    coordinates.  Zones visited by the rays become nodes; consecutive segments
    contribute adjacency edges with the breakpoint as witness.  If the rays
    exhaust without covering every sampled coverage point, targeted sweeps
    toward the uncovered samples (and, as a last resort, oracle-seeded
    insertion at the sample) finish the job.
    """
    if config.delta_lambda_min <= 0:
        raise ValueError("delta_lambda_min must be positive")
    rng = np.random.default_rng(config.seed)
    graph = ZoneGraph()
    graph.coverage_points = _sample_coverage_points(inst, config, rng)
    graph.covered = [False] * len(graph.coverage_points)

    anchors: dict[str, tuple[np.ndarray, float]] = {}
    pieces: dict[str, CandidatePiece] = {}
    edge_keys: set[tuple[str, str]] = set()

    def add_node(s: np.ndarray, anchor: tuple[np.ndarray, float]) -> str | None:
        key = indicator_to_string(s)
        if key in graph.nodes:
            return None
        if len(graph.nodes) >= config.max_nodes:
            graph.incomplete = True
            return None
        graph.nodes[key] = s.copy()
        anchors[key] = anchor
        pieces[key] = candidate_slope(inst, s)
        for j, (bj, lj) in enumerate(graph.coverage_points):
            if not graph.covered[j] and zone_membership(
                inst, s, bj, lj, piece=pieces[key]
            ):
                graph.covered[j] = True
        return key

    def add_edge(sa: str, sb: str, b_w: np.ndarray, lam_w: float):
        key = (min(sa, sb), max(sa, sb))
        if sa != sb and key not in edge_keys:
            edge_keys.add(key)
            graph.edges.append((key[0], key[1], np.array(b_w), float(lam_w)))

    def absorb_sweep(result: PathSweepResult) -> list[str]:
        new_keys = []
        segs = result.segments
        for k, seg in enumerate(segs):
            key = add_node(seg.s, _anchor_from_segment(result.line, seg))
            if key is not None:
                new_keys.append(key)
            if k + 1 < len(segs):
                b_w, lam_w = result.line.point_at(seg.t_end)
                add_edge(
                    indicator_to_string(seg.s),
                    indicator_to_string(segs[k + 1].s),
                    b_w,
                    lam_w,
                )
        return new_keys

    s0 = zero_indicator(inst.n)
    anchor0 = (np.zeros(2 * inst.m), 1.0)
    add_node(s0, anchor0)
    queue = deque([indicator_to_string(s0)])
    expanded: set[str] = set()
    directions = _ray_directions(inst, config)
    workers = _worker_count(config)

    while queue and not all(graph.covered) and not graph.incomplete:
        level = list(queue)
        queue.clear()
        tasks = [
            (key, direction)
            for key in level
            if key not in expanded
            for direction in directions
        ]
        expanded.update(level)
        if workers > 1 and len(tasks) > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(
                    pool.map(
                        lambda task: _sweep_ray(
                            inst, graph.nodes[task[0]], anchors[task[0]],
                            task[1], config,
                        ),
                        tasks,
                    )
                )
        else:
            results = [
                _sweep_ray(inst, graph.nodes[key], anchors[key], d, config)
                for key, d in tasks
            ]
        for result in results:
            if result is None:
                continue
            for key in absorb_sweep(result):
                queue.append(key)

    graph.frontier = [k for k in queue if k not in expanded]

    # rescue pass: reach uncovered samples by sweeping straight at them from
    # the all-zero anchor, falling back to an oracle-seeded indicator
    for j, (bj, lj) in enumerate(graph.coverage_points):
        if graph.covered[j] or graph.incomplete:
            continue
        line = ParameterLine(anchor0[0], anchor0[1], bj - anchor0[0], lj - anchor0[1])
        result = _sweep_ray(inst, s0, (anchor0[0], anchor0[1]), (line.delta_b, line.delta_lam), config)
        if result is not None:
            absorb_sweep(result)
        if not graph.covered[j] and config.oracle_rescue:
            try:
                s = initialize_indicator(inst, bj, lj, strategy="from_oracle")
            except (InitializationError, RuntimeError):
                continue
            add_node(s, (bj / lj, 1.0) if lj > 1e-8 else (bj, lj))

    if not all(graph.covered):
        graph.incomplete = True
    return graph
