"""Start-slot assignment and PV/grid arbitration against an objective curve.

The scheduler picks one start per shiftable appliance run to minimize squared
deviation of the grid-facing curve from the objective plus weighted discomfort
(shift and delay penalties).  Small problems are solved exactly by
enumeration; larger ones by seeded local search.  When a PV/battery system is
present, per-slot sourcing flags are arbitrated against the candidate demand
and the two optimizations alternate to a fixed point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import (
    SLOT_COUNT,
    SLOT_HOURS,
    ApplianceInstance,
    ApplianceSpec,
    LoadCurve,
    PricingSignal,
    PvSystem,
    preferred_starts,
    split_consumption,
    total_curve,
)
from .errors import (
    FeasibilityError,
    FormatError,
    InfeasibleApplianceError,
    InfeasibleProblemError,
    ParameterError,
)
from .objective import ObjectiveCurve


# ---------------------------------------------------------------- weights


@dataclass(frozen=True)
class DiscomfortWeights:
    """Per-appliance shift/delay penalty weights.

    ``shift_weight`` prices each slot of absolute displacement from the
    preferred start; ``delay_weight`` prices each slot of forward delay only.
    ``per_appliance`` overrides both per appliance type id.
    """

    shift_weight: float = 0.0
    delay_weight: float = 0.0
    per_appliance: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.shift_weight < 0 or self.delay_weight < 0:
            raise ParameterError("discomfort weights must be >= 0")
        cleaned = {}
        for type_id, pair in dict(self.per_appliance).items():
            w, k = (float(pair[0]), float(pair[1]))
            if w < 0 or k < 0:
                raise ParameterError(f"discomfort weights for {type_id} must be >= 0")
            cleaned[str(type_id)] = (w, k)
        object.__setattr__(self, "per_appliance", cleaned)

    def weights_for(self, type_id: str) -> tuple[float, float]:
        return self.per_appliance.get(type_id, (self.shift_weight, self.delay_weight))


# ---------------------------------------------------------------- assignment


@dataclass(frozen=True, eq=False)
class ScheduleAssignment:
    """A complete schedule: start slot per instance plus PV sourcing flags."""

    starts: Mapping[str, int]
    pv_flags: np.ndarray | None = None
    battery_soc: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "starts", dict(self.starts))
        flags = self.pv_flags
        if flags is None:
            flags = np.zeros(SLOT_COUNT, dtype=bool)
        else:
            flags = np.asarray(flags, dtype=bool)
            if flags.shape != (SLOT_COUNT,):
                raise FormatError(f"pv_flags needs {SLOT_COUNT} entries")
        flags = flags.copy()
        flags.setflags(write=False)
        object.__setattr__(self, "pv_flags", flags)
        if self.battery_soc is not None:
            soc = np.asarray(self.battery_soc, dtype=float).copy()
            if soc.shape != (SLOT_COUNT,):
                raise FormatError(f"battery_soc needs {SLOT_COUNT} entries")
            soc.setflags(write=False)
            object.__setattr__(self, "battery_soc", soc)

    def shift_of(self, instance: ApplianceInstance) -> int:
        return int(self.starts[instance.instance_id]) - instance.preferred_start

    def to_json_dict(self, instances: Sequence[ApplianceInstance]) -> dict:
        """Export schema: per-appliance placement plus the sourcing vector.

        ``source_slots`` lists the slots each run occupies.
        """
        appliances = []
        for inst in sorted(instances, key=lambda i: i.instance_id):
            start = int(self.starts[inst.instance_id])
            appliances.append(
                {
                    "id": inst.instance_id,
                    "preferred_start": inst.preferred_start,
                    "scheduled_start": start,
                    "shift": start - inst.preferred_start,
                    "source_slots": list(range(start, start + inst.duration_slots)),
                }
            )
        return {
            "appliances": appliances,
            "pv_flags": [int(b) for b in self.pv_flags],
        }


def shifted_counts(
    instances: Sequence[ApplianceInstance], assignment: ScheduleAssignment
) -> tuple[dict[tuple[str, int], int], dict[tuple[str, int], int]]:
    """Per (type, slot) tallies of runs shifted to and away from each slot."""
    shifted_to: dict[tuple[str, int], int] = {}
    shifted_away: dict[tuple[str, int], int] = {}
    for inst in instances:
        start = int(assignment.starts[inst.instance_id])
        if start != inst.preferred_start:
            to_key = (inst.type_id, start)
            away_key = (inst.type_id, inst.preferred_start)
            shifted_to[to_key] = shifted_to.get(to_key, 0) + 1
            shifted_away[away_key] = shifted_away.get(away_key, 0) + 1
    return shifted_to, shifted_away


def validate_assignment(
    instances: Sequence[ApplianceInstance], assignment: ScheduleAssignment
) -> tuple[str, ...]:
    """All hard-constraint violations of an assignment (empty means feasible).

    Checks: exactly one start per instance; integral starts (half-hour
    granularity); runs inside the permitted window; shift caps respected;
    shifted-count tallies non-negative and bounded by the controllable count.
    """
    violations = []
    ids = {inst.instance_id for inst in instances}
    extra = set(assignment.starts) - ids
    missing = ids - set(assignment.starts)
    for name in sorted(extra):
        violations.append(f"start given for unknown appliance {name}")
    for name in sorted(missing):
        violations.append(f"no start for appliance {name}")

    for inst in sorted(instances, key=lambda i: i.instance_id):
        if inst.instance_id not in assignment.starts:
            continue
        raw = assignment.starts[inst.instance_id]
        if int(raw) != raw:
            violations.append(f"{inst.instance_id}: start {raw!r} is not a whole slot")
            continue
        start = int(raw)
        if start < inst.window_start or start > inst.window_end - inst.duration_slots + 1:
            violations.append(
                f"{inst.instance_id}: start {start} outside window "
                f"[{inst.window_start},{inst.window_end}] for duration {inst.duration_slots}"
            )
        if abs(start - inst.preferred_start) > inst.max_shift:
            violations.append(
                f"{inst.instance_id}: shift {start - inst.preferred_start} exceeds "
                f"cap {inst.max_shift}"
            )

    if not violations:
        to_counts, away_counts = shifted_counts(instances, assignment)
        controllable = sum(1 for inst in instances if inst.kind == "shiftable")
        for counts in (to_counts, away_counts):
            for key, value in counts.items():
                if value < 0:  # unreachable with dict tallies; guards the contract
                    violations.append(f"negative shifted count at {key}")
        per_slot_away: dict[int, int] = {}
        for (_, slot), value in away_counts.items():
            per_slot_away[slot] = per_slot_away.get(slot, 0) + value
        for slot, value in sorted(per_slot_away.items()):
            if value > controllable:
                violations.append(
                    f"slot {slot}: {value} runs shifted away exceeds the "
                    f"{controllable} controllable devices"
                )
    return tuple(violations)


# ---------------------------------------------------------------- feasibility


def feasible_starts(
    app: ApplianceSpec | ApplianceInstance, not_before: int = 1
) -> tuple[int, ...]:
    """Start slots satisfying the window, duration and shift-cap constraints.

    ``not_before`` narrows the candidates for intra-day re-solves.  Starts are
    whole slots, so the half-hour granularity floor holds by construction.

    Raises:
        InfeasibleApplianceError: no start satisfies every constraint; the
            message names the binding constraint.
    """
    name = getattr(app, "instance_id", None) or app.id
    window_lo = max(app.window_start, int(not_before))
    window_hi = app.window_end - app.duration_slots + 1
    if window_lo > window_hi:
        raise InfeasibleApplianceError(
            f"{name}: permitted window [{app.window_start},{app.window_end}] "
            f"holds no start >= {not_before} for duration {app.duration_slots}"
        )
    lo = max(window_lo, app.preferred_start - app.max_shift)
    hi = min(window_hi, app.preferred_start + app.max_shift)
    if lo > hi:
        raise InfeasibleApplianceError(
            f"{name}: preference shift cap {app.max_shift} around slot "
            f"{app.preferred_start} excludes every start in the permitted window"
        )
    return tuple(range(lo, hi + 1))


# ---------------------------------------------------------------- pv


@dataclass(frozen=True, eq=False)
class PvArbitration:
    """Per-slot sourcing decision and the induced battery trajectory.

    ``soc[h]`` is the stored energy at the start of slot h+1; ``supplied_kwh``
    is the energy the battery actually delivered in each slot.
    """

    flags: np.ndarray
    soc: np.ndarray
    supplied_kwh: np.ndarray

    def supplied_total(self) -> float:
        return float(self.supplied_kwh.sum())


def pv_arbitrate(
    pv: PvSystem,
    shiftable_demand: LoadCurve | np.ndarray,
    pricing: PricingSignal,
    max_app_duration: int,
) -> PvArbitration:
    """Decide, slot by slot, whether the battery covers the shiftable demand.

    The battery discharges in a slot when (a) it holds more energy than that
    slot's shiftable demand, and (b) timing permits: the slot lies inside a
    peak window, no peak window remains today, or the battery can recharge
    before the next peak starts with at least ``max_app_duration`` slots to
    spare (recharge time = (capacity - soc)/charge_rate).  The state of
    charge then evolves as
    ``soc' = clamp(soc + eff*gen*0.5h - supplied, 0, capacity)``.

    Infeasible PV never raises; it simply yields all-zero flags.
    """
    demand = (
        shiftable_demand.values
        if isinstance(shiftable_demand, LoadCurve)
        else np.asarray(shiftable_demand, dtype=float)
    )
    if demand.shape != (SLOT_COUNT,):
        raise FormatError(f"demand needs {SLOT_COUNT} values, got shape {demand.shape}")
    if max_app_duration < 0:
        raise ParameterError("max_app_duration must be >= 0")

    peak_mask = pricing.peak_mask()
    starts = sorted(start for start, _ in pricing.peak_windows)

    flags = np.zeros(SLOT_COUNT, dtype=bool)
    soc_trace = np.empty(SLOT_COUNT)
    supplied = np.zeros(SLOT_COUNT)
    soc = pv.initial_soc
    for idx in range(SLOT_COUNT):
        slot = idx + 1
        soc_trace[idx] = soc
        next_start = next((s for s in starts if s > slot), None)
        if peak_mask[idx] or next_start is None:
            time_ok = True
        else:
            recharge_slots = (pv.battery_capacity - soc) / pv.charge_rate / SLOT_HOURS
            time_ok = (next_start - slot) - recharge_slots > max_app_duration
        demand_kwh = demand[idx] * SLOT_HOURS
        if time_ok and soc > demand_kwh:
            flags[idx] = True
            supplied[idx] = demand_kwh
        charged = pv.charge_efficiency * pv.generation[idx] * SLOT_HOURS
        soc = min(max(soc + charged - supplied[idx], 0.0), pv.battery_capacity)
    return PvArbitration(flags=flags, soc=soc_trace, supplied_kwh=supplied)


# ---------------------------------------------------------------- cost


@dataclass(frozen=True)
class CostBreakdown:
    """Deviation-from-objective and discomfort parts of the schedule cost."""

    deviation: float
    discomfort: float
    total: float
    blend: float


def default_blend(objective: ObjectiveCurve) -> float:
    """Default weight joining discomfort to squared deviation."""
    return 0.1 * float(objective.values.mean()) ** 2


def evaluate_cost(
    assignment: ScheduleAssignment,
    objective: ObjectiveCurve,
    weights: DiscomfortWeights,
    instances: Sequence[ApplianceInstance],
    blend: float | None = None,
    baseline: np.ndarray | None = None,
    active_from: int = 1,
) -> CostBreakdown:
    """Score a feasible assignment against the objective curve.

    Deviation is the squared gap between the grid-facing curve (PV-supplied
    energy excluded, plus any committed ``baseline`` load) and the objective,
    summed over slots >= ``active_from``.  Discomfort sums each run's
    ``w*|shift| + k*max(0, delay)``.  Total = deviation + blend * discomfort,
    with ``blend`` defaulting to 0.1 * (mean objective power)^2.

    Raises:
        FeasibilityError: the assignment violates a hard constraint.
    """
    violations = validate_assignment(instances, assignment)
    if violations:
        raise FeasibilityError("; ".join(violations))
    parts = split_consumption(instances, assignment.starts, assignment.pv_flags)
    grid = parts.grid.values
    if baseline is not None:
        base = np.asarray(baseline, dtype=float)
        if base.shape != (SLOT_COUNT,):
            raise FormatError(f"baseline needs {SLOT_COUNT} values")
        grid = grid + base
    if not 1 <= active_from <= SLOT_COUNT:
        raise ParameterError(f"active_from {active_from} outside 1..{SLOT_COUNT}")
    gap = (grid - objective.values)[active_from - 1 :]
    deviation = float(np.sum(gap * gap))

    discomfort = 0.0
    for inst in instances:
        shift = int(assignment.starts[inst.instance_id]) - inst.preferred_start
        w, k = weights.weights_for(inst.type_id)
        discomfort += w * abs(shift) + k * max(0, shift)

    blend_value = default_blend(objective) if blend is None else float(blend)
    if blend_value < 0:
        raise ParameterError("blend must be >= 0")
    return CostBreakdown(
        deviation=deviation,
        discomfort=discomfort,
        total=deviation + blend_value * discomfort,
        blend=blend_value,
    )


# ---------------------------------------------------------------- solver


@dataclass(frozen=True)
class SolverConfig:
    """Search knobs: exact-enumeration limit, local-search effort, seed."""

    exact_threshold: int = 1_000_000
    restarts: int = 3
    max_passes: int = 60
    seed: int = 0
    blend: float | None = None
    pv_iteration_cap: int = 5

    def __post_init__(self):
        if self.exact_threshold < 1 or self.restarts < 0 or self.max_passes < 1:
            raise ParameterError("solver limits must be positive")
        if self.pv_iteration_cap < 1:
            raise ParameterError("pv_iteration_cap must be >= 1")


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Solver outcome: the assignment, its canonical cost, and diagnostics."""

    assignment: ScheduleAssignment
    cost: CostBreakdown
    trace: tuple[float, ...]
    mode: str
    evaluations: int


class _CandidateSpace:
    """Precomputed per-instance start sets, contributions and penalties.

    Deviation math runs on slot columns >= active_from with PV-flagged slots
    masked out of the shiftable contributions, exactly mirroring
    evaluate_cost's grid-facing curve.
    """

    def __init__(
        self,
        shiftable: list[ApplianceInstance],
        residual: np.ndarray,
        flags: np.ndarray,
        weights: DiscomfortWeights,
        blend: float,
        active_from: int,
        starts_by_id: dict[str, tuple[int, ...]],
    ):
        self.ids = [inst.instance_id for inst in shiftable]
        self.blend = blend
        cols = slice(active_from - 1, SLOT_COUNT)
        keep = (~flags).astype(float)
        self.residual = residual[cols]
        self.starts: list[np.ndarray] = []
        self.contribs: list[np.ndarray] = []
        self.penalties: list[np.ndarray] = []
        self.shift_abs: list[np.ndarray] = []
        for inst in shiftable:
            starts = np.asarray(starts_by_id[inst.instance_id], dtype=int)
            contrib = np.zeros((starts.size, SLOT_COUNT))
            for row, start in enumerate(starts):
                contrib[row, start - 1 : start - 1 + inst.duration_slots] = inst.power_profile
            contrib *= keep  # PV-covered slots leave the grid curve
            w, k = weights.weights_for(inst.type_id)
            shift = starts - inst.preferred_start
            self.starts.append(starts)
            self.contribs.append(contrib[:, cols])
            self.penalties.append(w * np.abs(shift) + k * np.maximum(0, shift))
            self.shift_abs.append(np.abs(shift))

    def key(self, choice: tuple[int, ...]) -> tuple[float, int, tuple[int, ...]]:
        """Comparison key: (total cost, total |shift|, start tuple by id)."""
        curve = self.residual.copy()
        penalty = 0.0
        shift_sum = 0
        starts = []
        for i, row in enumerate(choice):
            curve += self.contribs[i][row]
            penalty += self.penalties[i][row]
            shift_sum += int(self.shift_abs[i][row])
            starts.append(int(self.starts[i][row]))
        total = float(np.sum(curve * curve)) + self.blend * penalty
        return (total, shift_sum, tuple(starts))

    def starts_mapping(self, choice: tuple[int, ...]) -> dict[str, int]:
        return {self.ids[i]: int(self.starts[i][row]) for i, row in enumerate(choice)}


def _enumerate_exact(space: _CandidateSpace) -> tuple[tuple[int, ...], int]:
    """Exhaustive search over the start product; returns (choice, evaluations)."""
    k = len(space.starts)
    if k == 0:
        return (), 1

    # every candidate must flow through the same einsum so that exact ties
    # stay exact; seeding from a differently-ordered sum can be off by an ulp
    best_key: tuple[float, int, tuple[int, ...]] | None = None
    best_choice = tuple(0 for _ in range(k))
    evaluations = 0
    prefix_ranges = [range(s.size) for s in space.starts[:-1]]
    last_contrib = space.contribs[-1]
    last_pen = space.penalties[-1]
    last_shift = space.shift_abs[-1]
    for prefix in itertools.product(*prefix_ranges):
        curve = space.residual.copy()
        penalty = 0.0
        shift_sum = 0
        for i, row in enumerate(prefix):
            curve += space.contribs[i][row]
            penalty += space.penalties[i][row]
            shift_sum += int(space.shift_abs[i][row])
        gaps = curve + last_contrib
        totals = np.einsum("ij,ij->i", gaps, gaps) + space.blend * (penalty + last_pen)
        evaluations += totals.size
        threshold = np.inf if best_key is None else best_key[0]
        for row in np.flatnonzero(totals <= threshold):
            choice = prefix + (int(row),)
            key = (
                float(totals[row]),
                shift_sum + int(last_shift[row]),
                tuple(int(space.starts[i][c]) for i, c in enumerate(choice)),
            )
            if best_key is None or key < best_key:
                best_key, best_choice = key, choice
    return best_choice, evaluations


def _local_search(
    space: _CandidateSpace, config: SolverConfig
) -> tuple[tuple[int, ...], tuple[float, ...], int]:
    """Seeded multi-restart hill descent over single-appliance moves."""
    rng = np.random.default_rng(config.seed)
    k = len(space.starts)
    evaluations = 0

    def preferred_choice() -> tuple[int, ...]:
        choice = []
        for i in range(k):
            shifts = space.shift_abs[i]
            choice.append(int(np.flatnonzero(shifts == shifts.min())[0]))
        return tuple(choice)

    def polish(choice: tuple[int, ...]) -> tuple[tuple[int, ...], tuple, list[float]]:
        nonlocal evaluations
        current = list(choice)
        key = space.key(tuple(current))
        trace = [key[0]]
        for _ in range(config.max_passes):
            improved = False
            for i in range(k):
                base_key = space.key(tuple(current))
                best_row, best_key = current[i], base_key
                for row in range(space.starts[i].size):
                    if row == current[i]:
                        continue
                    trial = current.copy()
                    trial[i] = row
                    trial_key = space.key(tuple(trial))
                    evaluations += 1
                    if trial_key < best_key:
                        best_key, best_row = trial_key, row
                if best_row != current[i]:
                    current[i] = best_row
                    trace.append(best_key[0])
                    improved = True
            if not improved:
                break
        return tuple(current), space.key(tuple(current)), trace

    best_choice, best_key, best_trace = polish(preferred_choice())
    for _ in range(config.restarts):
        start = tuple(int(rng.integers(space.starts[i].size)) for i in range(k))
        choice, key, trace = polish(start)
        if key < best_key:
            best_choice, best_key, best_trace = choice, key, trace
    return best_choice, tuple(best_trace), evaluations


def solve(
    instances: Sequence[ApplianceInstance],
    objective: ObjectiveCurve,
    weights: DiscomfortWeights | None = None,
    pricing: PricingSignal | None = None,
    pv: PvSystem | None = None,
    config: SolverConfig | None = None,
    baseline: np.ndarray | None = None,
    not_before: int = 1,
) -> SolveResult:
    """Schedule every instance to track the objective curve.

    Fixed instances are pinned at their preferred starts; shiftable ones are
    optimized over their feasible start sets, exhaustively when the product
    of set sizes stays within ``config.exact_threshold``, otherwise by seeded
    local search.  With a PV system, sourcing flags are arbitrated against
    each intermediate schedule and start optimization repeats until the flags
    reach a fixed point (or the iteration cap); the best self-consistent
    schedule wins.

    Args:
        instances: all appliance instances (fixed and shiftable).
        objective: the curve to track.
        weights: discomfort weights (default: all zero).
        pricing: required when ``pv`` is given (peak windows drive timing).
        pv: optional PV/battery system.
        config: solver knobs.
        baseline: committed grid load added to every candidate curve.
        not_before: earliest permitted start (intra-day re-solves); deviation
            is likewise evaluated on slots >= this.

    Raises:
        InfeasibleProblemError: any instance has no feasible start.
    """
    weights = weights or DiscomfortWeights()
    config = config or SolverConfig()
    if pv is not None and pricing is None:
        raise ParameterError("pricing is required for PV arbitration")

    fixed = [i for i in instances if i.kind == "fixed"]
    shiftable = sorted(
        (i for i in instances if i.kind == "shiftable"), key=lambda i: i.instance_id
    )

    starts_by_id: dict[str, tuple[int, ...]] = {}
    offenders = []
    problems = []
    for inst in shiftable:
        try:
            starts_by_id[inst.instance_id] = feasible_starts(inst, not_before=not_before)
        except InfeasibleApplianceError as exc:
            offenders.append(inst.instance_id)
            problems.append(str(exc))
    if offenders:
        raise InfeasibleProblemError(
            "; ".join(problems), offenders=tuple(offenders)
        )

    fixed_curve = total_curve(fixed, preferred_starts(fixed)).values
    committed = fixed_curve if baseline is None else fixed_curve + np.asarray(baseline, dtype=float)
    residual = committed - objective.values
    blend = default_blend(objective) if config.blend is None else float(config.blend)
    max_duration = max((i.duration_slots for i in shiftable), default=0)

    product = 1
    for starts in starts_by_id.values():
        product *= len(starts)
    mode = "exhaustive" if product <= config.exact_threshold else "local_search"

    def optimize(flags: np.ndarray) -> tuple[dict[str, int], tuple[float, ...], int]:
        space = _CandidateSpace(
            shiftable, residual, flags, weights, blend, not_before, starts_by_id
        )
        if mode == "exhaustive":
            choice, evals = _enumerate_exact(space)
            trace = (space.key(choice)[0],)
        else:
            choice, trace, evals = _local_search(space, config)
        return space.starts_mapping(choice), trace, evals

    def complete(starts: dict[str, int], flags, soc) -> ScheduleAssignment:
        all_starts = {**preferred_starts(fixed), **starts}
        return ScheduleAssignment(starts=all_starts, pv_flags=flags, battery_soc=soc)

    def arbitrated(starts: dict[str, int]) -> tuple[np.ndarray, np.ndarray | None]:
        if pv is None:
            return np.zeros(SLOT_COUNT, dtype=bool), None
        demand = total_curve(shiftable, starts)
        result = pv_arbitrate(pv, demand, pricing, max_duration)
        return result.flags, result.soc

    def score(assignment: ScheduleAssignment) -> CostBreakdown:
        return evaluate_cost(
            assignment, objective, weights, instances,
            blend=blend, baseline=baseline, active_from=not_before,
        )

    evaluations = 0
    flags = np.zeros(SLOT_COUNT, dtype=bool)
    soc = None
    if pv is not None:
        preferred = {i.instance_id: i.preferred_start for i in shiftable}
        flags, soc = arbitrated(preferred)

    best: tuple[CostBreakdown, ScheduleAssignment, tuple[float, ...]] | None = None
    for _ in range(config.pv_iteration_cap if pv is not None else 1):
        starts, trace, evals = optimize(flags)
        evaluations += evals
        new_flags, new_soc = arbitrated(starts)
        candidate = complete(starts, new_flags, new_soc)
        cost = score(candidate)
        if best is None or cost.total < best[0].total:
            best = (cost, candidate, trace)
        if pv is None or np.array_equal(new_flags, flags):
            break
        flags, soc = new_flags, new_soc

    cost, assignment, trace = best
    return SolveResult(
        assignment=assignment, cost=cost, trace=trace, mode=mode, evaluations=evaluations
    )
