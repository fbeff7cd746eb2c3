"""Cache placement optimisation over the level hierarchy.

The decision vector x assigns x_m files to level m: each of those files
is spread one 4^{-m} fraction per node across every level-m cluster, so
a file at level m costs 4^{-m} of the per-node cache and is served over
m tree edges. Given per-level capacities, a popularity model and a cache
budget, the solver maximises the per-node throughput with a
relax-round-rebalance recipe: an exact solution of the continuous
relaxation via nested bisection, a carry-based rounding that never
overshoots the cache, and a local rebalancing loop that keeps shifting
single files between levels while the bottleneck ratio improves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    BracketError,
    InfeasibleProblemError,
    InvalidParameterError,
    InvariantViolationError,
)
from .hierarchy import LevelCapacities, NetworkGrid
from .popularity import PopularityModel, tail_inverse, tail_mass


@dataclass(frozen=True)
class PlacementVector:
    """Integer placement: x[m] files are cached at level m, m = 0..M."""

    x: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.x:
            raise InvalidParameterError("placement vector cannot be empty")
        if any(v < 0 for v in self.x):
            raise InvariantViolationError(f"negative file counts in {self.x!r}")

    @property
    def M(self) -> int:
        return len(self.x) - 1

    @property
    def L(self) -> int:
        return sum(self.x)

    @property
    def m_b(self) -> int:
        """Highest occupied level (0 when everything is cached locally)."""
        top = 0
        for m, v in enumerate(self.x):
            if v:
                top = m
        return top

    def prefix(self, m: int) -> int:
        """Number of files cached strictly below level m."""
        return sum(self.x[:m])

    def cache_load(self) -> float:
        """Per-node cache usage in file-size units: sum_m x_m 4^{-m}."""
        return math.fsum(v * 4.0 ** (-m) for m, v in enumerate(self.x))

    def validate(self, L: int, l_c: float) -> None:
        """Raise unless the vector places exactly L files within budget l_c."""
        if self.L != L:
            raise InvariantViolationError(
                f"placement holds {self.L} files, library has {L}")
        load = self.cache_load()
        if load > l_c + 1e-12:
            raise InvariantViolationError(
                f"placement needs {load} cache per node, budget is {l_c}")


@dataclass(frozen=True)
class RelaxedSolution:
    """Optimal fractional placement: occupancies, rate, lowest occupied level."""

    x_star: tuple[float, ...]
    r_star: float
    m_star: int


@dataclass(frozen=True)
class ThroughputReport:
    """Achieved per-node rate and which level binds it.

    per_level_slack[m - 1] is the headroom of level m's capacity ratio
    over the achieved rate for m = 1..m_b (inf where the level carries no
    traffic); the entry at the binding level is zero. A placement with
    every file at level 0 produces an unbounded report: rate == inf is a
    marker there, never an operand.
    """

    rate: float
    unbounded: bool
    binding_level: int | None
    per_level_slack: tuple[float, ...]
    m_b: int
    guarantee_floor: float | None = None


@dataclass(frozen=True)
class ContentPlacement:
    """Per-file level assignment plus the per-node cache load it induces."""

    file_level: np.ndarray
    per_node_load: float


@dataclass(frozen=True)
class PlacementOutcome:
    """Bundle returned by the full optimisation pipeline."""

    placement: PlacementVector
    report: ThroughputReport
    relaxed: RelaxedSolution


def evaluate_throughput(x: PlacementVector, caps: LevelCapacities,
                        pop: PopularityModel,
                        l_c: float | None = None) -> ThroughputReport:
    """Largest rate the tree supports for placement x.

    Level m carries the popularity tail past the files cached below it,
    shares its capacity round-robin over the m_b active levels, and the
    minimum ratio over the active levels is the achieved rate. Levels with
    zero tail contribute no constraint.
    """
    if x.L != pop.L:
        raise InvariantViolationError(
            f"placement holds {x.L} files, library has {pop.L}")
    if x.M != caps.M:
        raise InvariantViolationError(
            f"placement has {x.M} levels, capacities have {caps.M}")
    if l_c is not None:
        x.validate(pop.L, l_c)
    m_b = x.m_b
    if m_b == 0:
        return ThroughputReport(rate=math.inf, unbounded=True, binding_level=None,
                                per_level_slack=(), m_b=0)
    suffix = pop.suffix_mass
    ratios: list[float] = []
    best = math.inf
    binding: int | None = None
    p = 0
    for m in range(1, m_b + 1):
        p += x.x[m - 1]
        t = float(suffix[p])
        if t <= 0.0:
            ratios.append(math.inf)
            continue
        r = caps.cbar[m] / (m_b * t)
        ratios.append(r)
        if r < best:
            best, binding = r, m
    slack = tuple(r - best if math.isfinite(r) else math.inf for r in ratios)
    return ThroughputReport(rate=best, unbounded=False, binding_level=binding,
                            per_level_slack=slack, m_b=m_b)


def relaxed_rate(x_real, caps: LevelCapacities, pop: PopularityModel) -> float:
    """Rate of a fractional placement under the relaxed capacities.

    No round-robin share here: the relaxation charges level m with its
    full cbar[m]. Used to check that no feasible fractional point beats
    the relaxed optimum.
    """
    best = math.inf
    p = 0.0
    for m in range(1, len(x_real)):
        p += x_real[m - 1]
        t = tail_mass(pop, min(p, float(pop.L)) + 1.0)
        if t > 0.0:
            best = min(best, caps.cbar[m] / t)
    return best


def relaxed_cache_load(m_star: int, r: float, caps: LevelCapacities,
                       pop: PopularityModel) -> float:
    """Cache mass of the balanced fractional solution at rate r.

    With m_star the lowest occupied level, every level above it holds
    exactly the files needed to keep its capacity ratio at r. Strictly
    increasing in r wherever some capacity-to-rate ratio is below one,
    and saturating at L 4^{-m_star} as r grows.
    """
    M, L = caps.M, pop.L
    total = (L + 1.0) * 4.0 ** (-M) - 4.0 ** (-m_star)
    for m in range(m_star + 1, M + 1):
        total += 3.0 * tail_inverse(pop, caps.cbar[m] / r) * 4.0 ** (-m)
    return total


def relaxed_solution_at(m_star: int, r: float, caps: LevelCapacities,
                        pop: PopularityModel) -> list[float]:
    """Fractional placement solving the per-level balance equalities at rate r.

    Telescoping construction: level occupancies are successive differences
    of tail inverses, so the total is exactly L by construction.
    """
    M, L = caps.M, pop.L
    xs = [0.0] * (M + 1)
    if m_star >= M:
        xs[M] = float(L)
        return xs
    finv = [tail_inverse(pop, caps.cbar[m] / r) for m in range(m_star + 1, M + 1)]
    xs[m_star] = finv[0] - 1.0
    for m in range(m_star + 1, M):
        xs[m] = finv[m - m_star] - finv[m - 1 - m_star]
    xs[M] = L - finv[M - 1 - m_star] + 1.0
    for m, v in enumerate(xs):
        if v < -1e-9:
            raise BracketError(
                f"negative occupancy x[{m}] = {v}: rate {r} outside its bracket")
        if v < 0.0:
            xs[m] = 0.0
    return xs


def solve_relaxed(grid: NetworkGrid, caps: LevelCapacities,
                  pop: PopularityModel, l_c: float) -> RelaxedSolution:
    """Exact solution of the continuous placement relaxation.

    An outer bisection locates the lowest occupied level m*: pushing m*
    down when the budget can still afford the cheaper level, up when it
    cannot. The inner solve then finds the unique rate at which the
    implied cache mass meets the budget exactly.
    """
    M, L = grid.M, pop.L
    min_load = L * 4.0 ** (-M)
    if l_c < min_load - 1e-12:
        raise InfeasibleProblemError(
            f"cache budget {l_c} cannot hold the library: "
            f"needs at least {min_load} per node")
    if l_c >= L:
        raise InvalidParameterError(
            f"cache budget {l_c} stores the whole library locally; nothing to optimise")
    if relaxed_cache_load(0, caps.cbar[1], caps, pop) < l_c:
        m_star = 0
    elif min_load >= l_c:
        return _all_at_top(M, L, caps)
    else:
        m_lo, m_hi = 0, M
        m_star = (m_lo + m_hi) // 2
        while True:
            if relaxed_cache_load(m_star, caps.cbar[m_star + 1], caps, pop) >= l_c:
                m_lo = m_star
            elif relaxed_cache_load(m_star, caps.cbar[m_star], caps, pop) < l_c:
                m_hi = m_star
            else:
                break
            if m_hi - m_lo == 1:
                m_star = m_hi
                break
            m_star = (m_lo + m_hi) // 2
        if m_star == M:
            # budget coincides with the all-at-top load up to float dust
            return _all_at_top(M, L, caps)
    r_star = _solve_rate(m_star, caps, pop, l_c)
    xs = relaxed_solution_at(m_star, r_star, caps, pop)
    return RelaxedSolution(tuple(xs), r_star, m_star)


def _all_at_top(M: int, L: int, caps: LevelCapacities) -> RelaxedSolution:
    xs = [0.0] * (M + 1)
    xs[M] = float(L)
    return RelaxedSolution(tuple(xs), caps.cbar[M], M)


def _solve_rate(m_star: int, caps: LevelCapacities, pop: PopularityModel,
                l_c: float, rel_tol: float = 4e-16) -> float:
    """Rate r in (cbar[m*+1], cbar[m*]] at which the cache mass equals l_c.

    Plain bisection (the load is monotone in r) down to machine precision,
    then a closed-form snap: once the bracket pins every tail inverse to a
    single linear segment the load is affine in 1/r and the root is exact.
    The snap is kept only when it actually reduces the residual.
    """
    lo = caps.cbar[m_star + 1]
    if relaxed_cache_load(m_star, lo, caps, pop) >= l_c:
        return lo  # root sits at the open end: boundary with level m*+1
    hi = caps.cbar[m_star]
    if not math.isfinite(hi):
        hi = max(lo, 1e-300)
        for _ in range(2100):
            hi *= 2.0
            if relaxed_cache_load(m_star, hi, caps, pop) >= l_c:
                break
        else:
            raise BracketError("cache load never reaches the budget")
    for _ in range(200):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if relaxed_cache_load(m_star, mid, caps, pop) < l_c:
            lo = mid
        else:
            hi = mid
    a = (pop.L + 1.0) * 4.0 ** (-caps.M) - 4.0 ** (-m_star)
    b = 0.0
    for m in range(m_star + 1, caps.M + 1):
        y = caps.cbar[m] / hi
        w = 3.0 * 4.0 ** (-m)
        if y >= 1.0:
            a += w  # ratio inactive on this segment: inverse pinned at 1
            continue
        k = min(int(tail_inverse(pop, y)), pop.L)
        p_k = float(pop.pmf[k])
        a += w * (k + 1.0 + float(pop.suffix_mass[k]) / p_k)
        b += w * caps.cbar[m] / p_k
    if a - l_c > 0.0 and b > 0.0:
        r_snap = b / (a - l_c)
        if lo <= r_snap <= hi * (1.0 + 1e-12):
            err_snap = abs(relaxed_cache_load(m_star, r_snap, caps, pop) - l_c)
            err_hi = abs(relaxed_cache_load(m_star, hi, caps, pop) - l_c)
            if err_snap <= err_hi:
                return r_snap
    return hi


def check_optimality(sol: RelaxedSolution, caps: LevelCapacities,
                     pop: PopularityModel, l_c: float) -> list[float]:
    """Relative residuals of the optimality system; all ~0 at a true optimum.

    Order: the per-level balance equalities for m = m*+1..M, the rate cap
    at level m*, the total-files equality, the cache-budget equality.
    """
    M, L = caps.M, pop.L
    res: list[float] = []
    prefix = 0.0
    for m in range(sol.m_star + 1, M + 1):
        prefix += sol.x_star[m - 1]
        t = tail_mass(pop, min(prefix, float(L)) + 1.0)
        res.append(abs(t * sol.r_star - caps.cbar[m]) / caps.cbar[m])
    cap = caps.cbar[sol.m_star]
    res.append(max(0.0, (sol.r_star - cap) / cap) if math.isfinite(cap) else 0.0)
    res.append(abs(math.fsum(sol.x_star) - L) / L)
    load = math.fsum(v * 4.0 ** (-m) for m, v in enumerate(sol.x_star))
    res.append(abs(load - l_c) / l_c)
    return res


def round_to_feasible(sol: RelaxedSolution, grid: NetworkGrid) -> PlacementVector:
    """Carry-based integer rounding of the fractional solution.

    Level by level from m* upward, each level keeps the floor of its
    target plus whatever cache the levels below released (rescaled to this
    level's per-file cost), and the level where the running total reaches
    L absorbs the remainder; levels above it get nothing. Floors only ever
    release cache, so the weighted load never exceeds the fractional one.
    """
    M = grid.M
    L = round(math.fsum(sol.x_star))
    xo = [0] * (M + 1)
    carry = 0.0
    cum = 0
    for m in range(sol.m_star, M + 1):
        val = sol.x_star[m] + carry * 4.0 ** m
        near = round(val)
        xm = near if abs(val - near) < 1e-9 else math.floor(val)
        carry = sol.x_star[m] * 4.0 ** (-m) + carry - xm * 4.0 ** (-m)
        if cum + xm >= L:
            xo[m] = L - cum
            cum = L
            break
        xo[m] = xm
        cum += xm
    if cum < L:
        xo[M] += L - cum  # unreachable for a consistent solution; keeps the sum exact
    return PlacementVector(tuple(xo))


def rebalance(x: PlacementVector, caps: LevelCapacities, pop: PopularityModel,
              l_c: float) -> PlacementVector:
    """Local search over single-file moves between adjacent levels.

    Each round moves one file from the lowest level holding more than one
    file up a level, then pulls files down from the top level into that
    slot while the cache budget allows, and keeps the move only if the
    bottleneck capacity ratio strictly improves. Accepted moves strictly
    raise that ratio over a finite set of placements, so the loop
    terminates; the iteration cap only guards against implementation bugs.
    """
    M = x.M
    xs = list(x.x)
    L = sum(xs)
    for _ in range(max(1, 10 * L * max(M, 1))):
        m_top = _highest_occupied(xs)
        m_low = _lowest_multi(xs)
        if m_low is None or m_top - m_low <= 2:
            return PlacementVector(tuple(xs))
        trial = list(xs)
        trial[m_low] -= 1
        trial[m_low + 1] += 1
        top = _highest_occupied(trial)
        while top > m_low + 1 and trial[top] > 0:
            load_after = _load(trial) - 4.0 ** (-top) + 4.0 ** (-(m_low + 1))
            if load_after > l_c + 1e-12:
                break
            trial[top] -= 1
            trial[m_low + 1] += 1
            top = _highest_occupied(trial)
        r_new = _bottleneck(trial, m_low, _highest_occupied(trial), caps, pop)
        r_old = _bottleneck(xs, m_low, m_top, caps, pop)
        if r_new > r_old:
            xs = trial
        else:
            return PlacementVector(tuple(xs))
    raise InvariantViolationError("rebalance failed to terminate within its iteration cap")


def _highest_occupied(xs: list[int]) -> int:
    top = 0
    for m, v in enumerate(xs):
        if v:
            top = m
    return top


def _lowest_multi(xs: list[int]) -> int | None:
    for m, v in enumerate(xs):
        if v > 1:
            return m
    return None


def _load(xs: list[int]) -> float:
    return math.fsum(v * 4.0 ** (-m) for m, v in enumerate(xs))


def _bottleneck(xs: list[int], m_from: int, m_to: int, caps: LevelCapacities,
                pop: PopularityModel) -> float:
    """Min over m in [m_from, m_to] of cbar[m] / (tail past the files held
    in levels m_from..m-1); the level-m_from term is just cbar[m_from]."""
    best = math.inf
    held = 0
    for m in range(m_from, m_to + 1):
        t = float(pop.suffix_mass[min(held, pop.L)])
        if t > 0.0:
            best = min(best, caps.cbar[m] / t)
        held += xs[m]
    return best


def place_contents(x: PlacementVector, pop: PopularityModel) -> ContentPlacement:
    """Assign files to levels in popularity order, lowest levels first.

    file_level[l] is the level of rank l for l = 1..L (entry 0 unused);
    the map is non-decreasing in l.
    """
    levels = np.zeros(pop.L + 1, dtype=np.int64)
    levels[1:] = np.repeat(np.arange(len(x.x), dtype=np.int64), x.x)
    levels.setflags(write=False)
    return ContentPlacement(file_level=levels, per_node_load=x.cache_load())


def guarantee_floor(r_star: float, M: int, tau: float) -> float:
    """Provable fraction of the relaxed optimum that rounding preserves."""
    return r_star / (M * (1.0 + 2.0 ** tau))


def optimize_placement(grid: NetworkGrid, caps: LevelCapacities,
                       pop: PopularityModel, l_c: float) -> PlacementOutcome:
    """Full pipeline: relax, round, rebalance, evaluate.

    The report carries the guarantee floor derived from the relaxed
    optimum; the achieved rate never falls below it.
    """
    sol = solve_relaxed(grid, caps, pop, l_c)
    rounded = round_to_feasible(sol, grid)
    balanced = rebalance(rounded, caps, pop, l_c)
    report = evaluate_throughput(balanced, caps, pop, l_c)
    floor = guarantee_floor(sol.r_star, grid.M, pop.tau)
    return PlacementOutcome(placement=balanced,
                            report=replace(report, guarantee_floor=floor),
                            relaxed=sol)


def placement_document(x: PlacementVector, l_c: float, rate: float) -> dict:
    """JSON-ready description of a solved placement."""
    return {"M": x.M, "L": x.L, "L_C": l_c, "x": list(x.x),
            "rate_bits_per_s_hz": rate}


def placement_from_document(doc: dict) -> tuple[PlacementVector, float, float]:
    """Parse a placement document back into (vector, budget, rate)."""
    pv = PlacementVector(tuple(int(v) for v in doc["x"]))
    if pv.M != int(doc["M"]) or pv.L != int(doc["L"]):
        raise InvariantViolationError("placement document fields disagree with x")
    return pv, float(doc["L_C"]), float(doc["rate_bits_per_s_hz"])
