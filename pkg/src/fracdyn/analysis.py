"""Trajectory post-processing and the network experiments.

Builds on the solver and the Hopfield model to provide

* positive-maxima extraction and NPT/chaos classification of trajectories,
* bifurcation sweeps over q or w11 with per-cell maxima sets,
* basin-of-attraction scans on the plane 3.267 x1 + 0.493 x3 = 0,
* seeded random-neighborhood tests for self-excited attractors,
* the step-size ("h-delay") study of spurious bifurcation branches.

A trajectory is numerically periodic (NPT) when its positive maxima fall
into few narrow clusters and the final tail state recurs, up to linear
interpolation along the orbit, within a small closing error.  Attractor
identity is reduced to the sign of the tail mean of x1, which the origin
symmetry of the system makes meaningful.

Sweep and scan cells are independent jobs; with jobs > 1 they run in worker
processes and are reassembled by index, so results do not depend on the
worker count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .hopfield import HnnParams, HnnField, NOMINAL_EQUILIBRIA
from .solver import FractionalIVP, SolverConfig, Trajectory, abm_integrate

__all__ = [
    "ClassifierSettings",
    "MaximaSet",
    "TrajectoryClass",
    "SweepSpec",
    "BifurcationDataset",
    "ColumnFamily",
    "BranchShift",
    "ShiftTable",
    "PlaneSpec",
    "BasinGrid",
    "HiddenAttractorReport",
    "extract_maxima",
    "cluster_maxima",
    "closing_error",
    "classify_trajectory",
    "bifurcation_sweep",
    "cross_section",
    "basin_scan",
    "hidden_attractor_test",
    "branch_shift",
    "h_delay_study",
    "PLANE_NORMAL",
    "plane_basis",
    "LABEL_MINUS",
    "LABEL_UNDECIDED",
    "LABEL_PLUS",
    "LABEL_UNBOUNDED",
    "LABEL_NAMES",
]

# Basin label codes (also the CSV vocabulary and image byte mapping).
LABEL_MINUS = -1
LABEL_UNDECIDED = 0
LABEL_PLUS = 1
LABEL_UNBOUNDED = 2
LABEL_NAMES = {
    LABEL_MINUS: "minus",
    LABEL_UNDECIDED: "undecided",
    LABEL_PLUS: "plus",
    LABEL_UNBOUNDED: "unbounded",
}

PLANE_NORMAL = np.array([3.267, 0.0, 0.493])

ENVELOPE_QUANTILES = np.array([0.0, 0.25, 0.5, 0.75, 1.0])


@dataclass
class ClassifierSettings:
    """Tolerances of the trajectory classifier.

    Half the horizon is discarded as transient by default; long transients
    would otherwise masquerade as attractor structure.
    """

    eps_close: float = 1e-4
    cluster_width: float = 1e-3
    k_max: int = 32
    sign_threshold: float = 0.05
    transient_fraction: float = 0.5
    equilibrium_tol: float = 1e-6
    min_maxima: int = 10
    min_recurrence_lag: float = 2.0  # time units excluded around the endpoint


@dataclass
class MaximaSet:
    """Sorted positive local maxima of one state component after transient removal."""

    values: np.ndarray
    transient_fraction: float
    complete: bool = True


@dataclass
class TrajectoryClass:
    kind: str  # "equilibrium", "npt", "aperiodic" or "unbounded"
    period_count: int | None = None
    closing_error: float = float("nan")
    attractor_sign: str = "undecided"  # "plus", "minus" or "undecided"
    note: str = ""


def _tail(states, transient_fraction):
    return states[int(len(states) * transient_fraction):]


def extract_maxima(traj: Trajectory, transient_fraction=0.5, component=0):
    """Positive local maxima of one component, parabolically refined.

    Discards the leading ``transient_fraction`` of the samples, finds the
    interior indices with x[k-1] < x[k] >= x[k+1] and x[k] > 0, and sharpens
    each through the parabola of its three samples.  An unbounded trajectory
    yields an empty, incomplete set.
    """
    if not 0 <= transient_fraction < 1:
        raise ValueError(f"transient_fraction must lie in [0, 1), got {transient_fraction}")
    if not traj.completed:
        return MaximaSet(values=np.empty(0), transient_fraction=transient_fraction,
                         complete=False)
    x = _tail(traj.states, transient_fraction)[:, component]
    if len(x) < 3:
        return MaximaSet(values=np.empty(0), transient_fraction=transient_fraction)
    y0, y1, y2 = x[:-2], x[1:-1], x[2:]
    idx = np.where((y0 < y1) & (y1 >= y2) & (y1 > 0))[0] + 1
    vals = np.empty(len(idx))
    for out, k in enumerate(idx):
        a, b, c = x[k - 1], x[k], x[k + 1]
        den = a - 2.0 * b + c
        vals[out] = b if den == 0 else b - (c - a) ** 2 / (8.0 * den)
    vals.sort()
    return MaximaSet(values=vals, transient_fraction=transient_fraction)


def cluster_maxima(values, width=1e-3):
    """Greedy one-dimensional clustering of sorted values.

    Walks the sorted array opening a new cluster whenever the current one
    would exceed ``width``; cluster spans are therefore bounded by
    construction.  Returns a list of arrays.
    """
    values = np.asarray(values)
    if len(values) == 0:
        return []
    splits = []
    start = 0
    for i in range(1, len(values)):
        if values[i] - values[start] > width:
            splits.append(i)
            start = i
    return np.split(values, splits)


def closing_error(states, h, min_recurrence_lag=2.0):
    """Distance from the final state to the earlier orbit, range-normalized.

    Each component is scaled by its range over ``states``; the result is the
    minimum distance from the final point to the polyline through all
    samples older than ``min_recurrence_lag`` time units, i.e. the closing
    error min over lags of |x(end) - x(end - lag)| with linear interpolation
    between samples.
    """
    M = len(states)
    excl = max(2, int(round(min_recurrence_lag / h)))
    if M - excl < 2:
        return float("inf")
    rng = states.max(axis=0) - states.min(axis=0)
    rng[rng == 0] = 1.0
    Z = states / rng
    ref = Z[-1]
    P = Z[: M - excl - 1]
    S = Z[1: M - excl] - P
    L2 = np.einsum("ij,ij->i", S, S)
    L2[L2 == 0] = 1.0
    t = np.einsum("ij,ij->i", ref - P, S) / L2
    np.clip(t, 0.0, 1.0, out=t)
    D = P + t[:, None] * S - ref
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", D, D))))


def _sign_label(tail_mean, threshold):
    if tail_mean > threshold:
        return "plus"
    if tail_mean < -threshold:
        return "minus"
    return "undecided"


def classify_trajectory(traj: Trajectory, settings: ClassifierSettings | None = None):
    """Classify a trajectory as equilibrium, NPT(k), aperiodic or unbounded.

    After transient removal: an equilibrium when the tail state variation
    stays below the equilibrium tolerance; an NPT when the positive maxima
    of x1 fall into at most k_max clusters and the tail closes within
    eps_close; aperiodic otherwise.  Fewer than ``min_maxima`` maxima yield
    a low-confidence aperiodic verdict.  The attractor sign is the sign of
    the tail mean of x1 beyond the sign threshold.
    """
    s = settings or ClassifierSettings()
    if not traj.completed:
        return TrajectoryClass(kind="unbounded",
                               note=f"state norm blew up at step {traj.blowup_step}")
    tail = _tail(traj.states, s.transient_fraction)
    sign = _sign_label(float(np.mean(tail[:, 0])), s.sign_threshold)
    variation = float(np.max(tail.max(axis=0) - tail.min(axis=0)))
    if variation < s.equilibrium_tol:
        return TrajectoryClass(kind="equilibrium", closing_error=0.0,
                               attractor_sign=sign)
    mx = extract_maxima(traj, s.transient_fraction)
    h = float(traj.times[1] - traj.times[0])
    err = closing_error(tail, h, s.min_recurrence_lag)
    if len(mx.values) < s.min_maxima:
        return TrajectoryClass(kind="aperiodic", closing_error=err,
                               attractor_sign=sign,
                               note=f"low confidence, only {len(mx.values)} maxima")
    k = len(cluster_maxima(mx.values, s.cluster_width))
    if k <= s.k_max and err <= s.eps_close:
        return TrajectoryClass(kind="npt", period_count=k, closing_error=err,
                               attractor_sign=sign)
    return TrajectoryClass(kind="aperiodic", closing_error=err, attractor_sign=sign)


# ---------------------------------------------------------------------------
# bifurcation sweeps

@dataclass
class SweepSpec:
    """Parameter sweep: name ("q" or "w11"), closed range and grid count."""

    name: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.name not in ("q", "w11"):
            raise ValueError(f"sweep parameter must be 'q' or 'w11', got {self.name!r}")
        if self.count < 2:
            raise ValueError(f"sweep needs at least 2 grid points, got {self.count}")
        if self.lo > self.hi:
            raise ValueError(f"sweep range is empty: lo={self.lo} > hi={self.hi}")

    @property
    def grid(self):
        return np.linspace(self.lo, self.hi, self.count)


@dataclass
class SweepCell:
    """One sweep cell: maxima set plus the tail mean of x1 (attractor side)."""

    maxima: MaximaSet
    tail_mean: float
    completed: bool


@dataclass
class BifurcationDataset:
    """Per (grid value, initial condition) maxima sets of one sweep."""

    param_name: str
    grid: np.ndarray
    cells: dict  # (grid index, ic_id) -> SweepCell
    ics: list    # list of (ic_id, initial state)
    h: float
    T: float
    transient_fraction: float

    def ic_ids(self):
        return [ic_id for ic_id, _ in self.ics]

    def family(self, ic_ids):
        """Column family of the given ICs: per grid value, their cells."""
        if isinstance(ic_ids, str):
            ic_ids = [ic_ids]
        cells = [[self.cells[(i, ic_id)] for ic_id in ic_ids
                  if (i, ic_id) in self.cells]
                 for i in range(len(self.grid))]
        return ColumnFamily(grid=self.grid, cells=cells)


def _sweep_cell(task):
    (index, ic_id, W, q, ic, h, T, corr, blowup, frac) = task
    ivp = FractionalIVP(3, q, HnnField(HnnParams(W=W)), np.asarray(ic))
    cfg = SolverConfig(h=h, T=T, corrector_iterations=corr, blowup_threshold=blowup)
    traj = abm_integrate(ivp, cfg)
    mx = extract_maxima(traj, frac)
    if traj.completed:
        mean = float(np.mean(_tail(traj.states, frac)[:, 0]))
    else:
        mean = float("nan")
    return index, ic_id, SweepCell(maxima=mx, tail_mean=mean, completed=traj.completed)


def _run_tasks(worker, tasks, jobs):
    if jobs <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def bifurcation_sweep(params: HnnParams, sweep: SweepSpec, ics, config: SolverConfig,
                      q=0.99925, jobs=1, transient_fraction=0.5):
    """Sweep q or w11 over a grid, storing per-IC positive-maxima sets.

    ``ics`` is a list of (ic_id, initial state) pairs.  For a w11 sweep the
    fixed order is taken from ``q``; for a q sweep that argument is unused.
    Unbounded cells are recorded as incomplete and the sweep continues.
    Cells are independent; ``jobs`` > 1 distributes them over processes
    without changing the result.
    """
    grid = sweep.grid
    tasks = []
    for i, value in enumerate(grid):
        for ic_id, ic in ics:
            if sweep.name == "q":
                W, order = params.W, float(value)
            else:
                W, order = params.updated(w11=float(value)).W, q
            tasks.append((i, ic_id, W, order, np.asarray(ic, dtype=float),
                          config.h, config.T, config.corrector_iterations,
                          config.blowup_threshold, transient_fraction))
    cells = {}
    for index, ic_id, cell in _run_tasks(_sweep_cell, tasks, jobs):
        cells[(index, ic_id)] = cell
    return BifurcationDataset(param_name=sweep.name, grid=grid, cells=cells,
                              ics=[(ic_id, np.asarray(ic, dtype=float)) for ic_id, ic in ics],
                              h=config.h, T=config.T,
                              transient_fraction=transient_fraction)


def cross_section(bd: BifurcationDataset, value):
    """Dataset column at the grid value nearest to ``value``.

    Returns (actual grid value, {ic_id: MaximaSet}).  Values outside the
    grid range clamp to the nearest endpoint with a warning.
    """
    if not bd.cells:
        raise ValueError("empty bifurcation dataset")
    if value < bd.grid[0] or value > bd.grid[-1]:
        warnings.warn(f"cross-section value {value} outside grid range "
                      f"[{bd.grid[0]}, {bd.grid[-1]}], clamping")
    index = int(np.argmin(np.abs(bd.grid - value)))
    column = {ic_id: bd.cells[(index, ic_id)].maxima for ic_id in bd.ic_ids()
              if (index, ic_id) in bd.cells}
    return float(bd.grid[index]), column


# ---------------------------------------------------------------------------
# basin scans

def plane_basis():
    """Orthonormal basis of the plane 3.267 x1 + 0.493 x3 = 0.

    One axis runs along x2, the other along the in-plane direction
    (0.493, 0, -3.267), normalized, oriented so the nominal positive
    equilibrium sits at positive v.
    """
    e_u = np.array([0.0, 1.0, 0.0])
    e_v = np.array([PLANE_NORMAL[2], 0.0, -PLANE_NORMAL[0]])
    e_v = e_v / np.linalg.norm(e_v)
    return e_u, e_v


def _symmetric_axis(lo, hi, count):
    g = np.linspace(lo, hi, count)
    if lo == -hi:
        # make the grid exactly antisymmetric so reflected lattice points
        # are bitwise negations of each other
        g = (g - g[::-1]) / 2.0
    return g


@dataclass
class PlaneSpec:
    """Lattice extent and resolution on the invariant-symmetry plane."""

    u_lo: float = -5.0
    u_hi: float = 5.0
    v_lo: float = -5.0
    v_hi: float = 5.0
    n_u: int = 40
    n_v: int = 40

    def __post_init__(self):
        if self.n_u < 2 or self.n_v < 2:
            raise ValueError("basin lattice must be at least 2x2")
        if not (np.isfinite(self.u_lo) and np.isfinite(self.u_hi)
                and np.isfinite(self.v_lo) and np.isfinite(self.v_hi)):
            raise ValueError("basin extent must be finite")


@dataclass
class BasinGrid:
    """Attractor labels over a planar lattice of initial conditions.

    labels[iv, iu] holds the code of lattice point (u[iu], v[iv]); see
    LABEL_NAMES for the vocabulary.
    """

    u: np.ndarray
    v: np.ndarray
    basis: tuple  # (e_u, e_v)
    labels: np.ndarray  # int8, shape (n_v, n_u)
    q: float
    h: float
    T: float

    def point(self, iu, iv):
        e_u, e_v = self.basis
        return self.u[iu] * e_u + self.v[iv] * e_v


def _basin_cell(task):
    (iv, iu, ic, q, h, T, corr, blowup, frac, thr) = task
    ivp = FractionalIVP(3, q, HnnField(), np.asarray(ic))
    cfg = SolverConfig(h=h, T=T, corrector_iterations=corr, blowup_threshold=blowup)
    traj = abm_integrate(ivp, cfg)
    if not traj.completed:
        return iv, iu, LABEL_UNBOUNDED
    mean = float(np.mean(_tail(traj.states, frac)[:, 0]))
    if mean > thr:
        return iv, iu, LABEL_PLUS
    if mean < -thr:
        return iv, iu, LABEL_MINUS
    return iv, iu, LABEL_UNDECIDED


def basin_scan(plane: PlaneSpec, config: SolverConfig, q, jobs=1,
               settings: ClassifierSettings | None = None):
    """Label every lattice point of the plane by the attractor it reaches.

    Each point maps to the initial condition u*e_u + v*e_v, is integrated,
    and is labeled by the sign of its x1 tail mean (or as unbounded).
    Symmetric extents use exactly antisymmetric grids, so the odd symmetry
    of the field is testable bitwise on the labels.
    """
    s = settings or ClassifierSettings()
    e_u, e_v = plane_basis()
    u = _symmetric_axis(plane.u_lo, plane.u_hi, plane.n_u)
    v = _symmetric_axis(plane.v_lo, plane.v_hi, plane.n_v)
    tasks = []
    for iv in range(plane.n_v):
        for iu in range(plane.n_u):
            ic = u[iu] * e_u + v[iv] * e_v
            tasks.append((iv, iu, ic, q, config.h, config.T,
                          config.corrector_iterations, config.blowup_threshold,
                          s.transient_fraction, s.sign_threshold))
    labels = np.zeros((plane.n_v, plane.n_u), dtype=np.int8)
    for iv, iu, code in _run_tasks(_basin_cell, tasks, jobs):
        labels[iv, iu] = code
    return BasinGrid(u=u, v=v, basis=(e_u, e_v), labels=labels,
                     q=q, h=config.h, T=config.T)


# ---------------------------------------------------------------------------
# self-excited / hidden attractor tests

@dataclass
class HiddenAttractorReport:
    """Tallies of attractor signs reached from equilibrium neighborhoods."""

    tallies: dict          # equilibrium label -> {sign name: count}
    self_excited: dict     # attractor sign ("plus"/"minus") -> bool
    inconclusive: bool
    radius: float
    count: int
    seed: int


def hidden_attractor_test(q, equilibria, radius, count, seed,
                          config: SolverConfig, jobs=1,
                          settings: ClassifierSettings | None = None):
    """Sample equilibrium neighborhoods and tally the attractors reached.

    Draws ``count`` points uniformly from the ball of ``radius`` around each
    equilibrium (Gaussian direction, radius scaled by U^(1/3); seeded and
    reproducible), integrates each, and classifies the attractor sign.  An
    attractor is self-excited when at least one neighborhood trajectory
    reaches it.  ``equilibria`` is a list of (label, point) pairs.
    """
    if count < 1:
        raise ValueError(f"need at least one sample, got count={count}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    s = settings or ClassifierSettings()
    rng = np.random.default_rng(seed)
    tasks = []
    order = []
    for label, point in equilibria:
        point = np.asarray(point, dtype=float)
        for k in range(count):
            direction = rng.standard_normal(3)
            direction /= np.linalg.norm(direction)
            r = radius * rng.random() ** (1.0 / 3.0)
            ic = point + r * direction
            tasks.append((0, k, ic, q, config.h, config.T,
                          config.corrector_iterations, config.blowup_threshold,
                          s.transient_fraction, s.sign_threshold))
            order.append(label)
    results = _run_tasks(_basin_cell, tasks, jobs)
    tallies = {label: {name: 0 for name in LABEL_NAMES.values()}
               for label, _ in equilibria}
    for label, (_, _, code) in zip(order, results):
        tallies[label][LABEL_NAMES[code]] += 1
    reached = {"plus": sum(t["plus"] for t in tallies.values()),
               "minus": sum(t["minus"] for t in tallies.values())}
    total = sum(sum(t.values()) for t in tallies.values())
    unbounded = sum(t["unbounded"] for t in tallies.values())
    return HiddenAttractorReport(
        tallies=tallies,
        self_excited={sign: n > 0 for sign, n in reached.items()},
        inconclusive=unbounded == total,
        radius=radius, count=count, seed=seed,
    )


# ---------------------------------------------------------------------------
# branch shift and the h-delay study

@dataclass
class ColumnFamily:
    """Cells of one or more ICs arranged along a sweep grid."""

    grid: np.ndarray
    cells: list  # per grid index: list of SweepCell


def _sign_envelopes(family: ColumnFamily, threshold):
    """Quantile envelopes of a family, split by attractor sign.

    Returns {sign: (grid values with data, quantile matrix)}; cells pooled
    per grid value by the sign of their tail mean.
    """
    out = {}
    for sign in ("plus", "minus"):
        ps, rows = [], []
        for i, cells in enumerate(family.cells):
            pool = [c.maxima.values for c in cells
                    if c.completed and len(c.maxima.values)
                    and _sign_label(c.tail_mean, threshold) == sign]
            if pool:
                ps.append(family.grid[i])
                rows.append(np.quantile(np.concatenate(pool), ENVELOPE_QUANTILES))
        if ps:
            out[sign] = (np.array(ps), np.array(rows))
    return out


@dataclass
class BranchShift:
    """Signed horizontal displacement of a branch family.

    delta > 0 means the test family sits left of the reference in parameter
    space; residual is the discrepancy after the optimal shift and
    discrepancy_at_zero the unshifted one.
    """

    delta: float
    residual: float
    discrepancy_at_zero: float


def _family_discrepancy(test: ColumnFamily, envelopes, d, threshold):
    total, n = 0.0, 0
    for i, cells in enumerate(test.cells):
        p = test.grid[i] + d
        for c in cells:
            if not c.completed or not len(c.maxima.values):
                continue
            sign = _sign_label(c.tail_mean, threshold)
            if sign not in envelopes:
                continue
            ps, rows = envelopes[sign]
            if p < ps[0] or p > ps[-1]:
                continue
            Q = np.quantile(c.maxima.values, ENVELOPE_QUANTILES)
            ref = np.array([np.interp(p, ps, rows[:, col])
                            for col in range(rows.shape[1])])
            total += float(np.mean(np.abs(Q - ref)))
            n += 1
    return total / n if n else float("inf")


def branch_shift(reference: ColumnFamily, test: ColumnFamily,
                 search_span_cells=20, sign_threshold=0.05):
    """Horizontal displacement that best aligns a test family to a reference.

    Each test cell is compared against the reference quantile envelope of
    its own attractor sign, interpolated at the shifted parameter value; the
    mean discrepancy is minimized over displacements up to
    ``search_span_cells`` grid cells, on a sub-grid of one tenth of the
    spacing.  Ties prefer the smallest displacement.
    """
    if not np.array_equal(reference.grid, test.grid):
        raise ValueError("reference and test families must share the same grid")
    if all(len(cells) == 0 for cells in test.cells):
        raise ValueError("test family has no cells")
    envelopes = _sign_envelopes(reference, sign_threshold)
    if not envelopes:
        raise ValueError("reference family has no classifiable cells")
    spacing = float(test.grid[1] - test.grid[0]) if len(test.grid) > 1 else 1.0
    if spacing == 0.0:
        spacing = 1.0
    step = spacing / 10.0
    offsets = np.arange(-search_span_cells * 10, search_span_cells * 10 + 1) * step
    best_d, best_disc = 0.0, float("inf")
    disc_zero = float("inf")
    for d in sorted(offsets, key=abs):
        disc = _family_discrepancy(test, envelopes, d, sign_threshold)
        if d == 0.0:
            disc_zero = disc
        if disc < best_disc:
            best_d, best_disc = float(d), disc
    return BranchShift(delta=best_d, residual=best_disc,
                       discrepancy_at_zero=disc_zero)


@dataclass
class ShiftRow:
    h: float
    ic_id: str
    delta: float
    residual: float
    discrepancy_at_zero: float


@dataclass
class ShiftTable:
    """Branch displacements per step size from an h-delay study."""

    rows: list
    sweep: SweepSpec
    T: float
    h_list: list

    def row(self, h, ic_id):
        for r in self.rows:
            if r.h == h and r.ic_id == ic_id:
                return r
        raise KeyError(f"no row for h={h}, ic={ic_id}")


DEFAULT_REFERENCE_ICS = (
    ("ref-plus", NOMINAL_EQUILIBRIA["X1"]),
    ("ref-minus", np.array([1e-3, 1e-3, 1e-3])),
)
DEFAULT_OUTSIDE_ICS = (
    ("out-plus", np.array([2.0, 2.0, 2.0])),
    ("out-minus", np.array([-2.0, -2.0, -2.0])),
)


def h_delay_study(params: HnnParams, sweep: SweepSpec, h_list, T,
                  reference_ics=DEFAULT_REFERENCE_ICS,
                  outside_ics=DEFAULT_OUTSIDE_ICS,
                  q=0.99925, jobs=1, transient_fraction=0.5,
                  corrector_iterations=1, search_span_cells=20):
    """Quantify how spurious branches move as the step size shrinks.

    Runs the sweep once per step size in ``h_list`` (at least two entries,
    strictly decreasing), then measures the branch_shift of every
    outside-IC family against the reference families at the finest step.
    A pooled "reference" row per h records how much the reference branches
    themselves move across step sizes (their discrepancy_at_zero).
    """
    hs = list(h_list)
    if len(hs) < 2:
        raise ValueError("h-delay study needs at least two step sizes")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("step sizes must be strictly decreasing")
    all_ics = list(reference_ics) + list(outside_ics)
    datasets = {}
    for h in hs:
        cfg = SolverConfig(h=h, T=T, corrector_iterations=corrector_iterations)
        datasets[h] = bifurcation_sweep(params, sweep, all_ics, cfg, q=q,
                                        jobs=jobs,
                                        transient_fraction=transient_fraction)
    ref_ids = [ic_id for ic_id, _ in reference_ics]
    reference = datasets[hs[-1]].family(ref_ids)
    rows = []
    for h in hs:
        for ic_id, _ in outside_ics:
            shift = branch_shift(reference, datasets[h].family(ic_id),
                                 search_span_cells=search_span_cells)
            rows.append(ShiftRow(h=h, ic_id=ic_id, delta=shift.delta,
                                 residual=shift.residual,
                                 discrepancy_at_zero=shift.discrepancy_at_zero))
        self_shift = branch_shift(reference, datasets[h].family(ref_ids),
                                  search_span_cells=search_span_cells)
        rows.append(ShiftRow(h=h, ic_id="reference", delta=self_shift.delta,
                             residual=self_shift.residual,
                             discrepancy_at_zero=self_shift.discrepancy_at_zero))
    return ShiftTable(rows=rows, sweep=sweep, T=T, h_list=hs)
