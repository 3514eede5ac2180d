"""Exact-to-epsilon solver for the binary quadratic subproblem.

The BQP  min_{psi in {0,1}^D} psi^T S psi - 2 v^T psi + rho  is rewritten as
maximization of f = f+ - f- with f+(psi) = 2 v^T psi and f-(psi) = psi^T S psi,
subject to the monotone constraint g(psi) - h(psi) <= 0 on the box [0,1]^D
(g = sum psi_d, h = sum psi_d^2), which is equivalent to binarity. A
branch-reduce-and-bound loop then drives the incumbent to epsilon-accuracy:
boxes are tightened by per-coordinate bisection on the monotone conditions,
upper-bounded by f+(hi) - f-(lo), and split along their longest edge.

Validity of the monotone machinery needs f- nondecreasing on the box, which
holds iff S is entrywise nonnegative (PSD alone is not enough); the training
loop's Gram construction sum theta theta^T with theta >= 0 guarantees it.

An exhaustive enumeration oracle is provided for verification.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit as _njit

    def _maybe_jit(fn):
        return _njit(cache=True)(fn)
except ImportError:  # pragma: no cover - numba is a declared dependency
    def _maybe_jit(fn):
        return fn

SYM_TOL = 1e-12
EIG_TOL = 1e-9
# Reduced vertices within this margin of an integer snap to it (enlarging
# direction only): bisection on float conditions can otherwise overshoot a
# binary coordinate by ~sqrt(ulp) and silently drop a feasible point.
SNAP_TOL = 1e-6
DEFAULT_EPS_ACC = 1.0 - 1e-6
DEFAULT_BISECT_TOL = 1e-9
MAX_HALVINGS = 60
BRUTE_DIM_LIMIT = 24


class ResourceLimitError(RuntimeError):
    """Raised when an iteration or size budget is exhausted.

    For the branch-reduce-and-bound loop, carries the incumbent and its
    certificate gap (best remaining upper bound minus incumbent value).
    """

    def __init__(self, message, incumbent=None, gap=None):
        super().__init__(message)
        self.incumbent = incumbent
        self.gap = gap


class DegenerateBoxError(ValueError):
    """Branching a zero-volume box; callers evaluate and discard instead."""


@dataclass(frozen=True)
class BqpInstance:
    """Quadratic minimization data over binary vectors of dimension dim."""

    s_mat: np.ndarray
    v_vec: np.ndarray
    rho: float
    dim: int = field(default=None)

    def __post_init__(self):
        s = np.asarray(self.s_mat, dtype=float)
        v = np.asarray(self.v_vec, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or v.shape != (s.shape[0],):
            raise ValueError("s_mat must be square and v_vec matching 1-d")
        if np.max(np.abs(s - s.T), initial=0.0) > SYM_TOL:
            raise ValueError("s_mat must be symmetric")
        if np.min(np.linalg.eigvalsh(s)) < -EIG_TOL:
            raise ValueError("s_mat must be positive semidefinite")
        if np.any(v < 0.0):
            raise ValueError("v_vec must be entrywise nonnegative")
        if self.rho < 0.0:
            raise ValueError("rho must be nonnegative")
        object.__setattr__(self, "s_mat", s)
        object.__setattr__(self, "v_vec", v)
        object.__setattr__(self, "dim", s.shape[0])


def bqp_objective(inst, psi):
    """Original objective psi^T S psi - 2 v^T psi + rho (rho included)."""
    psi = np.asarray(psi, dtype=float)
    return float(psi @ inst.s_mat @ psi - 2.0 * inst.v_vec @ psi + inst.rho)


@dataclass(frozen=True)
class DmfInstance:
    """The same payload read as a difference of monotone functions.

    f(psi) = f+(psi) - f-(psi) = -(psi^T S psi - 2 v^T psi); binarity becomes
    g(psi) - h(psi) <= 0 on [0,1]^D. All four functions are nondecreasing on
    the box: f+ because v >= 0, f- iff S is entrywise nonnegative (the exact
    form of the directional monotonicity condition, since the directional
    derivative 2(S psi)_d is minimized over the box at a vertex).
    """

    s_mat: np.ndarray
    v_vec: np.ndarray
    rho: float
    dim: int = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "dim", self.s_mat.shape[0])

    def f_plus(self, psi):
        return float(2.0 * self.v_vec @ np.asarray(psi, dtype=float))

    def f_minus(self, psi):
        psi = np.asarray(psi, dtype=float)
        return float(psi @ self.s_mat @ psi)

    def f(self, psi):
        return self.f_plus(psi) - self.f_minus(psi)

    def g(self, psi):
        return float(np.sum(psi))

    def h(self, psi):
        psi = np.asarray(psi, dtype=float)
        return float(psi @ psi)


def reformulate(inst):
    """Reinterpret a BqpInstance as its monotone-difference form.

    Raises ValueError when f- would not be monotone on the box (negative
    entries in S), since reduction and bounding are unsound there.
    """
    if np.any(inst.s_mat < 0.0):
        raise ValueError(
            "monotone reformulation needs an entrywise-nonnegative s_mat")
    return DmfInstance(s_mat=inst.s_mat, v_vec=inst.v_vec, rho=inst.rho)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] inside the unit cube."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be matching 1-d arrays")
        if np.any(lo < 0.0) or np.any(hi > 1.0) or np.any(lo > hi):
            raise ValueError("box must satisfy 0 <= lo <= hi <= 1")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    def is_point(self):
        return bool(np.all(self.hi - self.lo <= 0.0))


def unit_box(dim):
    return Box(lo=np.zeros(dim), hi=np.ones(dim))


@dataclass(frozen=True)
class ReductionOutcome:
    """Reduced box plus the per-coordinate shrink factors.

    discard=True certifies no point of the input box is feasible with
    objective value >= nu.
    """

    box: Box
    alphas: np.ndarray
    betas: np.ndarray
    discard: bool


def _reduce_arrays(a, b, s_mat, v_vec, nu, tol, max_halvings, snap_tol):
    """Tighten [a, b] without losing any feasible point of value >= nu.

    Per-coordinate suprema alpha_d, beta_d of the monotone feasibility
    conditions are located by bisection; the infeasible-side endpoint is
    returned so boxes are never over-shrunk. Endpoints 0 and 1 are tested by
    direct evaluation (exact at binary coordinates). Returns
    (a2, b2, alphas, betas, discard).
    """
    ndim = a.size
    a2 = a.copy()
    b2 = b.copy()
    alphas = np.ones(ndim)
    betas = np.ones(ndim)
    fplus_b = 0.0
    g_a = 0.0
    h_b = 0.0
    for d in range(ndim):
        fplus_b += 2.0 * v_vec[d] * b[d]
        g_a += a[d]
        h_b += b[d] * b[d]
    fminus_a = 0.0
    for i in range(ndim):
        acc = 0.0
        for j in range(ndim):
            acc += s_mat[i, j] * a[j]
        fminus_a += a[i] * acc
    # conditions at alpha = 0 (the point is b itself) decide an early discard
    if g_a - h_b > 0.0 or fplus_b - fminus_a < nu:
        return a2, b2, alphas, betas, True

    for d in range(ndim):
        delta = b[d] - a[d]
        if delta <= 0.0:
            continue
        feas_at = _alpha_feasible(a, b, s_mat, v_vec, nu, d, 1.0, g_a, fminus_a)
        if feas_at:
            continue
        lo = 0.0
        hi = 1.0
        for _ in range(max_halvings):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if _alpha_feasible(a, b, s_mat, v_vec, nu, d, mid, g_a, fminus_a):
                lo = mid
            else:
                hi = mid
        alphas[d] = hi
    for d in range(ndim):
        x = b[d] - alphas[d] * (b[d] - a[d])
        r = np.rint(x)
        if x > r and x - r <= snap_tol:
            x = r
        if x < a[d]:
            x = a[d]
        a2[d] = x

    g_a2 = 0.0
    for d in range(ndim):
        g_a2 += a2[d]
    fminus_a2 = 0.0
    for i in range(ndim):
        acc = 0.0
        for j in range(ndim):
            acc += s_mat[i, j] * a2[j]
        fminus_a2 += a2[i] * acc
    # conditions at beta = 0 (the point is a2 itself)
    if g_a2 - h_b > 0.0 or fplus_b - fminus_a2 < nu:
        return a2, b2, alphas, betas, True

    for d in range(ndim):
        delta = b[d] - a2[d]
        if delta <= 0.0:
            continue
        if _beta_feasible(a2, b, s_mat, v_vec, nu, d, 1.0, h_b, fplus_b):
            continue
        lo = 0.0
        hi = 1.0
        for _ in range(max_halvings):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if _beta_feasible(a2, b, s_mat, v_vec, nu, d, mid, h_b, fplus_b):
                lo = mid
            else:
                hi = mid
        betas[d] = hi
    for d in range(ndim):
        x = a2[d] + betas[d] * (b[d] - a2[d])
        r = np.rint(x)
        if x < r and r - x <= snap_tol:
            x = r
        if x > b[d]:
            x = b[d]
        b2[d] = x
    return a2, b2, alphas, betas, False


def _alpha_feasible(a, b, s_mat, v_vec, nu, d, alpha, g_a, fminus_a):
    """g(a) - h(q) <= 0 and f+(q) - f-(a) >= nu at q = b - alpha (b_d-a_d) e_d."""
    ndim = a.size
    qd = b[d] - alpha * (b[d] - a[d])
    h_q = qd * qd
    fplus_q = 2.0 * v_vec[d] * qd
    for j in range(ndim):
        if j != d:
            h_q += b[j] * b[j]
            fplus_q += 2.0 * v_vec[j] * b[j]
    return (g_a - h_q <= 0.0) and (fplus_q - fminus_a >= nu)


def _beta_feasible(a2, b, s_mat, v_vec, nu, d, beta, h_b, fplus_b):
    """g(q) - h(b) <= 0 and f+(b) - f-(q) >= nu at q = a2 + beta (b_d-a2_d) e_d."""
    ndim = a2.size
    qd = a2[d] + beta * (b[d] - a2[d])
    g_q = qd
    for j in range(ndim):
        if j != d:
            g_q += a2[j]
    fminus_q = 0.0
    for i in range(ndim):
        acc = 0.0
        for j in range(ndim):
            acc += s_mat[i, j] * (qd if j == d else a2[j])
        fminus_q += (qd if i == d else a2[i]) * acc
    return (g_q - h_b <= 0.0) and (fplus_b - fminus_q >= nu)


_alpha_feasible = _maybe_jit(_alpha_feasible)
_beta_feasible = _maybe_jit(_beta_feasible)
_reduce_arrays = _maybe_jit(_reduce_arrays)


def reduce_box(box, nu, inst, bisect_tol=DEFAULT_BISECT_TOL):
    """Shrink a box, keeping every binary point that is feasible with f >= nu."""
    a2, b2, alphas, betas, discard = _reduce_arrays(
        box.lo, box.hi, inst.s_mat, inst.v_vec, float(nu), float(bisect_tol),
        MAX_HALVINGS, SNAP_TOL)
    out_box = box if discard else Box(lo=a2, hi=b2)
    return ReductionOutcome(box=out_box, alphas=alphas, betas=betas, discard=discard)


def bound(box, inst):
    """Upper bound f+(hi) - f-(lo) on f over the feasible part of the box."""
    return inst.f_plus(box.hi) - inst.f_minus(box.lo)


def candidate(box):
    """Entrywise ceiling of the box midpoint; always a binary vector."""
    return np.ceil(0.5 * (box.lo + box.hi))


def branch(box):
    """Split along the longest edge at its midpoint into binary halves.

    j is the smallest index attaining the maximum edge; the children keep
    psi_j <= floor(c_j) and psi_j >= ceil(c_j). Children that intersect no
    part of the box are dropped silently, so the returned tuple has one or
    two boxes (or none when the box holds no binary point in coordinate j).
    """
    edges = box.hi - box.lo
    j = int(np.argmax(edges))
    if edges[j] <= 0.0:
        raise DegenerateBoxError("cannot branch a zero-volume box")
    c = 0.5 * (box.lo[j] + box.hi[j])
    children = []
    hi1 = box.hi.copy()
    hi1[j] = np.floor(c)
    if hi1[j] >= box.lo[j]:
        children.append(Box(lo=box.lo.copy(), hi=hi1))
    lo2 = box.lo.copy()
    lo2[j] = np.ceil(c)
    if lo2[j] <= box.hi[j]:
        children.append(Box(lo=lo2, hi=box.hi.copy()))
    return tuple(children)


@dataclass
class SolverState:
    """Incumbent and active-box bookkeeping of one solve."""

    active: list
    incumbent: np.ndarray
    nu: float
    iterations: int
    eps_acc: float


def solve_bqp(inst, eps_acc=DEFAULT_EPS_ACC, bisect_tol=DEFAULT_BISECT_TOL,
              max_iter=None, return_state=False):
    """Branch-reduce-and-bound minimizer of the binary quadratic objective.

    Starts from the unit box with incumbent value nu = f(0) = 0; each
    iteration reduces the freshly branched boxes, bounds them, promotes the
    best strictly improving rounded-midpoint candidate, drops boxes whose
    bound falls below nu, and stops when no boxes remain or
    nu >= eps_acc * (best remaining bound). The result is optimal within
    (1 - eps_acc) of the best bound; the all-zeros vector is returned when
    nothing improves on it.

    Point boxes are evaluated as candidates and never branched. Exceeding
    max_iter (default 10 * 2^dim) raises ResourceLimitError carrying the
    incumbent and its certificate gap.
    """
    if not 0.0 < eps_acc <= 1.0:
        raise ValueError("eps_acc must lie in (0, 1]")
    dmf = reformulate(inst)
    ndim = inst.dim
    if max_iter is None:
        max_iter = 10 * 2 ** ndim
    nu = 0.0
    incumbent = np.zeros(ndim)
    fresh = [unit_box(ndim)]
    heap = []  # lazy max-heap: (-mu, insertion counter, Box)
    counter = 0
    iterations = 0

    def finish(psi):
        if return_state:
            active = [entry[2] for entry in heap if -entry[0] >= nu]
            return psi, SolverState(active=active, incumbent=psi.copy(), nu=nu,
                                    iterations=iterations, eps_acc=eps_acc)
        return psi

    while True:
        iterations += 1
        if iterations > max_iter:
            gap = (-heap[0][0] - nu) if heap else 0.0
            raise ResourceLimitError(
                f"no epsilon-certificate within {max_iter} iterations",
                incumbent=incumbent, gap=gap)
        best_f = nu
        best_cand = None
        for box in fresh:
            outcome = reduce_box(box, nu, dmf, bisect_tol)
            if outcome.discard:
                continue
            reduced = outcome.box
            cand = candidate(reduced)
            f_cand = dmf.f(cand)
            if f_cand > best_f:
                best_f = f_cand
                best_cand = cand
            if reduced.is_point():
                continue  # candidate evaluated; nothing left to explore
            heapq.heappush(heap, (-bound(reduced, dmf), counter, reduced))
            counter += 1
        if best_cand is not None:
            nu = best_f
            incumbent = best_cand
        while heap and -heap[0][0] < nu:
            heapq.heappop(heap)  # lazy discard of dominated boxes
        if not heap:
            return finish(incumbent)
        mu_star = -heap[0][0]
        if nu >= eps_acc * mu_star:
            return finish(incumbent)
        _, _, chosen = heapq.heappop(heap)
        fresh = list(branch(chosen))


def brute_force_bqp(inst, chunk=1 << 11):
    """Enumerate all 2^dim binary vectors and return the objective minimizer.

    Ties break to the lexicographically smallest vector (enumeration order
    with psi[0] as the most significant bit). Guarded to dim <= 24.
    """
    ndim = inst.dim
    if ndim > BRUTE_DIM_LIMIT:
        raise ResourceLimitError(f"enumeration limited to dim <= {BRUTE_DIM_LIMIT}")
    shifts = np.arange(ndim - 1, -1, -1)
    best_val = np.inf
    best_idx = 0
    for start in range(0, 2 ** ndim, chunk):
        idx = np.arange(start, min(start + chunk, 2 ** ndim))
        block = ((idx[:, None] >> shifts) & 1).astype(float)
        vals = np.einsum("ij,jk,ik->i", block, inst.s_mat, block) \
            - 2.0 * (block @ inst.v_vec)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_idx = int(idx[k])
    return ((best_idx >> shifts) & 1).astype(float)


def sample_bqp_instance(dim, rng):
    """Random instance in the solver's validity domain.

    S = A^T A from standard-normal A folded entrywise to |A| (keeping S PSD
    and entrywise nonnegative, as the monotone reformulation requires),
    v entrywise |standard normal|, rho = 0.
    """
    a = np.abs(rng.standard_normal((dim, dim)))
    v = np.abs(rng.standard_normal(dim))
    return BqpInstance(s_mat=a.T @ a, v_vec=v, rho=0.0)


def read_instance(path):
    """Parse the plain-text instance format.

    Line 1: D; lines 2..D+1: rows of S (space-separated); line D+2: v;
    line D+3: rho.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError("empty instance file")
    ndim = int(lines[0])
    if len(lines) < ndim + 3:
        raise ValueError(f"instance file needs {ndim + 3} nonempty lines, got {len(lines)}")
    s = np.array([[float(x) for x in lines[1 + i].split()] for i in range(ndim)])
    v = np.array([float(x) for x in lines[ndim + 1].split()])
    rho = float(lines[ndim + 2])
    return BqpInstance(s_mat=s, v_vec=v, rho=rho)


def write_instance(inst, path):
    with open(path, "w") as fh:
        fh.write(f"{inst.dim}\n")
        for row in inst.s_mat:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
        fh.write(" ".join(repr(float(x)) for x in inst.v_vec) + "\n")
        fh.write(repr(float(inst.rho)) + "\n")
