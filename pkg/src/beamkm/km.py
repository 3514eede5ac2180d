"""Inner-product probability model and its block-coordinate training loop.

Each transmit index t carries a simplex vector theta_t and each receive
index r a binary indicator psi_r, modelling the pair's "good SNR"
probability as theta_t^T psi_r. Training alternates exact half-sweeps:
Frank-Wolfe for the simplex-constrained quadratics in theta, and the
branch-reduce-and-bound solver (or the enumeration oracle) for the binary
quadratics in psi.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from . import dmo

SIMPLEX_TOL = 1e-9
FW_MAX_ITER = 5000
FW_GAP_TOL = 1e-8
BCD_STOP_TOL = 1e-8
DEFAULT_SWEEPS = 10


def simplex_vector(entries, tol=SIMPLEX_TOL):
    """Validate and return a probability vector on the unit simplex."""
    vec = np.asarray(entries, dtype=float)
    if vec.ndim != 1 or vec.size < 1:
        raise ValueError("simplex vector must be a nonempty 1-d array")
    if np.any(vec < 0.0):
        raise ValueError("simplex vector entries must be nonnegative")
    if abs(vec.sum() - 1.0) > tol:
        raise ValueError("simplex vector entries must sum to 1")
    return vec


def binary_indicator(entries):
    """Validate and return a vector with entries exactly 0 or 1."""
    vec = np.asarray(entries, dtype=float)
    if vec.ndim != 1 or vec.size < 1:
        raise ValueError("binary indicator must be a nonempty 1-d array")
    if np.any((vec != 0.0) & (vec != 1.0)):
        raise ValueError("binary indicator entries must be exactly 0 or 1")
    return vec


def ker_probability(theta, psi):
    """Pair probability theta^T psi; in [0,1] for simplex theta, binary psi."""
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if theta.shape != psi.shape:
        raise ValueError(f"dimension mismatch: {theta.shape} vs {psi.shape}")
    return float(theta @ psi)


@dataclass(frozen=True)
class LcqpInstance:
    """Quadratic data for one theta subproblem: min theta^T S theta - 2 theta^T v + rho."""

    s_mat: np.ndarray
    v_vec: np.ndarray
    rho: float

    def __post_init__(self):
        s = np.asarray(self.s_mat, dtype=float)
        v = np.asarray(self.v_vec, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or v.shape != (s.shape[0],):
            raise ValueError("s_mat must be square and v_vec matching 1-d")
        if np.max(np.abs(s - s.T), initial=0.0) > SIMPLEX_TOL:
            raise ValueError("s_mat must be symmetric")
        if np.min(np.linalg.eigvalsh(s)) < -SIMPLEX_TOL:
            raise ValueError("s_mat must be positive semidefinite")
        if np.any(v < 0.0):
            raise ValueError("v_vec must be entrywise nonnegative")
        object.__setattr__(self, "s_mat", s)
        object.__setattr__(self, "v_vec", v)

    @property
    def dim(self):
        return self.v_vec.size

    def objective(self, theta):
        theta = np.asarray(theta, dtype=float)
        return float(theta @ self.s_mat @ theta - 2.0 * theta @ self.v_vec + self.rho)


def assemble_lcqp(psis, p_row):
    """Sum the per-receive-index terms: S = sum psi psi^T, v = sum psi p, rho = sum p^2."""
    psis = [binary_indicator(p) for p in psis]
    p_row = np.asarray(p_row, dtype=float)
    if len(psis) != p_row.size:
        raise ValueError("psis and p_row must have matching lengths")
    dim = psis[0].size
    mat = np.zeros((dim, dim))
    vec = np.zeros(dim)
    for psi, p in zip(psis, p_row):
        mat += np.outer(psi, psi)
        vec += psi * p
    return LcqpInstance(s_mat=mat, v_vec=vec, rho=float(p_row @ p_row))


def assemble_bqp(thetas, p_col):
    """Binary subproblem data: S = sum theta theta^T, v = sum theta p, rho = sum p^2."""
    thetas = [simplex_vector(t) for t in thetas]
    p_col = np.asarray(p_col, dtype=float)
    if len(thetas) != p_col.size:
        raise ValueError("thetas and p_col must have matching lengths")
    dim = thetas[0].size
    mat = np.zeros((dim, dim))
    vec = np.zeros(dim)
    for theta, p in zip(thetas, p_col):
        mat += np.outer(theta, theta)
        vec += theta * p
    return dmo.BqpInstance(s_mat=mat, v_vec=vec, rho=float(p_col @ p_col))


def solve_lcqp_frank_wolfe(inst, init, max_iter=FW_MAX_ITER, gap_tol=FW_GAP_TOL,
                           history=None):
    """Projection-free minimization of the quadratic over the simplex.

    Frank-Wolfe with pairwise (vertex-exchange) steps: each iteration moves
    weight from the worst in-support vertex to the vertex with the smallest
    gradient coordinate (smallest index on ties), using the exact
    line-search step, so the objective never increases and convergence
    stays linear when the optimum sits on a face. Stops when the
    Frank-Wolfe duality gap g = grad . theta - min_j grad_j falls to
    gap_tol, which certifies the same suboptimality bound as the classic
    schedule. Pass a list as `history` to record the objective (without the
    constant rho) at the start and after every accepted step.
    """
    theta = simplex_vector(init)
    if theta.size != inst.dim:
        raise ValueError("init dimension does not match instance")
    s_mat = inst.s_mat
    v_vec = inst.v_vec
    obj = float(theta @ s_mat @ theta - 2.0 * theta @ v_vec)
    if history is not None:
        history.append(obj)
    for _ in range(max_iter):
        grad = 2.0 * (s_mat @ theta - v_vec)
        j = int(np.argmin(grad))
        gap = float(grad @ theta - grad[j])
        if gap <= gap_tol:
            break
        support = np.flatnonzero(theta > 0.0)
        i = int(support[np.argmax(grad[support])])
        if i == j:
            break
        slope = float(grad[j] - grad[i])  # < 0 along the exchange direction
        if slope >= 0.0:
            break
        curvature = float(s_mat[j, j] - 2.0 * s_mat[i, j] + s_mat[i, i])
        gamma_max = float(theta[i])
        if curvature > 0.0:
            gamma = min(gamma_max, -slope / (2.0 * curvature))
        else:
            gamma = gamma_max
        step = theta.copy()
        if gamma == gamma_max:
            step[i] = 0.0  # drop step, kept exact
        else:
            step[i] -= gamma
        step[j] += gamma
        new_obj = float(step @ s_mat @ step - 2.0 * step @ v_vec)
        if new_obj > obj:
            break  # numerical floor reached; keep the monotone sequence
        theta = step
        obj = new_obj
        if history is not None:
            history.append(obj)
    return theta


@dataclass(frozen=True)
class KmModel:
    """Learned parameters: one simplex vector per training transmit index,
    one binary indicator per training receive index."""

    thetas: dict
    psis: dict
    dim: int

    def __post_init__(self):
        for t, theta in self.thetas.items():
            if simplex_vector(theta).size != self.dim:
                raise ValueError(f"theta[{t}] has wrong dimension")
        for r, psi in self.psis.items():
            if binary_indicator(psi).size != self.dim:
                raise ValueError(f"psi[{r}] has wrong dimension")

    def to_csv(self, path):
        """Write rows kind,index,d,value with kind in {theta, psi}."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["kind", "index", "d", "value"])
            for t in sorted(self.thetas):
                for d, x in enumerate(self.thetas[t]):
                    writer.writerow(["theta", t, d, float(x)])
            for r in sorted(self.psis):
                for d, x in enumerate(self.psis[r]):
                    writer.writerow(["psi", r, d, float(x)])

    @classmethod
    def from_csv(cls, path):
        raw = {"theta": {}, "psi": {}}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                raw[row["kind"]].setdefault(int(row["index"]), {})[int(row["d"])] = \
                    float(row["value"])
        build = lambda per_idx: {
            i: np.array([vals[d] for d in sorted(vals)]) for i, vals in per_idx.items()}
        thetas = build(raw["theta"])
        dim = len(next(iter(thetas.values())))
        return cls(thetas=thetas, psis=build(raw["psi"]), dim=dim)


def km_objective(thetas, psis, table):
    """Total squared residual sum_{t,r} (theta_t^T psi_r - p_{t,r})^2."""
    total = 0.0
    for (t, r), p in table.probs.items():
        total += (float(thetas[t] @ psis[r]) - p) ** 2
    return total


def bcd_learn(table, dim, sweeps=DEFAULT_SWEEPS, rng=None, solver="dmo",
              eps_acc=dmo.DEFAULT_EPS_ACC, history=None, timings=None):
    """Alternating exact minimization of the squared-residual objective.

    Every psi_r starts i.i.d. Bernoulli(0.5) from rng and every theta_t
    uniform; each sweep updates all thetas by Frank-Wolfe (warm-started from
    the previous sweep) and then all psis by the binary solver ('dmo' or the
    'brute' enumeration oracle). Stops early when a full sweep improves the
    objective by less than 1e-8. The objective is non-increasing across
    half-sweeps up to the solver's (1 - eps_acc) slack.

    Pass a list as `history` to record the objective at start and after each
    half-sweep, and a dict as `timings` to accumulate `bqp_ms`.
    """
    if not table.probs:
        raise ValueError("training table must be nonempty")
    if dim < 1 or sweeps < 1:
        raise ValueError("dim and sweeps must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    if solver not in ("dmo", "brute"):
        raise ValueError("solver must be 'dmo' or 'brute'")
    tx = list(table.train_tx)
    rx = list(table.train_rx)
    thetas = {t: np.full(dim, 1.0 / dim) for t in tx}
    psis = {r: (rng.random(dim) < 0.5).astype(float) for r in rx}
    if history is not None:
        history.append(km_objective(thetas, psis, table))
    prev_obj = km_objective(thetas, psis, table)
    for _ in range(sweeps):
        psi_list = [psis[r] for r in rx]
        for t in tx:
            inst = assemble_lcqp(psi_list, [table.probs[(t, r)] for r in rx])
            thetas[t] = solve_lcqp_frank_wolfe(inst, thetas[t])
        if history is not None:
            history.append(km_objective(thetas, psis, table))
        theta_list = [thetas[t] for t in tx]
        for r in rx:
            inst = assemble_bqp(theta_list, [table.probs[(t, r)] for t in tx])
            t0 = time.perf_counter()
            if solver == "dmo":
                psis[r] = dmo.solve_bqp(inst, eps_acc=eps_acc)
            else:
                psis[r] = dmo.brute_force_bqp(inst)
            if timings is not None:
                timings["bqp_ms"] = timings.get("bqp_ms", 0.0) \
                    + 1e3 * (time.perf_counter() - t0)
        obj = km_objective(thetas, psis, table)
        if history is not None:
            history.append(obj)
        if prev_obj - obj < BCD_STOP_TOL:
            break
        prev_obj = obj
    return KmModel(thetas=thetas, psis=psis, dim=dim)


def _nearest(index, trained):
    """Trained index closest to `index`; smaller index on distance ties."""
    return min(trained, key=lambda s: (abs(s - index), s))


def predict(model, full_tx, full_rx):
    """Model probabilities over the full pair grid.

    Pairs inside the training product use their own parameters; an untrained
    index maps to its nearest trained index (absolute index distance,
    smaller index on ties). Outputs are clipped to [0, 1].
    """
    trained_tx = sorted(model.thetas)
    trained_rx = sorted(model.psis)
    out = {}
    for t in full_tx:
        theta = model.thetas[t if t in model.thetas else _nearest(t, trained_tx)]
        for r in full_rx:
            psi = model.psis[r if r in model.psis else _nearest(r, trained_rx)]
            out[(t, r)] = min(1.0, max(0.0, float(theta @ psi)))
    return out


def select_beam_pair(table):
    """Argmax of the probability table; ties break to the smallest (t, r)."""
    if not table:
        raise ValueError("probability table must be nonempty")
    best_key = None
    best_p = -np.inf
    for key in sorted(table):
        if table[key] > best_p:
            best_p = table[key]
            best_key = key
    return best_key
