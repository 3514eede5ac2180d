import numpy as np
from numba import njit


class ScriptedRng:
    """Duck-typed generator that plays back a fixed script of values.

    standard_normal(n) pops n values (defaulting to 0.0 when the script is
    exhausted), which lets tests force noiseless or equal-noise soundings.
    """

    def __init__(self, normals=(), uniforms=()):
        self._normals = list(normals)
        self._uniforms = list(uniforms)

    def standard_normal(self, n):
        out = []
        for _ in range(int(n)):
            out.append(self._normals.pop(0) if self._normals else 0.0)
        return np.array(out)

    def uniform(self, low=0.0, high=1.0, size=None):
        value = self._uniforms.pop(0) if self._uniforms else low
        if size is None:
            return value
        return np.full(size, value)


@njit(cache=True)
def _grid_min_triangle(q00, q01, q11, b0, b1, const, n):
    best = np.inf
    for i in range(n + 1):
        x = i / n
        vx = q00 * x * x + b0 * x + const
        for j in range(n + 1 - i):
            y = j / n
            val = vx + (2.0 * q01 * x + b1) * y + q11 * y * y
            if val < best:
                best = val
    return best


def grid_search_simplex(inst, step=1e-4):
    """Dense-grid minimum of the quadratic over the simplex (dim 2 or 3).

    For dim 3 every lattice point theta = (x, y, 1-x-y) with spacing `step`
    and x + y <= 1 is evaluated through the objective's polynomial in
    (x, y); this stays a literal grid evaluation, independent of the
    Frank-Wolfe path it checks.
    """
    n = int(round(1.0 / step))
    t = np.arange(n + 1) / n
    if inst.dim == 2:
        thetas = np.stack([t, 1.0 - t], axis=1)
        vals = np.einsum("ij,jk,ik->i", thetas, inst.s_mat, thetas) \
            - 2.0 * thetas @ inst.v_vec
        return float(vals.min()) + inst.rho
    assert inst.dim == 3
    s, v = inst.s_mat, inst.v_vec
    # theta = c + M u with u = (x, y), c = (0,0,1): quadratic in u
    m = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    c = np.array([0.0, 0.0, 1.0])
    q = m.T @ s @ m
    b = 2.0 * (m.T @ s @ c - m.T @ v)
    const = float(c @ s @ c - 2.0 * v @ c)
    return float(_grid_min_triangle(q[0, 0], q[0, 1], q[1, 1],
                                    b[0], b[1], const, n)) + inst.rho
