"""Soft-margin kernel SVM trained by sequential minimal optimization.

The solver follows the maximal-violating-pair scheme with second-order
selection of the second index (Fan, Chen & Lin 2005) and LIBSVM-style
shrinking, on the dual

    min  0.5 a'Qa - e'a    s.t.  0 <= a_i <= C,  y'a = 0,

with ``Q_ij = y_i y_j K(x_i, x_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..errors import ConvergenceError, ParameterError, TrainingError

KERNELS = ("rbf", "linear")
TOL = 1e-3
MAX_ITER = 1_000_000
_TAU = 1e-12


def kernel_matrix(A, B, kernel, gamma):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    # broadcast rather than BLAS: each entry then depends only on its own pair
    # of rows, so a query scores identically alone or inside any batch
    if kernel == "linear":
        return (A[:, None, :] * B[None, :, :]).sum(axis=2)
    if kernel == "rbf":
        d2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-gamma * d2)
    raise ParameterError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


@numba.njit(cache=True)
def _in_up(y, a, C):
    return (y > 0 and a < C) or (y < 0 and a > 0)


@numba.njit(cache=True)
def _in_low(y, a, C):
    return (y > 0 and a > 0) or (y < 0 and a < C)


@numba.njit(cache=True)
def _reconstruct(Q, alpha, G, active, n_active, n):
    """Recompute the gradient of every shrunk variable from scratch."""
    is_act = np.zeros(n, dtype=np.bool_)
    for k in range(n_active):
        is_act[active[k]] = True
    for t in range(n):
        if not is_act[t]:
            g = -1.0
            for s in range(n):
                if alpha[s] > 0:
                    g += Q[t, s] * alpha[s]
            G[t] = g
    for t in range(n):
        active[t] = t


@numba.njit(cache=True)
def _smo(Q, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    active = np.arange(n)
    n_active = n
    unshrunk = False
    counter = min(n, 1000) + 1
    it = 0
    gap = np.inf
    while it < max_iter:
        counter -= 1
        if counter == 0:
            counter = min(n, 1000)
            # shrink: drop bounded variables that cannot re-enter the working set
            g1 = -np.inf
            g2 = -np.inf
            for k in range(n_active):
                t = active[k]
                if _in_up(y[t], alpha[t], C):
                    g1 = max(g1, -y[t] * G[t])
                if _in_low(y[t], alpha[t], C):
                    g2 = max(g2, y[t] * G[t])
            if not unshrunk and g1 + g2 <= tol * 10:
                unshrunk = True
                _reconstruct(Q, alpha, G, active, n_active, n)
                n_active = n
            k = 0
            while k < n_active:
                t = active[k]
                drop = False
                if alpha[t] >= C:
                    drop = -G[t] > g1 if y[t] > 0 else -G[t] > g2
                elif alpha[t] <= 0:
                    drop = G[t] > g2 if y[t] > 0 else G[t] > g1
                if drop:
                    n_active -= 1
                    active[k] = active[n_active]
                    active[n_active] = t
                else:
                    k += 1

        # i: maximal violator in I_up; gmin over I_low gives the KKT gap
        gmax = -np.inf
        gmin = np.inf
        i = -1
        for k in range(n_active):
            t = active[k]
            yg = -y[t] * G[t]
            at = alpha[t]
            if y[t] > 0:
                if at < C and yg > gmax:
                    gmax = yg
                    i = t
                if at > 0 and yg < gmin:
                    gmin = yg
            else:
                if at > 0 and yg > gmax:
                    gmax = yg
                    i = t
                if at < C and yg < gmin:
                    gmin = yg
        gap = gmax - gmin
        if i < 0 or gap < tol:
            if n_active < n:
                # re-check optimality on the full set before shrinking again
                _reconstruct(Q, alpha, G, active, n_active, n)
                n_active = n
                counter = min(n, 1000) + 1
                continue
            return alpha, G, it, gap, True

        # j: second-order selection over I_low
        j = -1
        best = np.inf
        Qi = Q[i]
        Qii = Qi[i]
        yi = y[i]
        for k in range(n_active):
            t = active[k]
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                b = gmax + y[t] * G[t]
                if b > 0:
                    a = Qii + Q[t, t] - 2.0 * yi * y[t] * Qi[t]
                    if a <= 0:
                        a = _TAU
                    obj = -(b * b) / a
                    if obj < best:
                        best = obj
                        j = t
        if j < 0:
            if n_active < n:
                # re-check optimality on the full set before shrinking again
                _reconstruct(Q, alpha, G, active, n_active, n)
                n_active = n
                counter = min(n, 1000) + 1
                continue
            return alpha, G, it, gap, True

        Qj = Q[j]
        Qjj = Qj[j]
        Qij = Qi[j]
        old_i = alpha[i]
        old_j = alpha[j]
        if yi != y[j]:
            quad = Qii + Qjj + 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = Qii + Qjj - 2.0 * Qij
            if quad <= 0:
                quad = _TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total

        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        for k in range(n_active):
            t = active[k]
            G[t] += Qi[t] * di + Qj[t] * dj
        it += 1
    _reconstruct(Q, alpha, G, active, n_active, n)
    return alpha, G, it, gap, False


def _bias(alpha, G, y, C):
    yg = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = yg[free].mean()
    else:
        up = ((y > 0) & (alpha >= C)) | ((y < 0) & (alpha <= 0))
        low = ((y > 0) & (alpha <= 0)) | ((y < 0) & (alpha >= C))
        ub = yg[low].min() if low.any() else np.inf
        lb = yg[up].max() if up.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub + lb) else 0.0
    return -rho


@dataclass(frozen=True, eq=False)
class SvmModel:
    kernel: str
    gamma: float
    C: float
    support_vectors: np.ndarray
    dual_coefficients: np.ndarray
    bias: float
    iterations: int = 0

    def decision(self, X):
        K = kernel_matrix(X, self.support_vectors, self.kernel, self.gamma)
        return (K * self.dual_coefficients).sum(axis=1) + self.bias

    def predict(self, X):
        """Labels (1 crackle, 0 normal) and confidence in the predicted label."""
        d = self.decision(X)
        return (d > 0).astype(np.int64), 1.0 / (1.0 + np.exp(-np.abs(d)))


def _pm1(y):
    y = np.asarray(y)
    return np.where(y > 0, 1.0, -1.0)


def train_svm(X, y, C: float = 1.0, kernel: str = "rbf", gamma: float = 0.2,
              tol: float = TOL, max_iter: int = MAX_ITER) -> SvmModel:
    """Fit an SVM on scaled features ``X`` with labels ``y`` (1 crackle, 0 normal)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    ys = _pm1(y)
    if X.shape[0] != ys.shape[0]:
        raise ParameterError("X and y lengths differ")
    if C <= 0 or (kernel == "rbf" and gamma <= 0):
        raise ParameterError(f"C and gamma must be positive, got C={C}, gamma={gamma}")
    if X.shape[0] < 2 or np.all(ys == ys[0]):
        raise TrainingError("SVM training needs samples from both classes")
    Q = kernel_matrix(X, X, kernel, gamma) * np.outer(ys, ys)
    alpha, G, it, gap, ok = _smo(Q, ys, float(C), float(tol), int(max_iter))
    if not ok:
        raise ConvergenceError(it, gap)
    sv = alpha > 0
    return SvmModel(
        kernel=kernel,
        gamma=float(gamma),
        C=float(C),
        support_vectors=X[sv].copy(),
        dual_coefficients=(alpha * ys)[sv],
        bias=float(_bias(alpha, G, ys, C)),
        iterations=int(it),
    )


def svm_decision(model: SvmModel, x) -> float:
    x = x.as_array() if hasattr(x, "as_array") else x
    return float(model.decision(np.asarray(x, dtype=np.float64)[None, :])[0])
