"""Pure numpy versions of the hot kernels; used when the compiled module is absent."""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1

MAX_INNER = 200


def cmi_batch(Q: np.ndarray) -> np.ndarray:
    """``I(T:X|Y)`` in bits for a stack ``Q[n, t, x, y]``."""
    Q = np.ascontiguousarray(Q, dtype=float)
    pxy = Q.sum(axis=1)
    pty = Q.sum(axis=2)
    py = pty.sum(axis=1)
    num = Q * py[:, None, None, :]
    den = pty[:, :, None, :] * pxy[:, None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Q > 0, Q * np.log2(num / np.where(den > 0, den, 1.0)), 0.0)
    return np.maximum(terms.reshape(len(Q), -1).sum(axis=1), 0.0)


def _barrier_value(q, Qc, mu):
    # q * log(q / Q_cell) summed; Q_cell >= q > 0 on the active set
    return float(np.sum(q * np.log(q)) - np.sum(Qc[Qc > 0] * np.log(Qc[Qc > 0])) - mu * np.sum(np.log(q)))


def barrier_newton(q0, B, cell, ncell, g, mu0, mu_min, mu_factor, tol, max_iter, armijo):
    """Minimize ``-H(T|X,Y)`` plus a log barrier over the active atoms.

    Parameters
    ----------
    q0 : (n,) array
        Anchor values of the active atoms.
    B : (n, d) array
        Basis moves restricted to the active atoms.
    cell : (n,) int array
        Cell index ``x * |Y| + y`` of each active atom.
    g : (d,) array
        Strictly feasible start.
    mu0, mu_min, mu_factor : float
        Barrier schedule; ``mu`` is multiplied by ``mu_factor`` until it drops
        below ``mu_min``.
    tol : float
        Stage ends when half the squared Newton decrement is below ``tol``.

    Returns
    -------
    g : (d,) array
    iterations : int
    status : int
        ``0`` when the schedule completed, ``1`` when ``max_iter`` was hit.
    history : (k, 2) array
        ``(mu, F)`` after every accepted step.
    """
    q0 = np.asarray(q0, dtype=float)
    B = np.asarray(B, dtype=float)
    cell = np.asarray(cell, dtype=np.int64)
    g = np.array(g, dtype=float)
    d = B.shape[1]
    C = np.zeros((ncell, len(q0)))
    C[cell, np.arange(len(q0))] = 1.0
    Bc = C @ B
    hist = []
    it = 0
    mu = mu0
    while True:
        for _ in range(MAX_INNER):
            q = q0 + B @ g
            Qc = C @ q
            F = _barrier_value(q, Qc, mu)
            gq = np.log(q / Qc[cell]) - mu / q
            grad = B.T @ gq
            w = 1.0 / q + mu / (q * q)
            inv_c = np.where(Qc > 0, 1.0 / np.where(Qc > 0, Qc, 1.0), 0.0)
            H = (B.T * w) @ B - (Bc.T * inv_c) @ Bc
            dg = _newton_direction(H, grad, d)
            slope = float(grad @ dg)
            if -slope / 2 <= tol:
                break
            dq = B @ dg
            neg = dq < 0
            smax = np.min(-q[neg] / dq[neg]) if neg.any() else np.inf
            s = min(1.0, 0.99 * smax)
            accepted = False
            while s > 1e-16:
                gn = g + s * dg
                qn = q0 + B @ gn
                if np.all(qn > 0):
                    Fn = _barrier_value(qn, C @ qn, mu)
                    if Fn <= F + armijo * s * slope:
                        accepted = True
                        break
                s *= 0.5
            if not accepted:
                break
            g = gn
            it += 1
            hist.append((mu, Fn))
            if it >= max_iter:
                return g, it, STATUS_MAX_ITER, np.array(hist).reshape(-1, 2)
        if mu <= mu_min:
            break
        mu = max(mu * mu_factor, mu_min)
    return g, it, STATUS_CONVERGED, np.array(hist).reshape(-1, 2)


def _newton_direction(H, grad, d):
    diag = np.sqrt(np.maximum(np.diag(H), 1e-300))
    Hs = H / diag[:, None] / diag[None, :]
    rhs = -grad / diag
    ridge = 0.0
    for _ in range(8):
        try:
            y = cho_solve(cho_factor(Hs + ridge * np.eye(d)), rhs)
            return y / diag
        except LinAlgError:
            ridge = 1e-12 if ridge == 0.0 else ridge * 100
    return rhs / diag
