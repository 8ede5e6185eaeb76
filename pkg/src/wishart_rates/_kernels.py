"""Numba kernels for the two inner loops that are too slow in numpy.

Both operate on tiny matrices (d <= 10), so they are written with explicit
loops and preallocated scratch buffers.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _riccati_rhs(p, M, QQ, B, out, tmp):
    # out = p M + M^T p - 2 p QQ p + B
    d = p.shape[0]
    for i in range(d):
        for j in range(d):
            s = 0.0
            for k in range(d):
                s += QQ[i, k] * p[k, j]
            tmp[i, j] = s
    for i in range(d):
        for j in range(d):
            s = B[i, j]
            for k in range(d):
                s += p[i, k] * M[k, j] + M[k, i] * p[k, j] - 2.0 * p[i, k] * tmp[k, j]
            out[i, j] = s


@njit(cache=True)
def rk4_riccati(grid, M, QQ, B, drift, a):
    """Classical RK4 for psi' = R(psi), phi' = Tr[drift psi] + a from zero.

    Returns ``(psi, phi, bad)`` where ``bad`` is the index of the first
    non-finite state, or -1.
    """
    n = grid.shape[0]
    d = M.shape[0]
    psi = np.zeros((n, d, d))
    phi = np.zeros(n)
    p = np.zeros((d, d))
    k1 = np.empty((d, d))
    k2 = np.empty((d, d))
    k3 = np.empty((d, d))
    k4 = np.empty((d, d))
    stage = np.empty((d, d))
    tmp = np.empty((d, d))
    for it in range(n - 1):
        h = grid[it + 1] - grid[it]
        _riccati_rhs(p, M, QQ, B, k1, tmp)
        for i in range(d):
            for j in range(d):
                stage[i, j] = p[i, j] + 0.5 * h * k1[i, j]
        _riccati_rhs(stage, M, QQ, B, k2, tmp)
        for i in range(d):
            for j in range(d):
                stage[i, j] = p[i, j] + 0.5 * h * k2[i, j]
        _riccati_rhs(stage, M, QQ, B, k3, tmp)
        for i in range(d):
            for j in range(d):
                stage[i, j] = p[i, j] + h * k3[i, j]
        _riccati_rhs(stage, M, QQ, B, k4, tmp)
        # phi is linear in psi, so its RK4 increment only needs the stage sum
        tr = 0.0
        finite = True
        for i in range(d):
            for j in range(d):
                tr += drift[j, i] * (6.0 * p[i, j] + h * (k1[i, j] + k2[i, j] + k3[i, j]))
                p[i, j] += h / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
                if not np.isfinite(p[i, j]):
                    finite = False
        for i in range(d):
            for j in range(i + 1, d):
                m = 0.5 * (p[i, j] + p[j, i])
                p[i, j] = m
                p[j, i] = m
        phi[it + 1] = phi[it] + h / 6.0 * tr + a * h
        psi[it + 1] = p
        if not finite or not np.isfinite(phi[it + 1]):
            return psi, phi, it + 1
    return psi, phi, -1


@njit(cache=True)
def _jacobi_eigh(A, w, V):
    # cyclic Jacobi on a copy of symmetric A; eigenvalues in w, vectors in columns of V
    d = A.shape[0]
    for i in range(d):
        for j in range(d):
            V[i, j] = 1.0 if i == j else 0.0
    for sweep in range(50):
        off = 0.0
        scale = 0.0
        for i in range(d):
            scale += A[i, i] * A[i, i]
            for j in range(i + 1, d):
                off += A[i, j] * A[i, j]
        if off <= 1e-30 * (scale + 1e-300):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(d):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(d):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(d):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    for i in range(d):
        w[i] = A[i, i]


@njit(cache=True)
def euler_wishart_step(X, S, dW, sign, drift, M, Q, B, dt, X_out, S_out, min_eig, rate_int):
    """One projected Euler step for a block of paths, in place.

    ``X``/``S`` hold the states and their PSD square roots; the noise
    increment used is ``sign * dW``. Updates the trapezoidal rate integral
    and records the smallest pre-projection eigenvalue per path.
    """
    n = X.shape[0]
    d = X.shape[1]
    Y = np.empty((d, d))
    T = np.empty((d, d))
    V = np.empty((d, d))
    w = np.empty(d)
    for m in range(n):
        tr_old = 0.0
        for i in range(d):
            for j in range(d):
                tr_old += B[i, j] * X[m, j, i]
        # T = S dW
        for i in range(d):
            for j in range(d):
                s = 0.0
                for k in range(d):
                    s += S[m, i, k] * dW[m, k, j]
                T[i, j] = sign * s
        for i in range(d):
            for j in range(d):
                s = drift[i, j]
                for k in range(d):
                    s += M[i, k] * X[m, k, j] + X[m, i, k] * M[j, k]
                noise = 0.0
                for k in range(d):
                    noise += T[i, k] * Q[k, j] + Q[k, i] * T[j, k]
                Y[i, j] = X[m, i, j] + s * dt + noise
        for i in range(d):
            for j in range(i + 1, d):
                avg = 0.5 * (Y[i, j] + Y[j, i])
                Y[i, j] = avg
                Y[j, i] = avg
        _jacobi_eigh(Y, w, V)
        lo = w[0]
        for i in range(1, d):
            if w[i] < lo:
                lo = w[i]
        min_eig[m] = lo
        tr_new = 0.0
        for i in range(d):
            for j in range(d):
                x = 0.0
                r = 0.0
                for k in range(d):
                    lam = w[k] if w[k] > 0.0 else 0.0
                    x += V[i, k] * lam * V[j, k]
                    r += V[i, k] * np.sqrt(lam) * V[j, k]
                X_out[m, i, j] = x
                S_out[m, i, j] = r
        for i in range(d):
            for j in range(d):
                tr_new += B[i, j] * X_out[m, j, i]
        rate_int[m] += 0.5 * dt * (tr_old + tr_new)
