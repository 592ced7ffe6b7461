"""Independent oracles shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np


def brute_force_qp(Q, W, b, tol=1e-9):
    """Solve ``min 1/2 y'Qy, Wy = b, y >= 0`` by trying every active set.

    For each candidate set ``A`` the square system::

        Qy + W'pi - s = 0,  Wy = b,  y_A = 0,  s_(not A) = 0

    is solved directly; the first sign-feasible solution is returned as
    ``(y, pi, s)``.  Exponential in ``m``, meant for ``m <= 8``.
    """
    Q = np.diag(Q) if np.ndim(Q) == 1 else np.asarray(Q, dtype=float)
    W = np.asarray(W, dtype=float).reshape(-1, Q.shape[0])
    b = np.asarray(b, dtype=float).reshape(-1)
    m, p = Q.shape[0], W.shape[0]
    size = 2 * m + p
    I = np.eye(m)
    for k in range(m + 1):
        for active in itertools.combinations(range(m), k):
            M = np.zeros((size, size))
            rhs = np.zeros(size)
            M[:m, :m] = Q
            M[:m, m:m + p] = W.T
            M[:m, m + p:] = -I
            M[m:m + p, :m] = W
            rhs[m:m + p] = b
            row = m + p
            for i in range(m):
                if i in active:
                    M[row, i] = 1.0
                else:
                    M[row, m + p + i] = 1.0
                row += 1
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            z = np.linalg.solve(M, rhs)
            y, pi, s = z[:m], z[m:m + p], z[m + p:]
            if y.min() >= -tol and s.min() >= -tol:
                return y, pi, s
    raise ValueError("no feasible active set")


def random_qp(rng, m, p, diagonal=True):
    """Strictly convex instance with a known strictly positive feasible point."""
    if diagonal:
        Q = rng.uniform(0.2, 3.0, m)
    else:
        B = rng.standard_normal((m, m))
        Q = B @ B.T + 0.5 * np.eye(m)
    W = rng.standard_normal((p, m))
    y0 = rng.uniform(0.0, 2.0, m) * (rng.random(m) < 0.7)
    return Q, W, W @ y0, y0


def central_diff(f, x, d, h):
    return (f(x + h * d) - f(x - h * d)) / (2.0 * h)


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# residual-map lemma checks; each returns True when the inequality holds

REL = 1e-10


def _leq(a, b, rel=REL):
    return a <= b + rel * max(1.0, abs(a), abs(b))


def random_regularizer(rng, n):
    from slamopt import BoxIndicator, L1Regularizer, ZeroRegularizer

    kind = rng.integers(3)
    if kind == 0:
        return ZeroRegularizer()
    if kind == 1:
        return L1Regularizer(rng.uniform(0.0, 2.0))
    lo = -rng.uniform(0.1, 2.0, n)
    return BoxIndicator(lo, lo + rng.uniform(0.1, 3.0, n))


def point_in_domain(rng, r, n):
    from slamopt import BoxIndicator

    if isinstance(r, BoxIndicator):
        return rng.uniform(r.lo, r.hi)
    return rng.normal(0.0, 2.0, n)


def check_monotone(x, g, r, eta1, eta2):
    from slamopt import residual

    hi, lo = max(eta1, eta2), min(eta1, eta2)
    G_hi = np.linalg.norm(residual(x, hi, g, r))
    G_lo = np.linalg.norm(residual(x, lo, g, r))
    return _leq(G_hi, G_lo) and _leq(lo * G_lo, hi * G_hi)


def check_error_split(x, g, g_tilde, r, t):
    from slamopt import residual

    G = residual(x, t, g, r)
    Gt = residual(x, t, g_tilde, r)
    e = g - g_tilde
    return _leq(-2.0 * float(Gt @ Gt), -float(G @ G) + 2.0 * float(e @ e))


def check_tG_bound(x, g, r, t):
    from slamopt import residual

    n = x.size
    lhs = t * np.linalg.norm(residual(x, t, g, r))
    return _leq(lhs, t * (np.linalg.norm(g) + r.lipschitz(n)))


def check_prox_shift(x, g, r, eta1, eta2):
    n = x.size
    a = r.prox(x - eta1 * g, eta1)
    b = r.prox(x - eta2 * g, eta2)
    bound = abs(eta1 - eta2) * (r.lipschitz(n) + 3.0 * np.linalg.norm(g))
    return _leq(float(np.linalg.norm(a - b)), bound)


def brute_force_projection(x, total, lo, hi):
    """Projection onto ``{sum y = total, lo <= y <= hi}`` by enumerating 3^n bound patterns."""
    x, lo, hi = (np.asarray(a, dtype=float) for a in (x, lo, hi))
    n = x.size
    best = None
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pat = np.array(pattern)
        free = pat == 1
        y = np.where(pat == 0, lo, hi).astype(float)
        if free.any():
            lam = (x[free].sum() + y[~free].sum() - total) / free.sum()
            y[free] = x[free] - lam
        elif abs(y.sum() - total) > 1e-9:
            continue
        if np.all(y >= lo - 1e-12) and np.all(y <= hi + 1e-12) and abs(y.sum() - total) <= 1e-9:
            d = float(np.sum((y - x) ** 2))
            if best is None or d < best[0]:
                best = (d, y)
    return best[1]
