"""Dense nonsymmetric eigenvalues: balancing, Householder reduction to upper
Hessenberg form and Francis double-shift QR iteration.

Meant for the small Jacobians of this package (n <= 64).
"""

from __future__ import annotations

import math

import numpy as np

RADIX = 2.0


class EigenvalueError(RuntimeError):
    pass


def balance(A: np.ndarray) -> np.ndarray:
    """Diagonal similarity that equalises row and column norms (powers of 2, so exact)."""
    a = np.array(A, dtype=float)
    n = a.shape[0]
    sqrdx = RADIX * RADIX
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.sum(np.abs(a[:, i])) - abs(a[i, i])
            r = np.sum(np.abs(a[i, :])) - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= RADIX
                c *= sqrdx
            g = r * RADIX
            while c > g:
                f /= RADIX
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Upper Hessenberg matrix similar to A, by Householder reflections."""
    H = np.array(A, dtype=float)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k].copy()
        alpha = math.hypot(*x)
        if alpha == 0.0:
            continue
        v = x
        v[0] += math.copysign(alpha, x[0])
        v /= math.hypot(*v)
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v)
        H[k + 2 :, k] = 0.0
    return H


ULP = np.finfo(float).eps
SAFE_MIN = np.finfo(float).tiny


def _negligible(a: np.ndarray, k: int, anorm: float) -> bool:
    """Can the subdiagonal entry a[k, k-1] be set to zero?

    Besides the usual test against the neighbouring diagonal, the entry must
    be small relative to the 2x2 block it couples (the Ahues-Tisseur
    criterion).  This keeps the tiny eigenvalues of strongly graded matrices
    accurate.
    """
    h = abs(a[k, k - 1])
    if h <= SAFE_MIN:
        return True
    tst = abs(a[k - 1, k - 1]) + abs(a[k, k])
    if tst == 0.0:
        tst = anorm
    if h > ULP * tst:
        return False
    ab = max(h, abs(a[k - 1, k]))
    ba = min(h, abs(a[k - 1, k]))
    diff = abs(a[k - 1, k - 1] - a[k, k])
    aa = max(abs(a[k, k]), diff)
    bb = min(abs(a[k, k]), diff)
    s = aa + ab
    return ba * (ab / s) <= max(SAFE_MIN, ULP * (bb * (aa / s)))


def _hqr(a: np.ndarray, max_iter: int) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix (destroys ``a``)."""
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = np.sum(np.abs(np.triu(a, -1)))
    nn = n - 1
    t = 0.0
    total = 0
    while nn >= 0:
        its = 0
        while True:
            # look for a single small subdiagonal element
            l = 0
            for ll in range(nn, 0, -1):
                if _negligible(a, ll, anorm):
                    a[ll, ll - 1] = 0.0
                    l = ll
                    break
            if l < nn - 1 and (l > 0 or nn < n - 1):
                # a split-off block is an independent problem; solving it at
                # its own scale avoids underflow in strongly graded matrices
                sub = _scaled_hqr(a[l : nn + 1, l : nn + 1].copy(), max_iter)
                wr[l : nn + 1] = sub.real + t
                wi[l : nn + 1] = sub.imag
                nn = l - 1
                break
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                b, c = a[nn, nn - 1], a[nn - 1, nn]
                # discriminant at unit scale, since p * p and w can underflow
                sc = abs(p) + math.sqrt(abs(b)) * math.sqrt(abs(c))
                if sc > 0.0:
                    q = (p / sc) ** 2 + (b / sc) * (c / sc)
                    z = sc * math.sqrt(abs(q))
                else:
                    q = z = 0.0
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - b * (c / z)
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if total >= max_iter:
                raise EigenvalueError(f"QR iteration did not converge in {max_iter} iterations")
            if its and its % 10 == 0:
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            total += 1
            # look for two consecutive small subdiagonal elements
            m = nn - 2
            while True:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            # double-shift QR step on rows l..nn, columns m..nn
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k != nn - 1:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k != nn - 1:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
            if l >= nn - 1:
                break
    return wr + 1j * wi


def _to_unit(M: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """M times an exact power of two bringing its largest entry near 1.

    The exponent is applied in two halves so that subnormal input does not
    overflow the factor.
    """
    e = -math.frexp(float(np.max(np.abs(M))))[1]
    h = (e // 2, e - e // 2)
    return M * 2.0 ** h[0] * 2.0 ** h[1], h


def _scaled_hqr(H: np.ndarray, max_iter: int) -> np.ndarray:
    """``_hqr`` on H brought to unit size."""
    if not np.any(H):
        return np.zeros(H.shape[0], dtype=complex)
    Hs, h = _to_unit(H)
    return _hqr(Hs, max_iter) * 2.0 ** (-h[0]) * 2.0 ** (-h[1])


def eigenvalues(A) -> np.ndarray:
    """All eigenvalues of a real square matrix, sorted by decreasing real part."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    n = A.shape[0]
    if n == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise EigenvalueError("matrix has non-finite entries")
    if not np.any(A):
        return np.zeros(n, dtype=complex)
    B, h = _to_unit(A)
    B = balance(B)
    # Householder reduction keeps small eigenvalues of graded matrices only
    # when the large entries come first, so order coordinates by weight
    w = np.sum(np.abs(B), axis=0) + np.sum(np.abs(B), axis=1)
    order = np.argsort(-w, kind="stable")
    H = hessenberg(B[np.ix_(order, order)])
    lam = _scaled_hqr(H, max_iter=100 * n) * 2.0 ** (-h[0]) * 2.0 ** (-h[1])
    order = np.lexsort((-lam.imag, -lam.real))
    return lam[order]


def eigenpairs(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues with unit eigenvectors (columns) from two steps of inverse iteration."""
    A = np.asarray(A, dtype=float)
    lam = eigenvalues(A)
    n = A.shape[0]
    scale = max(np.linalg.norm(A, np.inf), 1.0)
    rng = np.random.default_rng(0)
    V = np.zeros((n, n), dtype=complex)
    for k, mu in enumerate(lam):
        shift = mu + 1e-10 * scale
        M = A.astype(complex) - shift * np.eye(n)
        v = rng.standard_normal(n) + 0j
        for _ in range(3):
            try:
                v = np.linalg.solve(M, v)
            except np.linalg.LinAlgError:
                M = M - 1e-8 * scale * np.eye(n)
                v = np.linalg.solve(M, v)
            v /= np.linalg.norm(v)
        V[:, k] = v
    return lam, V
