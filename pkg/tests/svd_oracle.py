"""Slow one-sided Jacobi SVD, independent of LAPACK, used as a test oracle."""

import numpy as np


def jacobi_svd(a, tol=1e-14, max_sweeps=60):
    """Thin SVD (u, sigma, v) with sigma descending; a ~ u @ diag(sigma) @ v.T."""
    a = np.asarray(a, dtype=np.float64)
    transposed = a.shape[0] < a.shape[1]
    if transposed:
        a = a.T
    n = a.shape[1]
    u = a.copy()
    v = np.eye(n)

    for _ in range(max_sweeps):
        worst = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = u[:, p] @ u[:, p]
                aqq = u[:, q] @ u[:, q]
                apq = u[:, p] @ u[:, q]
                scale = np.sqrt(app * aqq)
                if scale <= 0.0:
                    continue
                worst = max(worst, abs(apq) / scale)
                if abs(apq) < tol * scale:
                    continue
                tau = (aqq - app) / (2.0 * apq)
                sgn = 1.0 if tau >= 0 else -1.0
                t = sgn / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                up, uq = u[:, p].copy(), u[:, q].copy()
                u[:, p] = c * up - s * uq
                u[:, q] = s * up + c * uq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if worst < tol:
            break

    sigma = np.sqrt(np.sum(u * u, axis=0))
    uu = np.zeros_like(u)
    nz = sigma > 1e-300
    uu[:, nz] = u[:, nz] / sigma[nz]
    order = np.argsort(-sigma, kind="stable")
    sigma, uu, v = sigma[order], uu[:, order], v[:, order]
    if transposed:
        return v, sigma, uu
    return uu, sigma, v
