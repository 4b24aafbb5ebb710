"""Explicit Euler stencil for a batch of profiles, shape (B, 3, M1, K)."""
import numpy as np
from numba import njit

DIRICHLET = 0
ROBIN = 1
NEUMANN = 2

OK = 0
NAN = 1
OUT_OF_SIMPLEX = 2


@njit(cache=True, nogil=True)
def advance(
    u, tmp, n_steps, dt, D, h1, ht, lam1, lam2, r, d,
    bc_l, bc_r, bl, br, tnbr, left_sign, react, tol, diag,
):
    """Apply ``n_steps`` Euler steps in place on ``u``.

    ``diag`` receives (step, batch, component, i, k) of the first failure.
    Returns a status code.
    """
    B = u.shape[0]
    M1 = u.shape[2]
    K = u.shape[3]
    nt = tnbr.shape[1]
    ih2 = 1.0 / (h1 * h1)
    it2 = 1.0 / (ht * ht)
    two_d = 2.0 * d
    src = u
    dst = tmp
    for step in range(n_steps):
        for bi in range(B):
            for i in range(M1):
                for k in range(K):
                    if (i == 0 and bc_l == DIRICHLET) or (i == M1 - 1 and bc_r == DIRICHLET):
                        for c in range(3):
                            dst[bi, c, i, k] = bl[c, k] if i == 0 else br[c, k]
                        continue
                    r1 = src[bi, 0, i, k]
                    r2 = src[bi, 1, i, k]
                    r3 = src[bi, 2, i, k]
                    if react:
                        r0 = 1.0 - r1 - r2 - r3
                        birth = two_d * (lam1 * r1 + lam2 * r3)
                        f1 = birth * r0 + r3 - (r + 1.0) * r1
                        f2 = r * r0 + r3 - birth * r2 - r2
                        f3 = birth * r2 + r * r1 - 2.0 * r3
                    else:
                        f1 = 0.0
                        f2 = 0.0
                        f3 = 0.0
                    total = 0.0
                    for c in range(3):
                        uc = src[bi, c, i, k]
                        if i == 0:
                            lap = 2.0 * (src[bi, c, 1, k] - uc) * ih2
                            if bc_l == ROBIN:
                                lap += left_sign * 2.0 * (bl[c, k] - uc) / (D * h1)
                        elif i == M1 - 1:
                            lap = 2.0 * (src[bi, c, M1 - 2, k] - uc) * ih2
                            if bc_r == ROBIN:
                                lap += 2.0 * (br[c, k] - uc) / (D * h1)
                        else:
                            lap = (src[bi, c, i - 1, k] - 2.0 * uc + src[bi, c, i + 1, k]) * ih2
                        for j in range(0, nt, 2):
                            lap += (src[bi, c, i, tnbr[k, j]] - 2.0 * uc + src[bi, c, i, tnbr[k, j + 1]]) * it2
                        if c == 0:
                            f = f1
                        elif c == 1:
                            f = f2
                        else:
                            f = f3
                        v = uc + dt * (D * lap + f)
                        if v != v:
                            diag[0] = step
                            diag[1] = bi
                            diag[2] = c
                            diag[3] = i
                            diag[4] = k
                            return NAN
                        if v < -tol or v > 1.0 + tol:
                            diag[0] = step
                            diag[1] = bi
                            diag[2] = c
                            diag[3] = i
                            diag[4] = k
                            return OUT_OF_SIMPLEX
                        if v < 0.0:
                            v = 0.0
                        dst[bi, c, i, k] = v
                        total += v
                    if total > 1.0 + tol:
                        diag[0] = step
                        diag[1] = bi
                        diag[2] = -1
                        diag[3] = i
                        diag[4] = k
                        return OUT_OF_SIMPLEX
                    if total > 1.0:
                        for c in range(3):
                            dst[bi, c, i, k] /= total
        src, dst = dst, src
    if n_steps % 2 == 1:
        u[:] = tmp
    return OK
