"""Exact generator of the full chain on tiny lattices, and its stationary law.

Configurations are indexed in base 4 with site 0 as the least significant
digit: ``idx = sum_i state[i] * 4**i``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from ..lattice import Lattice
from ..params import BoundaryData, ModelParams
from .rates import RateTable

DEFAULT_STATE_CAP = 65536
DENSE_LIMIT = 4096
PARTS = ("exchange", "contact", "boundary")


class ReducibleChainError(RuntimeError):
    pass


def all_configurations(n_sites: int) -> np.ndarray:
    """(4**n, n) array; row ``idx`` holds the states of configuration ``idx``."""
    idx = np.arange(4 ** n_sites, dtype=np.int64)
    return ((idx[:, None] >> (2 * np.arange(n_sites, dtype=np.int64))[None, :]) & 3).astype(np.uint8)


def config_index(states: np.ndarray) -> int:
    s = np.asarray(states, dtype=np.int64)
    return int((s << (2 * np.arange(s.size, dtype=np.int64))).sum())


def generator_matrix(
    lat: Lattice,
    p: ModelParams | None = None,
    b: BoundaryData | None = None,
    parts=PARTS,
    rates: RateTable | None = None,
    cap: int = DEFAULT_STATE_CAP,
) -> sp.csr_matrix:
    """Sparse generator Q with Q[eta, eta'] the jump rate and zero row sums.

    ``parts`` selects which dynamics enter (``exchange``, ``contact``,
    ``boundary``); each keeps its N^2 acceleration where it has one.
    Either pass (p, b) or a prebuilt ``rates`` table.
    """
    n = lat.site_count
    size = 4 ** n
    if size > cap:
        raise ValueError(f"state space 4^{n} = {size} exceeds the cap {cap}")
    if rates is None:
        if p is None or b is None:
            raise ValueError("need either (p, b) or rates")
        rates = RateTable.from_model(lat, p, b)
    unknown = set(parts) - set(PARTS)
    if unknown:
        raise ValueError(f"unknown generator parts {sorted(unknown)}")

    configs = all_configurations(n)
    idx = np.arange(size, dtype=np.int64)
    pow4 = np.int64(4) ** np.arange(n, dtype=np.int64)
    rows, cols, vals = [], [], []

    def add(src, dst, rate):
        keep = rate > 0
        rows.append(src[keep])
        cols.append(dst[keep])
        vals.append(rate[keep])

    def flip(i, target, rate):
        cur = configs[:, i].astype(np.int64)
        mask = cur != target
        dst = idx + (target - cur) * pow4[i]
        add(idx[mask], dst[mask], np.broadcast_to(rate, idx.shape)[mask])

    if "exchange" in parts and rates.exchange > 0:
        for i in range(n):
            for j in lat.fwd[i]:
                if j < 0 or j == i:
                    continue
                si = configs[:, i].astype(np.int64)
                sj = configs[:, j].astype(np.int64)
                mask = si != sj
                dst = idx + (sj - si) * pow4[i] + (si - sj) * pow4[j]
                add(idx[mask], dst[mask], np.full(mask.sum(), rates.exchange))

    if "contact" in parts:
        for i in range(n):
            n1 = np.zeros(size)
            n3 = np.zeros(size)
            for j in lat.nbr[i]:
                if j >= 0:
                    n1 += configs[:, j] == 1
                    n3 += configs[:, j] == 3
            beta = rates.lam1 * n1 + rates.lam2 * n3
            s = configs[:, i]
            for src_state, target, rate in (
                (0, 1, beta), (2, 3, beta),
                (0, 2, rates.r), (1, 3, rates.r),
                (1, 0, 1.0), (2, 0, 1.0), (3, 1, 1.0), (3, 2, 1.0),
            ):
                m = s == src_state
                rr = np.broadcast_to(rate, idx.shape)[m]
                add(idx[m], idx[m] + (target - src_state) * pow4[i], np.asarray(rr, dtype=float))

    if "boundary" in parts:
        for i in np.flatnonzero(rates.boundary.sum(axis=1) > 0):
            for t in range(4):
                if rates.boundary[i, t] > 0:
                    flip(i, t, rates.boundary[i, t])

    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    v = np.concatenate(vals) if vals else np.zeros(0)
    Q = sp.coo_matrix((v, (r, c)), shape=(size, size)).tocsr()
    Q.sum_duplicates()
    diag = -np.asarray(Q.sum(axis=1)).ravel()
    return (Q + sp.diags(diag)).tocsr()


def is_irreducible(Q) -> bool:
    Q = sp.csr_matrix(Q)
    off = Q - sp.diags(Q.diagonal())
    off.eliminate_zeros()
    ncomp, _ = csgraph.connected_components(off, directed=True, connection="strong")
    return ncomp == 1


def stationary_distribution(Q, check: bool = True) -> np.ndarray:
    """Solve pi Q = 0 with sum(pi) = 1.

    Raises :class:`ReducibleChainError` when the transition graph is not
    strongly connected (the kernel would then be more than one-dimensional).
    """
    dense_input = isinstance(Q, np.ndarray)
    Q = sp.csr_matrix(Q, dtype=float)
    n = Q.shape[0]
    if check and not is_irreducible(Q):
        raise ReducibleChainError("generator is reducible; stationary law not unique")
    if n <= DENSE_LIMIT or dense_input:
        A = Q.T.toarray()
        A[n - 1, :] = 1.0
        rhs = np.zeros(n)
        rhs[n - 1] = 1.0
        pi = np.linalg.solve(A, rhs)
    else:
        # the transition graph is Hamming-like, so sparse LU fills in almost
        # completely; Arnoldi on Q^T for the eigenvalue 0 is far cheaper.
        # A fixed start vector keeps the result bit-reproducible.
        vals, vecs = spla.eigs(Q.T.tocsr(), k=2, which="LR", tol=1e-14, ncv=min(60, n - 2),
                               maxiter=100_000, v0=np.full(n, 1.0 / n))
        pi = np.real(vecs[:, int(np.argmax(vals.real))])
        pi = pi / pi.sum()
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    resid = np.abs(Q.T @ pi).max()
    scale = max(1.0, np.abs(Q.diagonal()).max())
    if resid > 1e-10 * scale:
        raise ReducibleChainError(f"stationary residual {resid:.3e} too large")
    return pi


def site_marginals(pi: np.ndarray, n_sites: int) -> np.ndarray:
    """(n_sites, 4) array of P(state at site i = s) under ``pi``."""
    configs = all_configurations(n_sites)
    out = np.zeros((n_sites, 4))
    for s in range(4):
        out[:, s] = pi @ (configs == s)
    return out


def reflection_permutation(lat: Lattice) -> np.ndarray:
    """perm[idx] = index of the configuration mirrored by x1 -> -x1."""
    site_map = np.array([lat.index((-c[0],) + tuple(c[1:])) for c in lat.coords])
    configs = all_configurations(lat.site_count)
    # site_map is an involution, so indexing by it also inverts it
    mirrored = configs[:, site_map]
    pow4 = np.int64(4) ** np.arange(lat.site_count, dtype=np.int64)
    return (mirrored.astype(np.int64) * pow4).sum(axis=1)
