"""Compiled inner loop of the event engine.

Per-site composite rates live in the leaves of a binary sum tree; internal
nodes are recomputed from their children on every update, so the tree is
always bit-identical to a fresh rebuild.  Random numbers come in from the
caller as a buffer of uniforms, which keeps the stream owned by a numpy
Generator and the kernel free of hidden RNG state.
"""
import numpy as np
from numba import njit

OK_TIME = 0
NEED_UNIFORMS = 1
LOG_FULL = 2
ABSORBING = 3
MAX_EVENTS = 4

KIND_CONTACT = 0
KIND_BOUNDARY = 1
KIND_EXCHANGE = 2


@njit(cache=True, nogil=True, inline="always")
def contact_parts(s, beta, r):
    # (target_a, rate_a, target_b, rate_b) out of state s
    if s == 0:
        return 1, beta, 2, r
    if s == 1:
        return 0, 1.0, 3, r
    if s == 2:
        return 0, 1.0, 3, beta
    return 1, 1.0, 2, 1.0


@njit(cache=True, nogil=True, inline="always")
def site_beta(x, states, nbr, lam1, lam2):
    n1 = 0
    n3 = 0
    for j in range(nbr.shape[1]):
        y = nbr[x, j]
        if y >= 0:
            sy = states[y]
            if sy == 1:
                n1 += 1
            elif sy == 3:
                n3 += 1
    return lam1 * n1 + lam2 * n3


@njit(cache=True, nogil=True, inline="always")
def site_rate(x, states, nbr, fwd, lam1, lam2, r, exch, bnd):
    s = states[x]
    beta = site_beta(x, states, nbr, lam1, lam2)
    ta, ra, tb, rb = contact_parts(s, beta, r)
    total = ra + rb
    bsum = 0.0
    for t in range(4):
        if t != s:
            bsum += bnd[x, t]
    total = total + bsum
    cnt = 0
    for k in range(fwd.shape[1]):
        y = fwd[x, k]
        if y >= 0 and states[y] != s:
            cnt += 1
    total += exch * cnt
    return total


@njit(cache=True, nogil=True, inline="always")
def tree_set(tree, P, i, value):
    node = P + i
    tree[node] = value
    node //= 2
    while node >= 1:
        tree[node] = tree[2 * node] + tree[2 * node + 1]
        node //= 2


@njit(cache=True, nogil=True)
def tree_build(tree, P, leaves):
    tree[:] = 0.0
    for i in range(leaves.shape[0]):
        tree[P + i] = leaves[i]
    for node in range(P - 1, 0, -1):
        tree[node] = tree[2 * node] + tree[2 * node + 1]


@njit(cache=True, nogil=True)
def all_site_rates(states, nbr, fwd, lam1, lam2, r, exch, bnd):
    n = states.shape[0]
    out = np.empty(n)
    for x in range(n):
        out[x] = site_rate(x, states, nbr, fwd, lam1, lam2, r, exch, bnd)
    return out


@njit(cache=True, nogil=True, inline="always")
def _refresh(x, states, nbr, fwd, lam1, lam2, r, exch, bnd, tree, P):
    tree_set(tree, P, x, site_rate(x, states, nbr, fwd, lam1, lam2, r, exch, bnd))


@njit(cache=True, nogil=True, inline="always")
def _refresh_around(x, skip, states, nbr, fwd, lam1, lam2, r, exch, bnd, tree, P):
    # x and its neighbourhood, except ``skip`` (already refreshed by the caller)
    _refresh(x, states, nbr, fwd, lam1, lam2, r, exch, bnd, tree, P)
    for j in range(nbr.shape[1]):
        y = nbr[x, j]
        if y >= 0 and y != skip:
            _refresh(y, states, nbr, fwd, lam1, lam2, r, exch, bnd, tree, P)


@njit(cache=True, nogil=True, inline="always")
def _descend(tree, P, v):
    node = 1
    while node < P:
        left = tree[2 * node]
        if v < left:
            node = 2 * node
        else:
            v -= left
            node = 2 * node + 1
    return node - P, v


@njit(cache=True, nogil=True, inline="always")
def _touch(x, t, states, occ, last):
    occ[x, states[x]] += t - last[x]
    last[x] = t


@njit(cache=True, nogil=True)
def run_events(
    states, nbr, fwd, lam1, lam2, r, exch, bnd,
    tree, P, clock, uniforms, upos, t_stop, max_events,
    occ, last, log_time, log_kind, log_x, log_y, log_from, log_to, log_pos, record,
):
    """Apply events while the pending event time is <= t_stop.

    ``clock[0]`` is the time of the last applied event and ``clock[1]`` the
    already drawn time of the next one.  Returns (status, events_applied).
    """
    n = states.shape[0]
    done = 0
    while True:
        if clock[1] > t_stop:
            return OK_TIME, done
        if done >= max_events:
            return MAX_EVENTS, done
        if record and log_pos[0] >= log_time.shape[0]:
            return LOG_FULL, done
        if upos[0] + 2 > uniforms.shape[0]:
            return NEED_UNIFORMS, done
        t_ev = clock[1]
        total = tree[1]
        v = uniforms[upos[0]] * total
        upos[0] += 1
        x, v = _descend(tree, P, v)
        if x >= n:
            x = n - 1
        while tree[P + x] <= 0.0 and x > 0:
            x -= 1
        rate_x = tree[P + x]
        if v >= rate_x:
            v = rate_x * 0.999999999999
        s = states[x]
        beta = site_beta(x, states, nbr, lam1, lam2)
        ta, ra, tb, rb = contact_parts(s, beta, r)

        kind = -1
        y = -1
        target = -1
        if v < ra:
            kind = KIND_CONTACT
            target = ta
        else:
            v -= ra
            if v < rb:
                kind = KIND_CONTACT
                target = tb
            else:
                v -= rb
                for t in range(4):
                    if t != s and bnd[x, t] > 0.0:
                        if v < bnd[x, t]:
                            kind = KIND_BOUNDARY
                            target = t
                            break
                        v -= bnd[x, t]
                if kind < 0:
                    last_active = -1
                    for k in range(fwd.shape[1]):
                        yk = fwd[x, k]
                        if yk >= 0 and states[yk] != s:
                            last_active = yk
                            if v < exch:
                                y = yk
                                break
                            v -= exch
                    if y < 0:
                        y = last_active
                    if y >= 0:
                        kind = KIND_EXCHANGE
                    else:
                        # rounding left nothing to pick; take the last contact event
                        kind = KIND_CONTACT
                        target = tb if rb > 0.0 else ta

        if kind == KIND_EXCHANGE:
            sx = states[x]
            sy = states[y]
            _touch(x, t_ev, states, occ, last)
            _touch(y, t_ev, states, occ, last)
            states[x] = sy
            states[y] = sx
            if record:
                p = log_pos[0]
                log_time[p] = t_ev
                log_kind[p] = kind
                log_x[p] = x
                log_y[p] = y
                log_from[p] = sx
                log_to[p] = sy
                log_pos[0] = p + 1
            _refresh_around(x, y, states, nbr, fwd, lam1, lam2, r, exch, bnd, tree, P)
            _refresh_around(y, x, states, nbr, fwd, lam1, lam2, r, exch, bnd, tree, P)
        else:
            _touch(x, t_ev, states, occ, last)
            states[x] = target
            if record:
                p = log_pos[0]
                log_time[p] = t_ev
                log_kind[p] = kind
                log_x[p] = x
                log_y[p] = -1
                log_from[p] = s
                log_to[p] = target
                log_pos[0] = p + 1
            _refresh_around(x, -1, states, nbr, fwd, lam1, lam2, r, exch, bnd, tree, P)

        clock[0] = t_ev
        done += 1
        total = tree[1]
        if total <= 0.0:
            clock[1] = np.inf
            return ABSORBING, done
        clock[1] = t_ev - np.log1p(-uniforms[upos[0]]) / total
        upos[0] += 1
