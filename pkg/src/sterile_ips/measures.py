"""Product reference measures, empirical pairings and block averages.

Everything that sums over configurations does so exhaustively and refuses
lattices above ``EXHAUSTIVE_CAP`` sites rather than approximating.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .kmc.generator import all_configurations
from .lattice import Lattice, indicators
from .params import BoundaryData

EXHAUSTIVE_CAP = 8


class ProfileError(ValueError):
    pass


class ProfileFunction:
    """alpha = (alpha1, alpha2, alpha3) as a function of macroscopic position.

    ``fn`` maps an (n, d) array of points to a (3, n) array.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], name: str = "custom"):
        self.fn = fn
        self.name = name

    @classmethod
    def constant(cls, alpha) -> "ProfileFunction":
        a = np.asarray(alpha, dtype=float)
        if a.shape != (3,):
            raise ProfileError("a constant profile needs three densities")
        return cls(lambda u, a=a: np.repeat(a[:, None], len(u), axis=1), name=f"constant{tuple(a)}")

    @classmethod
    def linear_between(cls, left, right) -> "ProfileFunction":
        """Affine in u1 from ``left`` at u1 = -1 to ``right`` at u1 = 1."""
        lv = np.asarray(left, dtype=float)
        rv = np.asarray(right, dtype=float)

        def fn(u):
            s = (np.asarray(u)[:, 0] + 1.0) / 2.0
            return lv[:, None] * (1.0 - s)[None, :] + rv[:, None] * s[None, :]

        return cls(fn, name="linear")

    @classmethod
    def matching_boundary(cls, b: BoundaryData) -> "ProfileFunction":
        """Affine interpolation of constant reservoir data, so alpha = b on both faces."""
        c = b.constants
        if c is None:
            raise ProfileError("matching_boundary needs constant-per-face boundary data")
        return cls.linear_between(c[-1], c[1])

    def values(self, u: np.ndarray) -> np.ndarray:
        """(4, n) array (alpha0, alpha1, alpha2, alpha3) at the points ``u``, validated."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        a = np.asarray(self.fn(u), dtype=float).reshape(3, len(u))
        a0 = 1.0 - a.sum(axis=0)
        if np.any(a <= 0) or np.any(a >= 1) or np.any(a0 <= 0):
            raise ProfileError(f"profile {self.name} leaves the open simplex")
        return np.vstack([a0, a])


def _as_profile(alpha) -> ProfileFunction:
    return alpha if isinstance(alpha, ProfileFunction) else ProfileFunction.constant(alpha)


def _check_cap(lat: Lattice):
    if lat.site_count > EXHAUSTIVE_CAP:
        raise ValueError(f"{lat.site_count} sites exceeds the exhaustive cap of {EXHAUSTIVE_CAP}")


def nu_weight(states: np.ndarray, alpha, lat: Lattice) -> float:
    """nu_alpha(eta) = Z^{-1} exp(sum_i sum_x log(alpha_i/alpha_0)(x/N) eta_i(x)), Z = prod_x 1/alpha_0."""
    a = _as_profile(alpha).values(lat.macroscopic())
    eta = indicators(states)
    expo = float((np.log(a[1:] / a[0]) * eta[1:]).sum())
    log_z = float(-np.log(a[0]).sum())
    return float(np.exp(expo - log_z))


def all_weights(alpha, lat: Lattice) -> np.ndarray:
    """nu_alpha over every configuration, in the base-4 order of the generator oracle."""
    _check_cap(lat)
    a = _as_profile(alpha).values(lat.macroscopic())
    configs = all_configurations(lat.site_count)
    logs = np.log(a)
    site = np.arange(lat.site_count)
    return np.exp(logs[configs, site[None, :]].sum(axis=1))


def marginal_check(alpha, lat: Lattice) -> float:
    """max_{i,x} |E_nu[eta_i(x)] - alpha_i(x/N)| by exhaustive summation."""
    _check_cap(lat)
    prof = _as_profile(alpha)
    w = all_weights(prof, lat)
    configs = all_configurations(lat.site_count)
    a = prof.values(lat.macroscopic())
    err = 0.0
    for i in range(1, 4):
        err = max(err, float(np.abs(w @ (configs == i) - a[i]).max()))
    return err


def swap_ratio(alpha, lat: Lattice, x: int, y: int, i: int, j: int) -> float:
    """R_{i,j}^{x,y}(alpha) from v_k = log alpha_k; zero for constant alpha."""
    a = _as_profile(alpha).values(lat.macroscopic()[[x, y]])
    v = np.log(a)
    return float(np.exp((v[j, 1] - v[j, 0]) - (v[i, 1] - v[i, 0])) - 1.0)


def exchange_change_of_variable(alpha, lat: Lattice, f: np.ndarray, x: int, y: int, i: int, j: int):
    """Both sides of the exchange change of variables.

    lhs = E_nu[eta_i(x) eta_j(y) f(eta^{x,y})],
    rhs = E_nu[eta_j(x) eta_i(y) (R_{i,j}^{x,y} + 1) f(eta)].
    ``f`` is a vector over configurations (base-4 order).  Holds for any alpha.
    """
    if i == j:
        raise ValueError("need i != j")
    _check_cap(lat)
    w = all_weights(alpha, lat)
    configs = all_configurations(lat.site_count)
    swapped = _index_after_swap(configs, x, y)
    lhs = float(np.sum(w * (configs[:, x] == i) * (configs[:, y] == j) * f[swapped]))
    R = swap_ratio(alpha, lat, x, y, i, j)
    rhs = float(np.sum(w * (configs[:, x] == j) * (configs[:, y] == i) * (R + 1.0) * f))
    return lhs, rhs


def boundary_change_of_variable(alpha, lat: Lattice, f: np.ndarray, x: int, i: int, j: int, b=None):
    """Both sides of the reservoir change of variables at site ``x``.

    lhs = E_nu[eta_i(x) b_j f(eta)],  rhs = E_nu[eta_j(x) b_i f(sigma_{i,x} eta)]
    where sigma_{i,x} sets site x to state i.  ``b`` is the 4-vector
    (b0..b3) at x, defaulting to alpha(x/N); the identity needs alpha
    proportional to b at x.
    """
    if i == j:
        raise ValueError("need i != j")
    _check_cap(lat)
    prof = _as_profile(alpha)
    if b is None:
        b = prof.values(lat.macroscopic()[[x]])[:, 0]
    b = np.asarray(b, dtype=float)
    w = all_weights(prof, lat)
    configs = all_configurations(lat.site_count)
    pow4 = np.int64(4) ** x
    idx = np.arange(configs.shape[0], dtype=np.int64)
    set_i = idx + (i - configs[:, x].astype(np.int64)) * pow4
    lhs = float(np.sum(w * (configs[:, x] == i) * b[j] * f))
    rhs = float(np.sum(w * (configs[:, x] == j) * b[i] * f[set_i]))
    return lhs, rhs


def change_of_variable_identities(alpha, lat: Lattice, f: np.ndarray, x: int, y: int, i: int, j: int, b=None):
    """((lhs, rhs) of the exchange identity, (lhs, rhs) of the reservoir identity at x)."""
    return (
        exchange_change_of_variable(alpha, lat, f, x, y, i, j),
        boundary_change_of_variable(alpha, lat, f, x, i, j, b=b),
    )


def invariance_residual(Q, weights: np.ndarray, f: np.ndarray) -> float:
    """sum_eta nu(eta) (Q f)(eta); vanishes when nu is invariant for Q."""
    return float(weights @ (Q @ f))


def _index_after_swap(configs: np.ndarray, x: int, y: int) -> np.ndarray:
    sx = configs[:, x].astype(np.int64)
    sy = configs[:, y].astype(np.int64)
    idx = np.arange(configs.shape[0], dtype=np.int64)
    return idx + (sy - sx) * 4 ** x + (sx - sy) * 4 ** y


# ---------------------------------------------------------------------------
# empirical side


def empirical_pair(states: np.ndarray, G, lat: Lattice) -> float:
    """<pi^N, G> = sum_{i=1..3} N^{-d} sum_x eta_i(x) G_i(x/N).

    ``G`` maps an (n, d) array of points to a (3, n) array.
    """
    g = np.asarray(G(lat.macroscopic()), dtype=float).reshape(3, lat.site_count)
    eta = indicators(states)[1:]
    return float((eta * g).sum() / float(lat.N) ** lat.d)


def _box_offsets(lat: Lattice, ell: int):
    """Distinct torus offsets of the sup-metric box, per transverse axis."""
    span = np.arange(-ell, ell + 1)
    return [np.unique(np.mod(span, lat.N)) for _ in range(lat.d - 1)]


def block_average(states: np.ndarray, lat: Lattice, x, ell: int) -> np.ndarray:
    """(eta1, eta2, eta3) averaged over {y : max_k |y_k - x_k| <= ell} within the lattice."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    i = lat.index(x)
    c = lat.coords[i]
    lo, hi = max(-lat.N, c[0] - ell), min(lat.N, c[0] + ell)
    axis1 = np.arange(lo, hi + 1) + lat.N
    sites = axis1
    for k, offs in enumerate(_box_offsets(lat, ell)):
        col = np.mod(c[k + 1] + offs, lat.N)
        sites = (sites[:, None] * lat.N + col[None, :]).ravel()
    eta = indicators(np.asarray(states)[sites])
    return eta[1:].mean(axis=1)


def block_profile(states: np.ndarray, lat: Lattice, ell: int) -> np.ndarray:
    """(3, n) block averages of the indicators at every site."""
    return block_smooth(indicators(states)[1:].astype(float), lat, ell)


def block_smooth(values: np.ndarray, lat: Lattice, ell: int) -> np.ndarray:
    """Box average of per-site fields ``values`` (c, n) over Lambda_x^ell at every site.

    Applied to site marginals or time-averaged occupations this is the
    expectation of the block average.
    """
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    values = np.asarray(values, dtype=float)
    c = values.shape[0]
    shape = (2 * lat.N + 1,) + (lat.N,) * (lat.d - 1)
    eta = values.reshape((c,) + shape)
    # transverse axes: sum over distinct torus offsets
    for k, offs in enumerate(_box_offsets(lat, ell)):
        eta = sum(np.roll(eta, -int(o), axis=k + 2) for o in offs)
    # open axis: truncated window via cumulative sums
    csum = np.concatenate([np.zeros((c, 1) + shape[1:]), np.cumsum(eta, axis=1)], axis=1)
    n1 = shape[0]
    lo = np.clip(np.arange(n1) - ell, 0, n1)
    hi = np.clip(np.arange(n1) + ell + 1, 0, n1)
    sums = csum[:, hi] - csum[:, lo]
    count = (hi - lo).astype(float)
    for offs in _box_offsets(lat, ell):
        count = count * len(offs)
    count = count.reshape((n1,) + (1,) * (lat.d - 1))
    return (sums / count[None]).reshape(c, -1)


def block_size(eps: float, N: int) -> int:
    """ell = floor(eps N)."""
    return int(np.floor(eps * N + 1e-12))
