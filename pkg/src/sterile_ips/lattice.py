"""Cylinder lattice {-N..N} x T_N^{d-1} and the 4-state site encoding.

Sites are enumerated row-major with axis 1 slowest, so a sweep along the
open axis touches contiguous blocks of N^{d-1} sites.  Configurations are
plain ``uint8`` arrays indexed by that enumeration.

State encoding: ``state = 2*omega + xi`` where ``xi`` flags wild insects and
``omega`` sterile ones, so 0 = empty, 1 = wild, 2 = sterile, 3 = mixed.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EMPTY, WILD, STERILE, MIXED = 0, 1, 2, 3

SNAPSHOT_MAGIC = b"SIPS"
SNAPSHOT_VERSION = 1
# magic, version (u16), N (u32), d (u16), site count (u64)
_HEADER = struct.Struct("<4sHIHQ")


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Finite cylinder with open ends along axis 1 and torus wrap elsewhere.

    ``coords[i]`` holds the integer coordinates of site ``i``: the first in
    ``-N..N``, the others in ``0..N-1``.  ``nbr[i]`` lists the directional
    neighbours ``i -/+ e_1, i -/+ e_2, ...`` with ``-1`` where axis 1 ends.
    ``fwd[i, k]`` is the site ``i + e_{k+1}`` (or ``-1``), i.e. the bonds
    owned by ``i`` for the exchange dynamics.
    """

    N: int
    d: int
    coords: np.ndarray = field(repr=False, compare=False)
    nbr: np.ndarray = field(repr=False, compare=False)
    fwd: np.ndarray = field(repr=False, compare=False)

    @property
    def site_count(self) -> int:
        return (2 * self.N + 1) * self.N ** (self.d - 1)

    @property
    def face_size(self) -> int:
        return self.N ** (self.d - 1)

    @property
    def left_face(self) -> np.ndarray:
        return np.arange(self.face_size)

    @property
    def right_face(self) -> np.ndarray:
        return np.arange(self.site_count - self.face_size, self.site_count)

    @property
    def boundary_side(self) -> np.ndarray:
        """-1 on the left face, +1 on the right face, 0 in the interior."""
        side = np.zeros(self.site_count, dtype=np.int8)
        side[self.left_face] = -1
        side[self.right_face] = 1
        return side

    def index(self, x) -> int:
        """Enumeration index of the site with coordinates ``x``."""
        x = (x,) if np.isscalar(x) else tuple(int(c) for c in x)
        if len(x) != self.d:
            raise LatticeError(f"site {x} has {len(x)} coordinates, lattice has d={self.d}")
        x1, rest = x[0], x[1:]
        if not -self.N <= x1 <= self.N or any(not 0 <= c < self.N for c in rest):
            raise LatticeError(f"site {x} outside lattice N={self.N}, d={self.d}")
        idx = x1 + self.N
        for c in rest:
            idx = idx * self.N + c
        return int(idx)

    def site(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.site_count:
            raise LatticeError(f"site index {i} outside 0..{self.site_count - 1}")
        return tuple(int(c) for c in self.coords[i])

    def neighbors(self, x) -> list[tuple[int, ...]]:
        """Directional neighbours of ``x`` as coordinate tuples.

        Interior sites get 2d entries and face sites 2d-1.  For N <= 2 the
        torus directions may repeat a site (or return ``x`` itself when
        N = 1); repeats are kept because the generator sums over directions.
        """
        i = self.index(x)
        return [self.site(j) for j in self.nbr[i] if j >= 0]

    def macroscopic(self) -> np.ndarray:
        """Site positions x/N in [-1, 1] x [0, 1)^{d-1}."""
        return self.coords / float(self.N)


def build_lattice(N: int, d: int) -> Lattice:
    if N < 1 or d < 1:
        raise LatticeError(f"need N >= 1 and d >= 1, got N={N}, d={d}")
    shape = (2 * N + 1,) + (N,) * (d - 1)
    grid = np.indices(shape).reshape(d, -1).T
    coords = grid.copy()
    coords[:, 0] -= N
    n = coords.shape[0]

    flat = np.arange(n).reshape(shape)
    nbr = np.full((n, 2 * d), -1, dtype=np.int64)
    fwd = np.full((n, d), -1, dtype=np.int64)
    for k in range(d):
        for j, step in enumerate((-1, 1)):
            if k == 0:
                shifted = np.full(shape, -1, dtype=np.int64)
                if step == 1:
                    shifted[:-1] = flat[1:]
                else:
                    shifted[1:] = flat[:-1]
            else:
                shifted = np.roll(flat, -step, axis=k)
            nbr[:, 2 * k + j] = shifted.reshape(-1)
        fwd[:, k] = nbr[:, 2 * k + 1]
    return Lattice(N=N, d=d, coords=coords, nbr=nbr, fwd=fwd)


def encode(xi, omega):
    """(xi, omega) bits -> state, elementwise."""
    xi = np.asarray(xi)
    omega = np.asarray(omega)
    if np.any((xi != 0) & (xi != 1)) or np.any((omega != 0) & (omega != 1)):
        raise ValueError("xi and omega must be 0/1")
    out = 2 * omega + xi
    return int(out) if out.ndim == 0 else out.astype(np.uint8)


def decode(state):
    """state -> (xi, omega), elementwise."""
    s = np.asarray(state)
    if np.any((s < 0) | (s > 3)):
        raise ValueError("states must lie in {0,1,2,3}")
    xi, omega = s & 1, s >> 1
    if s.ndim == 0:
        return int(xi), int(omega)
    return xi.astype(np.uint8), omega.astype(np.uint8)


def indicators(states: np.ndarray) -> np.ndarray:
    """(4, n) array with row i equal to eta_i = 1{state == i}."""
    xi, omega = decode(np.asarray(states, dtype=np.int64))
    xi = xi.astype(np.int64)
    omega = omega.astype(np.int64)
    return np.stack([(1 - xi) * (1 - omega), xi * (1 - omega), (1 - xi) * omega, xi * omega])


def sample_product(lat: Lattice, profile, rng: np.random.Generator) -> np.ndarray:
    """Draw site states independently with P(state=i at x) = profile_i(x/N).

    ``profile`` maps an (n, d) array of macroscopic points to a (3, n) array
    of densities for states 1, 2, 3.
    """
    dens = np.asarray(profile(lat.macroscopic()), dtype=float)
    p = np.vstack([1.0 - dens.sum(axis=0), dens])
    if np.any(p < -1e-12):
        raise ValueError("profile leaves the simplex")
    cum = np.cumsum(np.clip(p, 0.0, None), axis=0)
    u = rng.random(lat.site_count) * cum[-1]
    return (u[None, :] >= cum[:-1]).sum(axis=0).astype(np.uint8)


# ---------------------------------------------------------------------------
# snapshot files


def write_snapshot(path, lat: Lattice, states: np.ndarray, binary: bool = False) -> None:
    path = Path(path)
    states = np.asarray(states, dtype=np.uint8)
    if states.shape != (lat.site_count,):
        raise ValueError(f"expected {lat.site_count} states, got shape {states.shape}")
    if binary:
        path.write_bytes(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, lat.N, lat.d, lat.site_count) + pack_states(states))
    else:
        lines = [f"# N={lat.N} d={lat.d} version={SNAPSHOT_VERSION}"]
        lines.extend(str(int(s)) for s in states)
        path.write_text("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[Lattice, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] == SNAPSHOT_MAGIC:
        magic, version, N, d, n = _HEADER.unpack_from(raw)
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        lat = build_lattice(N, d)
        if n != lat.site_count:
            raise ValueError(f"{path}: header site count {n} does not match N={N}, d={d}")
        return lat, unpack_states(raw[_HEADER.size:], n)
    lines = raw.decode().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: text snapshot needs a '# N=.. d=..' header")
    meta = dict(tok.split("=") for tok in lines[0][1:].split())
    lat = build_lattice(int(meta["N"]), int(meta["d"]))
    states = np.array([int(s) for s in lines[1:] if s.strip()], dtype=np.uint8)
    if states.size != lat.site_count or states.max(initial=0) > 3:
        raise ValueError(f"{path}: bad snapshot body")
    return lat, states


def pack_states(states: np.ndarray) -> bytes:
    """2 bits per site, site i at bits 2*(i % 4) of byte i // 4."""
    s = np.asarray(states, dtype=np.uint8)
    pad = (-s.size) % 4
    s = np.concatenate([s, np.zeros(pad, dtype=np.uint8)]).reshape(-1, 4)
    packed = s[:, 0] | (s[:, 1] << 2) | (s[:, 2] << 4) | (s[:, 3] << 6)
    return packed.astype(np.uint8).tobytes()


def unpack_states(data: bytes, n: int) -> np.ndarray:
    b = np.frombuffer(data, dtype=np.uint8)
    out = np.stack([(b >> (2 * j)) & 3 for j in range(4)], axis=1).reshape(-1)
    if out.size < n:
        raise ValueError("truncated snapshot")
    return out[:n].astype(np.uint8)
