"""Samplers and the exact reference integrator.

Four independent ways to look at the same model live here:

* named random streams: Philox generators keyed by a hash of
  (seed, *path), so every chain and purpose gets its own reproducible
  stream and reruns are byte-identical;
* an exact angle-grid integrator: spins restricted to N equally spaced
  angles make every Gibbs factor a trigonometric polynomial, so an N-point
  rectangle rule is spectrally exact once N outruns the Bessel decay of
  exp(beta*J*cos); variable elimination keeps the contraction cheap on
  low-width graphs (this is the package's quadrature oracle, sharing no
  code with the current/flow summation routes);
* spin-space Monte Carlo: a colour-blocked von Mises heat bath and a
  reflection cluster update;
* height-space Monte Carlo: a single-face heat bath for the integer dual
  height, plus the conditional augmentation back to a random current.

Estimation helpers (batch means, initial-positive-sequence effective sample
size) are at the bottom.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Iterator, Mapping, Sequence

import numpy as np

from xyloops.bessel import log_bessel_i, sample_yk
from xyloops.planar import PlanarGraph

__all__ = [
    "SamplerError",
    "stream",
    "grid_expectation",
    "grid_partition",
    "quad_correlator",
    "quad_two_point",
    "ChainSpec",
    "SpinState",
    "spin_mcmc",
    "height_chain",
    "sample_current",
    "Estimate",
    "batch_means",
    "ess_initial_positive",
]

QUAD_MAX_VERTICES = 5
GRID_MAX_ENTRIES = 50_000_000


class SamplerError(ValueError):
    """Raised for invalid sampler or integrator inputs."""


# ============================================================
# Named random streams
# ============================================================


def stream(seed: int, *path) -> np.random.Generator:
    """Philox generator for a named substream.

    The key is a 128-bit blake2b hash of (seed, *path), so streams for
    different purposes, chains, or replicas never collide and every one is
    reproducible from its name alone, independent of call order.
    """
    data = repr((int(seed),) + tuple(path)).encode()
    key = int.from_bytes(hashlib.blake2b(data, digest_size=16).digest(), "little")
    return np.random.Generator(np.random.Philox(key=key))


# ============================================================
# Exact angle-grid integrator
# ============================================================


def _edge_kernel(x: float, n_grid: int) -> np.ndarray:
    grid = 2.0 * np.pi * np.arange(n_grid) / n_grid
    return np.exp(x * np.cos(grid[:, None] - grid[None, :]))


def grid_expectation(
    g: PlanarGraph,
    charges: Mapping[Hashable, int],
    beta: float,
    n_grid: int,
    elimination_order: Sequence[Hashable] | None = None,
) -> float:
    """E[prod_v exp(i k_v theta_v)] on the N-point angle grid.

    charges maps vertex labels to integers k_v and must balance to zero
    (anything else is exactly zero by the grid's U(1) symmetry).  One vertex
    is pinned to angle zero; the rest are eliminated one at a time in the
    given label order (default: construction order), with a guard on the
    size of the intermediate tensors.  The result is real for balanced
    charges; the imaginary part is dropped after a sanity check.
    """
    if beta <= 0:
        raise SamplerError("beta must be positive")
    if n_grid < 4:
        raise SamplerError("grid must have at least 4 points")
    k = {g.vertex_id(lab): int(q) for lab, q in charges.items()}
    if sum(k.values()) != 0:
        raise SamplerError("charges must sum to zero")

    if elimination_order is None:
        order = list(range(g.nv))
    else:
        order = [g.vertex_id(lab) for lab in elimination_order]
        if sorted(order) != list(range(g.nv)):
            raise SamplerError("elimination order must list every vertex once")
    pin = order[-1]
    order = order[:-1]

    grid = 2.0 * np.pi * np.arange(n_grid) / n_grid
    kernels: dict[float, np.ndarray] = {}
    factors: list[tuple[tuple[int, ...], np.ndarray]] = []
    for e in range(g.ne):
        x = beta * g.coupling[e]
        if x not in kernels:
            kernels[x] = _edge_kernel(x, n_grid).astype(complex)
        ker = kernels[x]
        u, v = g.edge_tail[e], g.edge_head[e]
        if u == pin:
            factors.append(((v,), ker[0, :].copy()))
        elif v == pin:
            factors.append(((u,), ker[:, 0].copy()))
        else:
            factors.append(((u, v) if u < v else (v, u), ker))

    scalar = complex(1.0)
    for v in order:
        mine = [f for f in factors if v in f[0]]
        factors = [f for f in factors if v not in f[0]]
        union = sorted(set().union(*(set(fv) for fv, _ in mine)))
        if n_grid ** len(union) > GRID_MAX_ENTRIES:
            raise SamplerError(
                f"elimination width {len(union)} exceeds the tensor budget; "
                "pass a better elimination_order"
            )
        acc = np.ones((n_grid,) * len(union), dtype=complex)
        for fv, arr in mine:
            perm = np.argsort([union.index(x) for x in fv])
            arr_t = np.transpose(arr, perm)
            slicer = tuple(slice(None) if uv in fv else None for uv in union)
            acc = acc * arr_t[slicer]
        axis = union.index(v)
        if k.get(v, 0):
            phase = np.exp(1j * k[v] * grid)
            shape = [1] * len(union)
            shape[axis] = n_grid
            acc = acc * phase.reshape(shape)
        reduced = acc.sum(axis=axis) / n_grid
        rest = tuple(u for u in union if u != v)
        if rest:
            factors.append((rest, reduced))
        else:
            scalar *= complex(reduced)

    if factors:
        raise SamplerError("internal elimination error: leftover factor")
    # the pinned angle is zero, so its phase factor is exactly 1
    if abs(scalar.imag) > 1e-9 * max(1.0, abs(scalar.real)):
        raise SamplerError("imaginary part did not cancel; charges inconsistent")
    return float(scalar.real)


def grid_partition(g: PlanarGraph, beta: float, n_grid: int) -> float:
    """Partition sum in the normalised angle measure, on the N-point grid.

    Converges spectrally to the sourceless current partition sum.
    """
    return grid_expectation(g, {}, beta, n_grid)


def quad_correlator(
    g: PlanarGraph,
    beta: float,
    monomial: Sequence[tuple[Hashable, int]],
    rel_tol: float = 1e-10,
) -> float:
    """<prod_v sigma_v^{k_v}> by exact quadrature with grid doubling.

    The monomial is a list of (vertex, integer power) pairs; repeated
    vertices accumulate.  An unbalanced monomial returns 0 outright (global
    rotation symmetry).  Guarded to graphs with at most 5 vertices; use
    grid_expectation with an explicit elimination order for larger
    low-width graphs.
    """
    if g.nv > QUAD_MAX_VERTICES:
        raise SamplerError(
            f"quad_correlator is limited to {QUAD_MAX_VERTICES} vertices (got {g.nv})"
        )
    charges: dict[int, int] = {}
    for lab, power in monomial:
        v = g.vertex_id(lab)
        charges[v] = charges.get(v, 0) + int(power)
    if sum(charges.values()) != 0:
        return 0.0
    charges = {v: q for v, q in charges.items() if q != 0}
    if not charges:
        return 1.0
    id_charges = {g.labels[v]: q for v, q in charges.items()}
    n_grid = 32
    prev = None
    while n_grid <= 512:
        num = grid_expectation(g, id_charges, beta, n_grid)
        den = grid_expectation(g, {}, beta, n_grid)
        val = num / den
        if prev is not None and abs(val - prev) <= rel_tol * max(1.0, abs(val)):
            return val
        prev = val
        n_grid *= 2
    return prev


def quad_two_point(
    g: PlanarGraph, a: Hashable, b: Hashable, beta: float, k: int = 1
) -> float:
    """<sigma_a^k conj(sigma_b)^k> via quad_correlator."""
    return quad_correlator(g, beta, [(a, k), (b, -k)])


# ============================================================
# Spin-space Monte Carlo
# ============================================================


def _greedy_colour_classes(g: PlanarGraph) -> list[np.ndarray]:
    colour = [-1] * g.nv
    for v in range(g.nv):
        used = {colour[g.head(h)] for h in g.rotation[v]}
        c = 0
        while c in used:
            c += 1
        colour[v] = c
    classes = {}
    for v, c in enumerate(colour):
        classes.setdefault(c, []).append(v)
    return [np.array(sorted(vs), dtype=np.int64) for c, vs in sorted(classes.items())]


class SpinState:
    """XY spin configuration with heat-bath and reflection-cluster moves.

    Heat-bath sweeps are blocked by a greedy proper colouring so each block
    updates in one vectorised von Mises draw; the reflection move grows a
    cluster in the embedded sign model and reflects it about a uniformly
    random axis.
    """

    def __init__(self, g: PlanarGraph, beta: float, rng: np.random.Generator):
        if beta <= 0:
            raise SamplerError("beta must be positive")
        self.g = g
        self.beta = beta
        self.rng = rng
        self.theta = rng.uniform(0.0, 2.0 * np.pi, size=g.nv)
        dmax = max(g.degree(v) for v in range(g.nv))
        self._nbr = np.full((g.nv, dmax), -1, dtype=np.int64)
        self._coup = np.zeros((g.nv, dmax))
        for v in range(g.nv):
            for i, h in enumerate(g.rotation[v]):
                self._nbr[v, i] = g.head(h)
                self._coup[v, i] = g.coupling[h >> 1]
        self._classes = _greedy_colour_classes(g)
        self._adj = [
            [(g.head(h), g.coupling[h >> 1]) for h in g.rotation[v]] for v in range(g.nv)
        ]

    def heat_bath_sweep(self) -> None:
        """One full sweep of single-site von Mises resampling."""
        for cls in self._classes:
            idx = self._nbr[cls]
            mask = idx >= 0
            th = self.theta[np.where(mask, idx, 0)]
            w = np.where(mask, self.beta * self._coup[cls], 0.0)
            re = (w * np.cos(th)).sum(axis=1)
            im = (w * np.sin(th)).sum(axis=1)
            kappa = np.hypot(re, im)
            mu = np.arctan2(im, re)
            self.theta[cls] = self.rng.vonmises(mu, np.maximum(kappa, 1e-300)) % (
                2.0 * np.pi
            )

    def reflection_cluster_step(self) -> int:
        """One reflection-cluster move; returns the cluster size."""
        r = self.rng.uniform(0.0, 2.0 * np.pi)
        s = np.sin(self.theta - r)
        start = int(self.rng.integers(self.g.nv))
        in_cluster = np.zeros(self.g.nv, dtype=bool)
        in_cluster[start] = True
        stack = [start]
        size = 1
        while stack:
            v = stack.pop()
            sv = s[v]
            for w, j in self._adj[v]:
                if in_cluster[w]:
                    continue
                activation = -2.0 * self.beta * j * sv * s[w]
                if activation < 0.0 and self.rng.random() < -np.expm1(activation):
                    in_cluster[w] = True
                    size += 1
                    stack.append(w)
        self.theta[in_cluster] = (2.0 * r - self.theta[in_cluster]) % (2.0 * np.pi)
        return size

    def pair_cosines(self, pairs: Sequence[tuple[int, int]], k: int = 1) -> np.ndarray:
        """cos(k (theta_a - theta_b)) for vertex-id pairs."""
        out = np.empty(len(pairs))
        for i, (a, b) in enumerate(pairs):
            out[i] = math.cos(k * (self.theta[a] - self.theta[b]))
        return out


@dataclass(frozen=True)
class ChainSpec:
    """Reproducible Markov-chain run plan.

    Identical spec (same seed included) gives bit-identical output; chains
    with different `chain` indices use disjoint named streams.
    """

    seed: int
    burn_in: int = 200
    samples: int = 2000
    thinning: int = 1
    chain: int = 0

    def __post_init__(self) -> None:
        if self.burn_in < 0 or self.samples < 1 or self.thinning < 1:
            raise SamplerError("chain spec fields must be positive")


def spin_mcmc(
    g: PlanarGraph,
    beta: float,
    pairs: Sequence[tuple[Hashable, Hashable]],
    spec: ChainSpec,
    *,
    k: int = 1,
    clusters_per_sweep: int = 1,
) -> dict[tuple[Hashable, Hashable], "Estimate"]:
    """Monte Carlo two-point functions <sigma_a^k conj(sigma_b)^k>.

    Alternates heat-bath sweeps with reflection-cluster moves and reports
    batch-means errors plus effective sample sizes.  The random stream is
    named by (seed, 'spin', chain), so identical specs reproduce identical
    output, bit for bit.
    """
    rng = stream(spec.seed, "spin", spec.chain)
    state = SpinState(g, beta, rng)
    id_pairs = [(g.vertex_id(a), g.vertex_id(b)) for a, b in pairs]
    series = np.empty((spec.samples, len(pairs)))
    kept = 0
    sweep = 0
    while kept < spec.samples:
        state.heat_bath_sweep()
        for _ in range(clusters_per_sweep):
            state.reflection_cluster_step()
        sweep += 1
        if sweep > spec.burn_in and (sweep - spec.burn_in) % spec.thinning == 0:
            series[kept] = state.pair_cosines(id_pairs, k)
            kept += 1
    return {pair: batch_means(series[:, i]) for i, pair in enumerate(pairs)}


# ============================================================
# Height-space Monte Carlo
# ============================================================


@lru_cache(maxsize=200_000)
def _log_i(k: int, x: float) -> float:
    return log_bessel_i(k, x)


def _face_log_weight(g: PlanarGraph, h: Sequence[int], f: int, t: int, beta: float) -> float:
    total = 0.0
    for he in g.faces[f]:
        other = h[g.right_face(he)]
        total += _log_i(t - other, beta * g.coupling[he >> 1])
    return total


def _resample_face(
    g: PlanarGraph, h: list[int], f: int, beta: float, rng: np.random.Generator
) -> None:
    nbr = [h[g.right_face(he)] for he in g.faces[f]]
    lo = min(nbr)
    hi = max(nbr)
    # expand the window until the log-concave tails are negligible
    while True:
        lw_lo = _face_log_weight(g, h, f, lo, beta)
        lw_hi = _face_log_weight(g, h, f, hi, beta)
        peak = max(
            _face_log_weight(g, h, f, t, beta) for t in range(lo, hi + 1)
        )
        if lw_lo < peak - 40.0 and lw_hi < peak - 40.0:
            break
        lo -= 2
        hi += 2
    ts = list(range(lo, hi + 1))
    logw = np.array([_face_log_weight(g, h, f, t, beta) for t in ts])
    w = np.exp(logw - logw.max())
    w /= w.sum()
    h[f] = ts[int(rng.choice(len(ts), p=w))]


def height_chain(
    g: PlanarGraph,
    beta: float,
    *,
    sweeps: int,
    burn: int = 100,
    seed: int = 0,
    chain: int = 0,
) -> Iterator[list[int]]:
    """Single-face heat-bath chain for the integer height; yields each kept sweep.

    The outer face is pinned at zero.  Stream name: (seed, 'height', chain).
    """
    if beta <= 0:
        raise SamplerError("beta must be positive")
    rng = stream(seed, "height", chain)
    h = [0] * g.nf
    inner = g.inner_faces()
    for t in range(burn + sweeps):
        for f in inner:
            _resample_face(g, h, f, beta, rng)
        if t >= burn:
            yield list(h)


def sample_current(
    g: PlanarGraph, h: Sequence[int], beta: float, rng: np.random.Generator
) -> list[int]:
    """Random current consistent with a height function.

    The net flow across each edge is fixed by the height gradient; the
    common part of the oriented pair is a Y_{|net|}(beta*J) draw (the exact
    conditional), so the composite (height sweep + this augmentation) law
    is the sourceless current ensemble.
    """
    n = [0] * g.n_half
    for e in range(g.ne):
        d = h[g.face_of[2 * e]] - h[g.face_of[2 * e + 1]]
        common = sample_yk(abs(d), beta * g.coupling[e], rng)
        n[2 * e] = common + max(d, 0)
        n[2 * e + 1] = common + max(-d, 0)
    return n


# ============================================================
# Estimation helpers
# ============================================================


@dataclass(frozen=True)
class Estimate:
    """Mean with a batch-means standard error and an effective sample size."""

    mean: float
    se: float
    n: int
    ess: float

    def interval(self, width: float = 3.0) -> tuple[float, float]:
        return self.mean - width * self.se, self.mean + width * self.se


def batch_means(x: Sequence[float], n_batches: int = 32) -> Estimate:
    """Batch-means estimate; robust to autocorrelation at modest cost."""
    arr = np.asarray(x, dtype=float)
    n = arr.size
    if n < 2 * n_batches:
        n_batches = max(2, n // 2)
    m = n // n_batches
    trimmed = arr[: m * n_batches].reshape(n_batches, m)
    means = trimmed.mean(axis=1)
    se = means.std(ddof=1) / math.sqrt(n_batches)
    ess = min(float(n), ess_initial_positive(arr))
    return Estimate(mean=float(arr.mean()), se=float(se), n=n, ess=ess)


def ess_initial_positive(x: Sequence[float]) -> float:
    """Effective sample size from the initial positive sequence of the
    autocovariance (pairwise sums kept while positive)."""
    arr = np.asarray(x, dtype=float)
    n = arr.size
    if n < 4:
        return float(n)
    centred = arr - arr.mean()
    var = float(centred @ centred) / n
    if var == 0.0:
        return float(n)
    # autocovariances via FFT
    m = 1
    while m < 2 * n:
        m *= 2
    f = np.fft.rfft(centred, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n] / n
    rho = acov / acov[0]
    tau = 1.0
    t = 1
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        tau += 2.0 * pair
        t += 2
    return float(n / tau)
