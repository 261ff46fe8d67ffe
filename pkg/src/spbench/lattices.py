"""Lattice families: a quartic scalar field on a periodic square grid, and a
planar-rotor (XY) model with optional coupling disorder on cubic lattices.

Both expose analytic gradients and Hessians.  The quartic model decouples
site by site when the neighbor coupling J is zero, which permits exhaustive
enumeration of its stationary points and exact counting of complex roots; the
rotor model keeps a frustrated, highly degenerate landscape even at small
sizes and is the stress test for path-following solvers.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .core import (
    ANGULAR_MOD_2PI,
    EvaluationError,
    ProblemInstance,
    Provenance,
    classify,
    dedup,
)

PERIODIC = "periodic"
ANTI_PERIODIC = "anti-periodic"


def _fmt(x):
    return format(float(x), "g")


class Phi4Lattice(ProblemInstance):
    """Quartic on-site potential plus nearest-neighbor springs on an N x N
    periodic grid.

    Site value x contributes lam/4! * x^4 - mu2/2 * x^2, and each of the four
    neighbor slots contributes J/4 * (x - x_neighbor)^2.  Neighbor slots are a
    multiset: on a 2 x 2 grid the up and down neighbors coincide, and on a
    1 x 1 grid all four slots point back at the site itself, so the coupling
    term cancels from the gradient exactly.
    """

    family = "phi4"

    def __init__(self, N, lam=0.6, mu2=2.0, J=0.0, label=None):
        N = int(N)
        if N < 1:
            raise ValueError(f"grid side must be >= 1, got {N}")
        if label is None:
            label = f"phi4-N{N}-J{_fmt(J)}"
            if float(lam) != 0.6:
                label += f"-lam{_fmt(lam)}"
            if float(mu2) != 2.0:
                label += f"-mu2{_fmt(mu2)}"
        super().__init__(N * N, label)
        self.N = N
        self.lam = float(lam)
        self.mu2 = float(mu2)
        self.J = float(J)
        self.neighbors = self._neighbor_table(N)
        self._site_ids = np.repeat(np.arange(self.n), 4)

    @staticmethod
    def _neighbor_table(N):
        idx = np.arange(N * N).reshape(N, N)
        up = np.roll(idx, -1, axis=0)
        down = np.roll(idx, 1, axis=0)
        left = np.roll(idx, 1, axis=1)
        right = np.roll(idx, -1, axis=1)
        return np.stack([up.ravel(), down.ravel(), left.ravel(), right.ravel()], axis=1)

    def energy(self, p):
        x = self.check_point(p)
        onsite = np.sum(self.lam / 24.0 * x**4 - 0.5 * self.mu2 * x**2)
        spring = 0.25 * self.J * np.sum((x[:, None] - x[self.neighbors]) ** 2)
        return float(onsite + spring)

    def gradient(self, p):
        x = self.check_point(p)
        nb_sum = x[self.neighbors].sum(axis=1)
        return self.lam / 6.0 * x**3 + (4.0 * self.J - self.mu2) * x - self.J * nb_sum

    def hessian(self, p):
        x = self.check_point(p)
        h = np.zeros((self.n, self.n))
        diag = 0.5 * self.lam * x**2 + (4.0 * self.J - self.mu2)
        h[np.arange(self.n), np.arange(self.n)] = diag
        np.add.at(h, (self._site_ids, self.neighbors.ravel()), -self.J)
        return h

    def site_roots(self):
        """Roots of the decoupled single-site equation: 0 and +-sqrt(6 mu2/lam)."""
        r = math.sqrt(6.0 * self.mu2 / self.lam)
        return (0.0, r, -r)

    def params(self):
        return {"N": self.N, "lam": self.lam, "mu2": self.mu2, "J": self.J}

    def sample_start(self, rng):
        return rng.uniform(-6.0, 6.0, self.n)

    def grid_starts(self, values=(-5.0, 0.0, 5.0), cap=3**9):
        """Cartesian product of per-site start values, one start per combination."""
        total = len(values) ** self.n
        if total > cap:
            raise ValueError(f"grid of {total} starts exceeds cap {cap}")
        return [np.array(c, dtype=float) for c in itertools.product(values, repeat=self.n)]


def phi4_bezout(N):
    """Root count of the degree-3 stationarity system on the N x N grid,
    exact as an arbitrary-precision integer: 3 ** (N*N)."""
    N = int(N)
    if N < 1:
        raise ValueError(f"grid side must be >= 1, got {N}")
    return 3 ** (N * N)


def phi4_enumerate_decoupled(instance, cap=3**9):
    """Every real stationary point of a J = 0 instance, fully classified.

    With the springs off, each site independently sits at one of the three
    single-site roots, so the landscape is the Cartesian product of those
    choices and the saddle index equals the number of sites parked at zero.
    Raises if the coupling is nonzero or the enumeration would exceed ``cap``.
    """
    if instance.J != 0.0:
        raise ValueError(f"decoupled enumeration requires J = 0, got J = {instance.J}")
    total = 3**instance.n
    if total > cap:
        raise ValueError(f"enumeration of {total} points exceeds cap {cap}")
    roots = instance.site_roots()
    prov = Provenance(solver="enumeration", seed=0, start_id=0)
    points = [
        classify(instance, np.array(combo, dtype=float), provenance=prov)
        for combo in itertools.product(roots, repeat=instance.n)
    ]
    return dedup(points, tol=1e-6, metric=instance.dedup_metric)


_DISORDER_KINDS = ("constant", "uniform-signed", "uniform")


def _normalize_disorder(disorder):
    if isinstance(disorder, dict):
        d = dict(disorder)
    elif isinstance(disorder, (tuple, list)):
        kind = disorder[0]
        if kind == "constant":
            d = {"kind": "constant", "value": float(disorder[1])}
        elif kind == "uniform-signed":
            d = {"kind": "uniform-signed"}
        elif kind == "uniform":
            d = {"kind": "uniform", "low": float(disorder[1]), "high": float(disorder[2])}
        else:
            raise ValueError(f"unknown disorder kind {kind!r}")
    elif isinstance(disorder, str):
        d = {"kind": disorder}
    else:
        raise ValueError(f"cannot interpret disorder spec {disorder!r}")
    kind = d.get("kind")
    if kind not in _DISORDER_KINDS:
        raise ValueError(f"unknown disorder kind {kind!r}, expected one of {_DISORDER_KINDS}")
    if kind == "constant":
        d = {"kind": "constant", "value": float(d.get("value", 1.0))}
    elif kind == "uniform":
        d = {"kind": "uniform", "low": float(d["low"]), "high": float(d["high"])}
    else:
        d = {"kind": "uniform-signed"}
    return d


def _disorder_tag(d):
    if d["kind"] == "constant":
        return f"const{_fmt(d['value'])}"
    if d["kind"] == "uniform":
        return f"unif({_fmt(d['low'])},{_fmt(d['high'])})"
    return "signed"


class XYLattice(ProblemInstance):
    """Nearest-neighbor planar rotors on a d-dimensional cubic lattice of side
    L, with one coupling per edge.

    The energy sums 1 - J_e * cos(theta_a - theta_b) over the d * L^d edges
    (each site-to-site bond stored once).  Anti-periodic boundaries flip the
    sign of the coupling on wrap-around edges.  With periodic boundaries the
    energy is invariant under a global rotation of all angles; gauge fixing
    removes that freedom by pinning site 0 to angle zero, leaving L^d - 1
    free variables.  Angles are plain reals, never wrapped by the model.
    """

    family = "xy"
    dedup_metric = ANGULAR_MOD_2PI

    def __init__(self, d, L, bc=PERIODIC, disorder=("constant", 1.0), seed=0,
                 gauge_fixed=None, couplings=None, label=None):
        d = int(d)
        L = int(L)
        if d not in (1, 2, 3):
            raise ValueError(f"lattice dimension must be 1, 2 or 3, got {d}")
        if L < 2:
            raise ValueError(f"lattice side must be >= 2, got {L}")
        if bc not in (PERIODIC, ANTI_PERIODIC):
            raise ValueError(f"unknown boundary condition {bc!r}")
        if gauge_fixed is None:
            gauge_fixed = bc == PERIODIC
        if gauge_fixed and bc == ANTI_PERIODIC:
            raise ValueError("gauge fixing assumes the global-rotation symmetry of "
                             "periodic boundaries; disable it for anti-periodic runs")
        self.d = d
        self.L = L
        self.bc = bc
        self.seed = int(seed)
        self.gauge_fixed = bool(gauge_fixed)
        self.disorder = _normalize_disorder(disorder)
        self.sites = L**d
        edge_a, edge_b, wrap = self._edge_table(d, L)
        self.edge_a = edge_a
        self.edge_b = edge_b
        self.wrap = wrap
        if couplings is None:
            couplings = self._draw_couplings(len(edge_a))
        couplings = np.asarray(couplings, dtype=float)
        if couplings.shape != (len(edge_a),):
            raise ValueError(f"expected {len(edge_a)} couplings, got shape {couplings.shape}")
        self.couplings = couplings
        sign = np.where(wrap & (bc == ANTI_PERIODIC), -1.0, 1.0)
        self._j_eff = couplings * sign
        a, b, m = self.edge_a, self.edge_b, self.sites
        self._hess_idx = np.concatenate((a * m + a, b * m + b, a * m + b, b * m + a))
        if label is None:
            label = f"xy-d{d}-L{L}-{bc}-{_disorder_tag(self.disorder)}-s{self.seed}"
            if bc == PERIODIC and not self.gauge_fixed:
                label += "-nogauge"
        super().__init__(self.sites - (1 if self.gauge_fixed else 0), label)

    @staticmethod
    def _edge_table(d, L):
        shape = (L,) * d
        idx = np.arange(L**d).reshape(shape)
        edge_a, edge_b, wrap = [], [], []
        for axis in range(d):
            nb = np.roll(idx, -1, axis=axis)
            edge_a.append(idx.ravel())
            edge_b.append(nb.ravel())
            coord = np.indices(shape)[axis].ravel()
            wrap.append(coord == L - 1)
        return (np.concatenate(edge_a), np.concatenate(edge_b), np.concatenate(wrap))

    def _draw_couplings(self, n_edges):
        rng = np.random.default_rng(self.seed)
        d = self.disorder
        if d["kind"] == "constant":
            return np.full(n_edges, d["value"])
        if d["kind"] == "uniform-signed":
            return rng.integers(0, 2, n_edges) * 2.0 - 1.0
        return rng.uniform(d["low"], d["high"], n_edges)

    def full_angles(self, p):
        p = self.check_point(p)
        if self.gauge_fixed:
            theta = np.empty(self.sites)
            theta[0] = 0.0
            theta[1:] = p
            return theta
        return p

    def energy(self, p):
        theta = self.full_angles(p)
        delta = theta[self.edge_a] - theta[self.edge_b]
        return float(np.sum(1.0 - self._j_eff * np.cos(delta)))

    def gradient(self, p):
        theta = self.full_angles(p)
        delta = theta[self.edge_a] - theta[self.edge_b]
        s = self._j_eff * np.sin(delta)
        g = (np.bincount(self.edge_a, weights=s, minlength=self.sites)
             - np.bincount(self.edge_b, weights=s, minlength=self.sites))
        return g[1:] if self.gauge_fixed else g

    def hessian(self, p):
        theta = self.full_angles(p)
        delta = theta[self.edge_a] - theta[self.edge_b]
        c = self._j_eff * np.cos(delta)
        flat = np.bincount(self._hess_idx, weights=np.concatenate((c, c, -c, -c)),
                           minlength=self.sites * self.sites)
        h = flat.reshape(self.sites, self.sites)
        if self.gauge_fixed:
            return h[1:, 1:]
        return h

    @property
    def n_edges(self):
        return len(self.edge_a)

    def params(self):
        return {
            "d": self.d,
            "L": self.L,
            "bc": self.bc,
            "disorder": dict(self.disorder),
            "seed": self.seed,
            "gauge_fixed": self.gauge_fixed,
            "couplings": [float(v) for v in self.couplings],
        }

    def sample_start(self, rng):
        # pi - U[0, 2pi) lands in (-pi, pi]
        return np.pi - rng.uniform(0.0, 2.0 * np.pi, self.n)
