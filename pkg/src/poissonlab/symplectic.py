"""The symplectic groupoid ``T*G => g*``.

Points of ``Sigma = T*G`` are chart pairs ``(x, mu)``: ``g = g0 exp(sum x_i E_i)``
and ``mu`` the right-trivialized covector. The Liouville form is
``lambda(xdot, mudot) = <mu, J_R(x) xdot>`` and ``omega = d(lambda)`` is taken by
finite differences.

Sign conventions live here and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from poissonlab import groupoids as gp
from poissonlab import liealg
from poissonlab import matgroups as mg
from poissonlab import numcore as nc
from poissonlab import poisson as ps

#: ``<omega_flat(X), Y> = FLAT_SIGN * omega(X, Y)``
FLAT_SIGN = -1.0
#: ``w(x) = W_SIGN * iota_{T(1)x} omega`` restricted to ``A``
W_SIGN = -1.0
#: ``r = R_SIGN * w^*``
R_SIGN = -1.0


@dataclass(frozen=True, eq=False)
class CotangentPhaseChart:
    group: mg.MatrixLieGroup
    h: float = nc.DEFAULT_STEP

    @property
    def n(self) -> int:
        return self.group.dim

    @property
    def dim(self) -> int:
        return 2 * self.n

    def split(self, point):
        point = np.asarray(point, dtype=float)
        return point[: self.n], point[self.n :]

    def liouville_form(self, point) -> np.ndarray:
        """Components of ``lambda`` at ``(x, mu)``: ``(J_R(x)^T mu, 0)``."""
        x, mu = self.split(nc.real(point))
        return np.concatenate([self.group.right_jacobian(x).T @ mu, np.zeros(self.n)])

    def omega_matrix(self, point) -> np.ndarray:
        """``Omega`` with ``omega(V, W) = V @ Omega @ W``, from ``d(lambda)``."""
        return nc.exterior_d1_matrix(self.liouville_form, point, self.h)

    def omega_closed_form(self, point, sign: float = 1.0) -> np.ndarray:
        """Right-trivialized candidate, ``X = J_R xdot``:

        ``sign * (<mudot1, X2> - <mudot2, X1> + <mu, [X1, X2]>)``.
        """
        x, mu = self.split(point)
        n = self.n
        jr = self.group.right_jacobian(x)
        cmu = np.tensordot(mu, self.group.algebra.constants, axes=1)
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = jr.T @ cmu @ jr
        out[n:, :n] = jr
        out[:n, n:] = -jr.T
        return sign * out

    def flat_matrix(self, point) -> np.ndarray:
        """Matrix of ``omega_flat``: ``<flat V, Y> = FLAT_SIGN * V @ Omega @ Y``."""
        return FLAT_SIGN * self.omega_matrix(point).T

    def poisson_matrix(self, point) -> np.ndarray:
        """Bivector of ``{f1, f2} = omega(df1#, df2#)`` with ``#`` the inverse of ``omega_flat``."""
        om = self.omega_matrix(point)
        s = np.linalg.inv(FLAT_SIGN * om.T)
        return s.T @ om @ s

    def poisson_structure(self) -> ps.PoissonStructure:
        return ps.PoissonStructure(nc.Chart(self.dim, f"T*{self.group.name}"), self.poisson_matrix, f"omega-bracket T*{self.group.name}")


# ---------------------------------------------------------------------------
# Pointwise operations
# ---------------------------------------------------------------------------


def liouville(chart: CotangentPhaseChart, point, tangent) -> float:
    return float(chart.liouville_form(point) @ np.asarray(tangent, dtype=float))


def omega(chart: CotangentPhaseChart, point, v, w) -> float:
    return nc.exterior_d1(chart.liouville_form, point, v, w, chart.h)


def omega_flat(chart: CotangentPhaseChart, point, v) -> np.ndarray:
    return chart.flat_matrix(point) @ np.asarray(v, dtype=float)


def omega_sharp(chart: CotangentPhaseChart, point, covec) -> np.ndarray:
    return nc.solve(chart.flat_matrix(point), np.asarray(covec, dtype=float))


def closedness_residual(chart: CotangentPhaseChart, rng: np.random.Generator, count: int, h_outer: float = 1e-4) -> float:
    """``d(omega)(u, v, w)`` at sampled points with random constant vectors."""
    worst = 0.0
    inst = gp.CotangentGroupGroupoid(chart.group)
    for _ in range(count):
        p = inst.sample_arrow(rng)
        u, v, w = rng.uniform(-1, 1, (3, chart.dim))

        def om(a, b):
            return lambda y: a @ chart.omega_matrix(y) @ b

        val = (
            nc.diff_directional(om(v, w), p, u, nc.CENTRAL, h_outer)
            + nc.diff_directional(om(w, u), p, v, nc.CENTRAL, h_outer)
            + nc.diff_directional(om(u, v), p, w, nc.CENTRAL, h_outer)
        )
        worst = max(worst, abs(val))
    return worst


def closed_form_residual(chart: CotangentPhaseChart, rng: np.random.Generator, count: int, sign: float = 1.0) -> float:
    inst = gp.CotangentGroupGroupoid(chart.group)
    worst = 0.0
    for _ in range(count):
        p = inst.sample_arrow(rng)
        worst = max(worst, float(np.max(np.abs(chart.omega_matrix(p) - chart.omega_closed_form(p, sign)))))
    return worst


# ---------------------------------------------------------------------------
# Lagrangian graph and friends
# ---------------------------------------------------------------------------


@dataclass
class Setting:
    """``T*G`` as groupoid, phase chart, and its cotangent lift."""

    group: mg.MatrixLieGroup
    inst: gp.CotangentGroupGroupoid
    chart: CotangentPhaseChart

    @classmethod
    def of(cls, group: mg.MatrixLieGroup, h: float = nc.DEFAULT_STEP) -> "Setting":
        return cls(group, gp.CotangentGroupGroupoid(group), CotangentPhaseChart(group, h))


def dimension_identities(group: mg.MatrixLieGroup) -> dict[str, int]:
    """Exact bookkeeping: ``dim P = dim Sigma / 2`` and ``dim Gr = 2 dim Sigma - dim P = 3 dim Sigma / 2``."""
    inst = gp.CotangentGroupGroupoid(group)
    sigma, p = inst.arrow_dim, inst.base_dim
    graph = 2 * sigma - p
    return {
        "dim-sigma": sigma,
        "dim-base": p,
        "dim-graph": graph,
        "defect": abs(2 * p - sigma) + abs(2 * graph - 3 * sigma),
    }


def graph_isotropy_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """``-omega(eta1.xi1, eta2.xi2) + omega(eta1, eta2) + omega(xi1, xi2)`` over sampled quadruples."""
    s = Setting.of(group, h)
    worst = 0.0
    for _ in range(count):
        a_h, a_g = s.inst.sample_composable(rng, 2)
        (_, e1), (_, x1) = gp.composable_tangents(s.inst, rng, a_h, a_g)
        (_, e2), (_, x2) = gp.composable_tangents(s.inst, rng, a_h, a_g)
        hg, p1 = gp.tangent_mul(s.inst, (a_h, e1), (a_g, x1))
        _, p2 = gp.tangent_mul(s.inst, (a_h, e2), (a_g, x2))
        val = -(p1 @ s.chart.omega_matrix(hg) @ p2) + e1 @ s.chart.omega_matrix(a_h) @ e2 + x1 @ s.chart.omega_matrix(a_g) @ x2
        worst = max(worst, abs(float(val)))
    return worst


def identity_lagrangian_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """``omega(T(1)x1, T(1)x2)`` on the identity section."""
    s = Setting.of(group, h)
    worst = 0.0
    for _ in range(count):
        m = rng.uniform(-1, 1, group.dim)
        t1 = gp.identity_map(s.inst, m)
        om = s.chart.omega_matrix(np.asarray(s.inst.identity(m), dtype=float))
        x1, x2 = rng.uniform(-1, 1, (2, group.dim))
        worst = max(worst, abs(float((t1 @ x1) @ om @ (t1 @ x2))))
    return worst


def inversion_antisymplectic_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """``omega(xi1^-1, xi2^-1) + omega(xi1, xi2)`` at sampled arrows."""
    s = Setting.of(group, h)
    worst = 0.0
    for _ in range(count):
        g = s.inst.sample_arrow(rng)
        v1, v2 = rng.uniform(-1, 1, (2, s.inst.arrow_dim))
        ginv, w1 = gp.tangent_inverse(s.inst, (g, v1))
        _, w2 = gp.tangent_inverse(s.inst, (g, v2))
        val = w1 @ s.chart.omega_matrix(ginv) @ w2 + v1 @ s.chart.omega_matrix(g) @ v2
        worst = max(worst, abs(float(val)))
    return worst


def orthogonality_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """``omega(xi, eta)`` for ``T(alpha) xi = 0`` and ``T(beta) eta = 0``."""
    s = Setting.of(group, h)
    worst = 0.0
    for _ in range(count):
        g = s.inst.sample_arrow(rng)
        xi = gp._kernel_vector(gp.source_map(s.inst, g), rng)
        eta = gp._kernel_vector(gp.target_map(s.inst, g), rng)
        worst = max(worst, abs(float(xi @ s.chart.omega_matrix(g) @ eta)))
    return worst


# ---------------------------------------------------------------------------
# w, r and the induced structure on the base
# ---------------------------------------------------------------------------


def w_matrix(s: Setting, m) -> np.ndarray:
    """``W`` (rank x base_dim) with ``w(mdot)_i = W_SIGN * omega(T(1) mdot, X_i)``."""
    m = np.asarray(m, dtype=float)
    e = np.asarray(s.inst.identity(m), dtype=float)
    t1 = gp.identity_map(s.inst, m)
    basis = gp.a_basis(s.inst, m)
    om = s.chart.omega_matrix(e)
    return W_SIGN * (t1.T @ om @ basis).T


def base_map_w(group: mg.MatrixLieGroup, m, mdot, h: float = nc.DEFAULT_STEP) -> np.ndarray:
    """Covector on the ``A``-frame at ``m``: ``Y -> -omega(T(1) mdot, Y)``."""
    return w_matrix(Setting.of(group, h), m) @ np.asarray(mdot, dtype=float)


def r_matrix(s: Setting, m) -> np.ndarray:
    """``r = -w^* : A -> T*P`` (base_dim x rank)."""
    return R_SIGN * w_matrix(s, m).T


def induced_sharp(s: Setting, m) -> np.ndarray:
    """``pi# = a o r^-1`` at ``m`` as a matrix acting on covectors."""
    m = np.asarray(m, dtype=float)
    rmat = r_matrix(s, m)
    amat = gp.anchor_matrix(s.inst, m)
    return amat @ np.linalg.inv(rmat)


def induced_structure(group: mg.MatrixLieGroup, h: float = nc.DEFAULT_STEP) -> ps.PoissonStructure:
    """Base structure with ``pi# = a o r^-1`` (so ``pi = (a o r^-1)^T``)."""
    s = Setting.of(group, h)
    return ps.PoissonStructure(nc.Chart(group.dim, f"{group.name} base"), lambda m: induced_sharp(s, nc.real(m)).T, f"induced {group.name}")


@dataclass
class InducedResiduals:
    vs_lie_poisson: float
    skewness: float
    beta_poisson_map: float

    def as_dict(self) -> dict[str, float]:
        return {"vs-lie-poisson": self.vs_lie_poisson, "skewness": self.skewness, "beta-poisson-map": self.beta_poisson_map}


def induced_base_poisson_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP, map_count: int | None = None) -> InducedResiduals:
    """Compare ``a o r^-1`` with the Lie-Poisson structure of the algebroid's algebra
    (right-invariant fields), check skewness, and check that ``beta`` is Poisson."""
    s = Setting.of(group, h)
    lp = ps.lie_poisson(group.right_invariant_algebra())
    vs = skew = 0.0
    for _ in range(count):
        m = rng.uniform(-1, 1, group.dim)
        sharp = induced_sharp(s, m)
        vs = max(vs, float(np.max(np.abs(sharp.T - lp.matrix(m)))))
        psi, phi = rng.uniform(-1, 1, (2, group.dim))
        skew = max(skew, abs(float(phi @ (sharp.T + sharp) @ psi)))
    base = induced_structure(group, h)
    sigma = s.chart.poisson_structure()
    fns = nc.test_functions(base.chart, rng, 1)
    pts = [s.inst.sample_arrow(rng) for _ in range(count if map_count is None else map_count)]
    pm = ps.poisson_map_residual(lambda y: np.asarray(s.inst.target(y), dtype=float), sigma, base, fns, pts, h)
    return InducedResiduals(vs, skew, pm)


def basic_identity_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """``omega_flat(->X)(g) = T(beta)^T r(X)`` for right-invariant extensions of ``A``-vectors."""
    s = Setting.of(group, h)
    worst = 0.0
    for _ in range(count):
        g = s.inst.sample_arrow(rng)
        m = np.asarray(s.inst.target(g), dtype=float)
        c = rng.uniform(-1, 1, group.dim)
        field = gp.right_invariant(s.inst, lambda _m: c)(g)
        lhs = s.chart.flat_matrix(g) @ field
        rhs = gp.target_map(s.inst, g).T @ (r_matrix(s, m) @ c)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# ---------------------------------------------------------------------------
# omega_flat as a groupoid morphism
# ---------------------------------------------------------------------------


def omega_flat_morphism_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> dict[str, float]:
    """``flat(eta.xi) = flat(eta).flat(xi)``, ``beta~ o flat = w o T(beta)``, ``alpha~ o flat = w o T(alpha)``."""
    s = Setting.of(group, h)
    CT = gp.CotangentLiftGroupoid(s.inst)
    res = {"multiply": 0.0, "target": 0.0, "source": 0.0}
    for _ in range(count):
        (a_h, e), (a_g, x) = gp.composable_tangents(s.inst, rng)
        hg, ex = gp.tangent_mul(s.inst, (a_h, e), (a_g, x))
        flat_e = np.concatenate([a_h, s.chart.flat_matrix(a_h) @ e])
        flat_x = np.concatenate([a_g, s.chart.flat_matrix(a_g) @ x])
        flat_ex = np.concatenate([hg, s.chart.flat_matrix(hg) @ ex])
        res["multiply"] = max(res["multiply"], gp._dist(gp.cotangent_mul(CT, flat_e, flat_x), flat_ex))
        for key, fn, arrow, vel, cov in (("target", s.inst.target, a_g, x, flat_x), ("source", s.inst.source, a_g, x, flat_x)):
            m, mdot = gp.push(fn, arrow, vel)
            expected = np.concatenate([m, w_matrix(s, m) @ mdot])
            got = CT.target(cov) if key == "target" else CT.source(cov)
            res[key] = max(res[key], gp._dist(got, expected))
    return res


# ---------------------------------------------------------------------------
# Tangent lift and the dual of the algebroid
# ---------------------------------------------------------------------------


def dual_algebroid_structure(group: mg.MatrixLieGroup, h: float = nc.DEFAULT_STEP) -> ps.PoissonStructure:
    """Linear Poisson structure on ``A*Sigma`` in coordinates ``(m, xi)`` built from the extracted algebroid:

    ``{xi_i, xi_j} = c^k_ij(m) xi_k``, ``{xi_i, m_l} = a(X_i)^l``, ``{m_l, m_k} = 0``.
    """
    inst = gp.CotangentGroupGroupoid(group)
    d = inst.base_dim
    r = inst.arrow_dim - d

    def pi_fn(y):
        y = np.asarray(nc.real(y), dtype=float)
        m, xi = y[:d], y[d:]
        data = gp.algebroid_extract(inst, m, h)
        out = np.zeros((d + r, d + r))
        out[d:, d:] = np.tensordot(xi, data.bracket, axes=1)
        out[d:, :d] = data.anchor.T
        out[:d, d:] = -data.anchor
        return out

    return ps.PoissonStructure(nc.Chart(d + r, f"A*T*{group.name}"), pi_fn, f"dual-algebroid T*{group.name}")


def tangent_lift_poisson_map_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """``-w : TP -> A*Sigma`` is Poisson from the tangent lift of the base structure."""
    s = Setting.of(group, h)
    base = ps.lie_poisson(group.right_invariant_algebra())
    lift = ps.tangent_lift(base, rng)
    target = dual_algebroid_structure(group, h)
    n = group.dim

    def minus_w(y):
        m, mdot = y[:n], y[n:]
        return np.concatenate([m, -(w_matrix(s, m) @ mdot)])

    fns = nc.test_functions(target.chart, rng, 1)
    pts = rng.uniform(-1, 1, (count, 2 * n))
    return ps.poisson_map_residual(minus_w, lift, target, fns, pts, h)


def minus_w_linearity_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, h: float = nc.DEFAULT_STEP) -> float:
    s = Setting.of(group, h)
    m = rng.uniform(-1, 1, group.dim)
    wm = w_matrix(s, m)
    u, v = rng.uniform(-1, 1, (2, group.dim))
    a, b = rng.uniform(-2, 2, 2)
    return float(np.max(np.abs(wm @ (a * u + b * v) - (a * (wm @ u) + b * (wm @ v)))))


# ---------------------------------------------------------------------------
# Poisson groupoid conditions
# ---------------------------------------------------------------------------


def multiplication_graph(inst: gp.GroupoidInstance) -> ps.Submanifold:
    """``{(hg, h, g)}`` inside ``Sigma x Sigma x Sigma``, chart order ``(z, y, x)``."""
    N, d = inst.arrow_dim, inst.base_dim
    chart = nc.Chart(3 * N, f"graph {inst.name}")

    def comp(k):
        return nc.ScalarField(chart, lambda p: inst.source(p[N : 2 * N])[k] - inst.target(p[2 * N :])[k])

    def prod(k):
        def fn(p):
            y = inst.adjust_source(p[N : 2 * N], inst.target(p[2 * N :]))
            return p[k] - inst.multiply(y, p[2 * N :])[k]

        return nc.ScalarField(chart, fn)

    def stacked(p):
        y, x = p[N : 2 * N], p[2 * N :]
        tx = inst.target(x)
        return nc.concat([inst.source(y) - tx, p[:N] - inst.multiply(inst.adjust_source(y, tx), x)])

    return ps.Submanifold(chart, tuple([comp(k) for k in range(d)] + [prod(k) for k in range(N)]), nc.DUAL, stacked)


def pg_coisotropy_suite(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> dict[str, float]:
    """Poisson-groupoid conditions for ``T*G`` with the bracket derived from ``omega``."""
    s = Setting.of(group, h)
    sigma = s.chart.poisson_structure()
    total = ps.product_structure(ps.reversed_structure(sigma), sigma, sigma)
    graph = multiplication_graph(s.inst)
    CT = gp.CotangentLiftGroupoid(s.inst)
    n = group.dim

    def sharp(a):
        g, cov = a[: 2 * n], a[2 * n :]
        return g, sigma.matrix(g).T @ cov

    res = {"graph-coisotropy": 0.0, "morphism": 0.0, "base-map": 0.0}
    for _ in range(count):
        a_h, a_g = s.inst.sample_composable(rng, 2)
        point = np.concatenate([s.inst.compose(a_h, a_g), a_h, a_g])
        res["graph-coisotropy"] = max(res["graph-coisotropy"], ps.coisotropy_residual(graph, total, [point]))

        psi, phi = CT.sample_composable(rng, 2)
        prod = gp.cotangent_mul(CT, psi, phi)
        _, lhs = sharp(prod)
        _, rhs = gp.tangent_mul(s.inst, sharp(psi), sharp(phi))
        res["morphism"] = max(res["morphism"], gp._dist(lhs, rhs))

        m = rng.uniform(-1, 1, n)
        phi_a = rng.uniform(-1, 1, n)
        unit = CT.identity(np.concatenate([m, phi_a]))
        e, v = sharp(unit)
        t1 = gp.identity_map(s.inst, m)
        b = gp.target_map(s.inst, e) @ v
        res["base-map"] = max(res["base-map"], gp._dist(v, t1 @ b), gp._dist(gp.source_map(s.inst, e) @ v, b))
    return res
