"""Lie groupoids through a uniform chart interface.

Arrows and base points are flat coordinate arrays. The structure maps of the
concrete instances accept :class:`~poissonlab.numcore.Dual` arrays, so every
tangent map ``T(alpha)``, ``T(beta)``, ``T(1)``, ``T(kappa)`` is computed
exactly by pushing a dual number through the map.

Conventions: ``multiply(h, g)`` is ``h g`` and needs ``source(h) == target(g)``.
A tangent vector is a pair ``(point, velocity)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from poissonlab import liealg
from poissonlab import matgroups as mg
from poissonlab import numcore as nc
from poissonlab.errors import ComposabilityError, RankDeficiencyError

EXACT_TOL = 1e-9
LIFTED_TOL = 1e-6
SAMPLE_RADIUS = 0.15
RANK_TOL = 1e-8


def push(fn: Callable, point, velocity) -> tuple[np.ndarray, np.ndarray]:
    """``(fn(point), T(fn)(velocity))`` by one dual evaluation."""
    out = fn(nc.Dual(np.asarray(point, dtype=float), np.asarray(velocity, dtype=float)))
    return np.asarray(nc.real(out), dtype=float), np.asarray(nc.tangent(out), dtype=float)


def tangent_map(fn: Callable, point, size_in: int | None = None) -> np.ndarray:
    """Jacobian matrix of ``fn`` at ``point`` (columns are images of coordinate vectors)."""
    point = np.asarray(point, dtype=float)
    return nc.jacobian(fn, point, nc.DUAL)


# ---------------------------------------------------------------------------
# Interface
# ---------------------------------------------------------------------------


class GroupoidInstance:
    """Base class. Subclasses implement the raw structure maps."""

    name: str = "groupoid"
    arrow_dim: int
    base_dim: int
    tol: float = EXACT_TOL

    # raw structure maps (dual-aware for concrete instances) -----------------
    def source(self, a):
        raise NotImplementedError

    def target(self, a):
        raise NotImplementedError

    def identity(self, m):
        raise NotImplementedError

    def multiply(self, h, g):
        raise NotImplementedError

    def inverse(self, g):
        raise NotImplementedError

    def adjust_source(self, a, m):
        """An arrow near ``a`` with source ``m``; smooth in ``(a, m)``, the identity when ``source(a) = m``."""
        raise NotImplementedError

    def sample_arrow(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def sample_base(self, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.source(self.sample_arrow(rng)), dtype=float)

    # checked operations --------------------------------------------------------
    def composability_defect(self, h, g) -> float:
        d = np.asarray(nc.real(self.source(h))) - np.asarray(nc.real(self.target(g)))
        return float(np.max(np.abs(d))) if d.size else 0.0

    def compose(self, h, g) -> np.ndarray:
        defect = self.composability_defect(h, g)
        if defect > self.tol:
            raise ComposabilityError(f"{self.name}: source(h) != target(g) (defect {defect:.2e})")
        return np.asarray(self.multiply(h, g), dtype=float)

    def sample_composable(self, rng: np.random.Generator, count: int = 2) -> list[np.ndarray]:
        """Arrows ``[a_k, ..., a_1]`` with ``source(a_{i+1}) = target(a_i)``."""
        chain = [np.asarray(self.sample_arrow(rng), dtype=float)]
        for _ in range(count - 1):
            nxt = self.adjust_source(self.sample_arrow(rng), np.asarray(nc.real(self.target(chain[-1]))))
            chain.append(np.asarray(nc.real(nxt), dtype=float))
        return chain[::-1]

    def describe(self) -> str:
        return f"{self.name}: arrows of dim {self.arrow_dim} over a base of dim {self.base_dim}"


# ---------------------------------------------------------------------------
# Concrete instances
# ---------------------------------------------------------------------------


class PairGroupoid(GroupoidInstance):
    """Arrows ``(n, m)`` from ``m`` to ``n``."""

    def __init__(self, n: int):
        self.n = n
        self.name = f"pair({n})"
        self.arrow_dim = 2 * n
        self.base_dim = n

    def source(self, a):
        return a[self.n :]

    def target(self, a):
        return a[: self.n]

    def identity(self, m):
        return nc.concat([m, m])

    def multiply(self, h, g):
        return nc.concat([h[: self.n], g[self.n :]])

    def inverse(self, g):
        return nc.concat([g[self.n :], g[: self.n]])

    def adjust_source(self, a, m):
        return nc.concat([a[: self.n], m])

    def sample_arrow(self, rng):
        return rng.uniform(-1, 1, self.arrow_dim)


class _GroupChartMixin:
    group: mg.MatrixLieGroup
    radius: float

    def _mul(self, y, x):
        return self.group.chart_inv(self.group.chart(y) @ self.group.chart(x))

    def _inv(self, x):
        return self.group.chart_inv(nc.inv(self.group.chart(x)))

    def _unit(self):
        return self.group.identity_coords()

    def _coords(self, rng):
        return self.group.random_coords(rng, self.radius)


class GroupAsGroupoid(_GroupChartMixin, GroupoidInstance):
    """A Lie group as a groupoid over a point (base of dimension 0)."""

    def __init__(self, group: mg.MatrixLieGroup, radius: float = SAMPLE_RADIUS):
        self.group = group
        self.radius = radius
        self.name = f"group({group.name})"
        self.arrow_dim = group.dim
        self.base_dim = 0

    def source(self, a):
        return np.zeros(0)

    target = source

    def identity(self, m):
        return self._unit()

    def multiply(self, h, g):
        return self._mul(h, g)

    def inverse(self, g):
        return self._inv(g)

    def adjust_source(self, a, m):
        return a

    def sample_arrow(self, rng):
        return self._coords(rng)


class ActionGroupoid(_GroupChartMixin, GroupoidInstance):
    """``G x M`` with arrows ``(g, m) : m -> g.m`` (coadjoint action on ``g*`` or linear action on ``R^size``)."""

    def __init__(self, group: mg.MatrixLieGroup, action: str = "coadjoint", radius: float = SAMPLE_RADIUS):
        if action not in ("coadjoint", "linear"):
            raise ValueError(f"unknown action {action!r}")
        self.group = group
        self.action = action
        self.radius = radius
        self.n = group.dim
        self.base_dim = group.dim if action == "coadjoint" else group.size
        self.arrow_dim = self.n + self.base_dim
        self.name = f"action({group.name}, {action})"

    def act(self, x, m):
        g = self.group.chart(x)
        if self.action == "coadjoint":
            return self.group.ad_matrix(nc.inv(g)).T @ m
        return g @ m

    def source(self, a):
        return a[self.n :]

    def target(self, a):
        return self.act(a[: self.n], a[self.n :])

    def identity(self, m):
        return nc.concat([self._unit(), m])

    def multiply(self, h, g):
        return nc.concat([self._mul(h[: self.n], g[: self.n]), g[self.n :]])

    def inverse(self, g):
        return nc.concat([self._inv(g[: self.n]), self.target(g)])

    def adjust_source(self, a, m):
        return nc.concat([a[: self.n], m])

    def sample_arrow(self, rng):
        return np.concatenate([self._coords(rng), rng.uniform(-1, 1, self.base_dim)])


class CotangentGroupGroupoid(_GroupChartMixin, GroupoidInstance):
    """``T*G => g*`` in right-trivialized coordinates ``(x, mu)``.

    ``target = mu``, ``source = Ad(g)^T mu``, ``(h, nu)(g, mu) = (hg, nu)`` and
    ``(g, mu)^-1 = (g^-1, Ad(g)^T mu)``.
    """

    def __init__(self, group: mg.MatrixLieGroup, radius: float = SAMPLE_RADIUS):
        self.group = group
        self.radius = radius
        self.n = group.dim
        self.arrow_dim = 2 * self.n
        self.base_dim = self.n
        self.name = f"cotangent-group({group.name})"

    def _ad_t(self, x, mu):
        return self.group.ad_matrix(self.group.chart(x)).T @ mu

    def source(self, a):
        return self._ad_t(a[: self.n], a[self.n :])

    def target(self, a):
        return a[self.n :]

    def identity(self, m):
        return nc.concat([self._unit(), m])

    def multiply(self, h, g):
        return nc.concat([self._mul(h[: self.n], g[: self.n]), h[self.n :]])

    def inverse(self, g):
        return nc.concat([self._inv(g[: self.n]), self.source(g)])

    def adjust_source(self, a, m):
        x = a[: self.n]
        nu = self.group.ad_matrix(nc.inv(self.group.chart(x))).T @ m
        return nc.concat([x, nu])

    def sample_arrow(self, rng):
        return np.concatenate([self._coords(rng), rng.uniform(-1, 1, self.n)])


# ---------------------------------------------------------------------------
# Tangent calculus on a groupoid
# ---------------------------------------------------------------------------


def tangent_mul(G: GroupoidInstance, eta, xi, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``eta . xi = T(kappa)(eta, xi)`` for ``eta`` at ``h`` and ``xi`` at ``g``.

    The curve ``g + t gdot`` is paired with ``adjust_source(h + t hdot, beta(g + t gdot))``,
    which stays composable for all ``t`` and has velocity ``hdot`` at ``t = 0``
    because ``T(alpha)(hdot) = T(beta)(gdot)``.
    """
    h, hdot = (np.asarray(v, dtype=float) for v in eta)
    g, gdot = (np.asarray(v, dtype=float) for v in xi)
    tol = LIFTED_TOL if tol is None else tol
    if G.composability_defect(h, g) > max(tol, G.tol):
        raise ComposabilityError(f"{G.name}: base arrows are not composable")
    _, sa = push(G.source, h, hdot)
    _, tb = push(G.target, g, gdot)
    if sa.size and np.max(np.abs(sa - tb)) > tol * max(1.0, np.max(np.abs(tb))):
        raise ComposabilityError(f"{G.name}: T(alpha)(eta) != T(beta)(xi) (defect {np.max(np.abs(sa - tb)):.2e})")
    g_t = nc.Dual(g, gdot)
    h_t = G.adjust_source(nc.Dual(h, hdot), G.target(g_t))
    out = G.multiply(h_t, g_t)
    return np.asarray(nc.real(out), dtype=float), np.asarray(nc.tangent(out), dtype=float)


def tangent_inverse(G: GroupoidInstance, xi) -> tuple[np.ndarray, np.ndarray]:
    return push(G.inverse, *xi)


def tangent_with_source(G: GroupoidInstance, a, adot, mdot) -> np.ndarray:
    """Correct ``adot`` at ``a`` so that ``T(alpha)`` of the result is ``mdot``."""
    a = np.asarray(a, dtype=float)
    m = np.asarray(nc.real(G.source(a)), dtype=float)
    out = G.adjust_source(nc.Dual(a, np.asarray(adot, dtype=float)), nc.Dual(m, np.asarray(mdot, dtype=float)))
    return np.asarray(nc.tangent(out), dtype=float)


def zero(a) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    return a, np.zeros_like(a)


def source_map(G: GroupoidInstance, a) -> np.ndarray:
    """``T(alpha)`` at ``a`` as a matrix."""
    return tangent_map(G.source, a)


def target_map(G: GroupoidInstance, a) -> np.ndarray:
    return tangent_map(G.target, a)


def identity_map(G: GroupoidInstance, m) -> np.ndarray:
    """``T(1)`` at ``m`` as a matrix (``arrow_dim x base_dim``)."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return np.zeros((G.arrow_dim, 0))
    return tangent_map(G.identity, m)


def inverse_map(G: GroupoidInstance, a) -> np.ndarray:
    return tangent_map(G.inverse, a)


class TangentLiftGroupoid(GroupoidInstance):
    """``TG => TM``: arrows ``(a, adot)``, base ``(m, mdot)``; every map is a chart derivative."""

    tol = LIFTED_TOL

    def __init__(self, parent: GroupoidInstance):
        self.parent = parent
        self.N = parent.arrow_dim
        self.d = parent.base_dim
        self.arrow_dim = 2 * self.N
        self.base_dim = 2 * self.d
        self.name = f"tangent-lift({parent.name})"

    def _split(self, a):
        a = np.asarray(nc.real(a), dtype=float)
        return a[: self.N], a[self.N :]

    def _push(self, fn, a):
        p, v = self._split(a)
        return np.concatenate(push(fn, p, v))

    def source(self, a):
        return self._push(self.parent.source, a)

    def target(self, a):
        return self._push(self.parent.target, a)

    def identity(self, m):
        m = np.asarray(nc.real(m), dtype=float)
        p, v = m[: self.d], m[self.d :]
        return np.concatenate([np.asarray(nc.real(self.parent.identity(p))), identity_map(self.parent, p) @ v])

    def multiply(self, h, g):
        return np.concatenate(tangent_mul(self.parent, self._split(h), self._split(g)))

    def inverse(self, g):
        return self._push(self.parent.inverse, g)

    def adjust_source(self, a, m):
        p, v = self._split(a)
        m = np.asarray(nc.real(m), dtype=float)
        out = self.parent.adjust_source(nc.Dual(p, v), nc.Dual(m[: self.d], m[self.d :]))
        return np.concatenate([nc.real(out), nc.tangent(out)])

    def sample_arrow(self, rng):
        return np.concatenate([self.parent.sample_arrow(rng), rng.uniform(-1, 1, self.N)])


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _dist(a, b) -> float:
    a = np.asarray(nc.real(a), dtype=float)
    b = np.asarray(nc.real(b), dtype=float)
    return float(np.max(np.abs(a - b))) if a.size else 0.0


AXIOMS = (
    "associativity",
    "left-identity",
    "right-identity",
    "left-inverse",
    "right-inverse",
    "target-of-product",
    "source-of-product",
)


def axiom_residuals(G: GroupoidInstance, rng: np.random.Generator, count: int) -> dict[str, float]:
    """Max residuals of the groupoid axioms over ``count`` sampled composable triples."""
    res = dict.fromkeys(AXIOMS, 0.0)

    def bump(key, value):
        res[key] = max(res[key], value)

    for _ in range(count):
        h, g, f = G.sample_composable(rng, 3)
        hg = G.compose(h, g)
        gf = G.compose(g, f)
        bump("associativity", _dist(G.compose(hg, f), G.compose(h, gf)))
        bump("left-identity", _dist(G.compose(G.identity(G.target(g)), g), g))
        bump("right-identity", _dist(G.compose(g, G.identity(G.source(g))), g))
        ginv = np.asarray(G.inverse(g), dtype=float)
        bump("left-inverse", _dist(G.compose(ginv, g), G.identity(G.source(g))))
        bump("right-inverse", _dist(G.compose(g, ginv), G.identity(G.target(g))))
        bump("target-of-product", _dist(G.target(hg), G.target(h)))
        bump("source-of-product", _dist(G.source(hg), G.source(g)))
    return res


def random_tangent(G: GroupoidInstance, a, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return scale * rng.uniform(-1, 1, G.arrow_dim)


def composable_tangents(G: GroupoidInstance, rng: np.random.Generator, h=None, g=None):
    """``(eta, xi)`` with ``T(alpha)(eta) = T(beta)(xi)``; arrows sampled when not given."""
    if h is None or g is None:
        h, g = G.sample_composable(rng, 2)
    gdot = random_tangent(G, g, rng)
    _, tb = push(G.target, g, gdot)
    hdot = tangent_with_source(G, h, random_tangent(G, h, rng), tb)
    return (h, hdot), (g, gdot)


def interchange_residual(G: GroupoidInstance, rng: np.random.Generator, count: int) -> float:
    """``(xi4 + xi3).(xi2 + xi1) = xi4.xi2 + xi3.xi1`` over sampled quadruples."""
    worst = 0.0
    for _ in range(count):
        h, g = G.sample_composable(rng, 2)
        v1, v2 = random_tangent(G, g, rng), random_tangent(G, g, rng)
        v3 = tangent_with_source(G, h, random_tangent(G, h, rng), push(G.target, g, v1)[1])
        v4 = tangent_with_source(G, h, random_tangent(G, h, rng), push(G.target, g, v2)[1])
        _, lhs = tangent_mul(G, (h, v4 + v3), (g, v2 + v1))
        _, a = tangent_mul(G, (h, v4), (g, v2))
        _, b = tangent_mul(G, (h, v3), (g, v1))
        worst = max(worst, _dist(lhs, a + b))
    return worst


def translation_residual(G: GroupoidInstance, rng: np.random.Generator, count: int) -> float:
    """For ``T(alpha)(eta) = 0 = T(beta)(xi)``: ``eta . xi = T(L_h)(xi) + T(R_g)(eta)``.

    Translations are realized as products with zero vectors.
    """
    worst = 0.0
    for _ in range(count):
        h, g = G.sample_composable(rng, 2)
        hdot = _kernel_vector(source_map(G, h), rng)
        gdot = _kernel_vector(target_map(G, g), rng)
        _, lhs = tangent_mul(G, (h, hdot), (g, gdot))
        _, left = tangent_mul(G, zero(h), (g, gdot))
        _, right = tangent_mul(G, (h, hdot), zero(g))
        worst = max(worst, _dist(lhs, left + right))
    return worst


def _null_space(mat: np.ndarray) -> np.ndarray:
    if mat.shape[0] == 0:
        return np.eye(mat.shape[1])
    return scipy.linalg.null_space(mat, rcond=RANK_TOL)


def _kernel_vector(mat: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    k = _null_space(mat)
    return k @ rng.uniform(-1, 1, k.shape[1])


def act_iso_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int) -> dict[str, float]:
    """The map ``(g, theta) -> (g, theta o Ad_{g^-1})`` from the coadjoint action groupoid to ``T*G``."""
    A = ActionGroupoid(group, "coadjoint")
    C = CotangentGroupGroupoid(group)
    n = group.dim

    def fwd(a):
        return np.concatenate([a[:n], group.ad_matrix(np.linalg.inv(group.chart(a[:n]))).T @ a[n:]])

    def back(c):
        return np.concatenate([c[:n], group.ad_matrix(group.chart(c[:n])).T @ c[n:]])

    res = {"source": 0.0, "target": 0.0, "identity": 0.0, "multiply": 0.0, "inverse": 0.0, "round-trip": 0.0}
    for _ in range(count):
        h, g = A.sample_composable(rng, 2)
        res["source"] = max(res["source"], _dist(C.source(fwd(g)), A.source(g)))
        res["target"] = max(res["target"], _dist(C.target(fwd(g)), A.target(g)))
        m = A.source(g)
        res["identity"] = max(res["identity"], _dist(fwd(A.identity(m)), C.identity(m)))
        res["multiply"] = max(res["multiply"], _dist(fwd(A.compose(h, g)), C.compose(fwd(h), fwd(g))))
        res["inverse"] = max(res["inverse"], _dist(fwd(A.inverse(g)), C.inverse(fwd(g))))
        res["round-trip"] = max(res["round-trip"], _dist(back(fwd(g)), g), _dist(fwd(back(g)), g))
    return res


# ---------------------------------------------------------------------------
# Lie algebroid of a groupoid
# ---------------------------------------------------------------------------


def _pivots(G: GroupoidInstance) -> np.ndarray:
    """Coordinate directions spanning ``A`` near a reference base point (cached per instance)."""
    cached = getattr(G, "_frame_pivots", None)
    if cached is not None:
        return cached
    m0 = np.zeros(G.base_dim)
    proj = _projector(G, m0)
    r = G.arrow_dim - G.base_dim
    _, _, piv = scipy.linalg.qr(proj, pivoting=True)
    piv = np.sort(piv[:r])
    G._frame_pivots = piv
    return piv


def _projector(G: GroupoidInstance, m) -> np.ndarray:
    """Projection of ``T_{1_m}`` onto ``ker T(alpha)`` along ``T(1)(T_m M)``."""
    e = np.asarray(nc.real(G.identity(m)), dtype=float)
    return np.eye(G.arrow_dim) - identity_map(G, m) @ source_map(G, e)


def a_basis(G: GroupoidInstance, m) -> np.ndarray:
    """Smooth orthonormal frame of ``A_m = ker T(alpha)`` at ``1_m`` (columns)."""
    m = np.asarray(m, dtype=float)
    b = _projector(G, m)[:, _pivots(G)]
    gram = b.T @ b
    w, v = np.linalg.eigh(gram)
    if w.size and w[0] < RANK_TOL:
        raise RankDeficiencyError(f"{G.name}: A-fibre frame degenerates at {m}")
    return b @ (v @ np.diag(w ** -0.5) @ v.T)


def anchor_matrix(G: GroupoidInstance, m) -> np.ndarray:
    """``a = T(beta)`` on the frame of ``A_m`` (``base_dim x rank``)."""
    e = np.asarray(nc.real(G.identity(m)), dtype=float)
    return target_map(G, e) @ a_basis(G, m)


def right_invariant(G: GroupoidInstance, section: Callable) -> Callable:
    """``g -> T(R_g)(X(beta g))`` for a section given as frame coefficients ``m -> c(m)``."""

    def field(g):
        g = np.asarray(nc.real(g), dtype=float)
        m = np.asarray(nc.real(G.target(g)), dtype=float)
        x = a_basis(G, m) @ np.asarray(section(m), dtype=float)
        return tangent_mul(G, (np.asarray(nc.real(G.identity(m))), x), zero(g))[1]

    return field


def section_bracket(G: GroupoidInstance, s1: Callable, s2: Callable, m, h: float = nc.DEFAULT_STEP) -> np.ndarray:
    """Frame coefficients of ``[s1, s2](m)`` via the bracket of right-invariant extensions."""
    m = np.asarray(m, dtype=float)
    e = np.asarray(nc.real(G.identity(m)), dtype=float)
    v = nc.vector_field_bracket(right_invariant(G, s1), right_invariant(G, s2), e, h)
    basis = a_basis(G, m)
    return basis.T @ v  # frame is orthonormal and v lies in A_m


@dataclass
class AlgebroidData:
    base_point: np.ndarray
    basis: np.ndarray  # (arrow_dim, rank)
    anchor: np.ndarray  # (base_dim, rank)
    bracket: np.ndarray  # c[k, i, j] with [X_i, X_j] = sum_k c[k, i, j] X_k
    closure: float  # size of the bracket components outside A_m

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


def right_invariant_frame(G: GroupoidInstance) -> Callable:
    """``g -> [T(R_g)(X_1(beta g)) ... T(R_g)(X_r(beta g))]`` flattened (column-major blocks)."""

    def frame(g):
        g = np.asarray(nc.real(g), dtype=float)
        m = np.asarray(nc.real(G.target(g)), dtype=float)
        e = np.asarray(nc.real(G.identity(m)), dtype=float)
        basis = a_basis(G, m)
        cols = [tangent_mul(G, (e, basis[:, i]), zero(g))[1] for i in range(basis.shape[1])]
        return np.concatenate(cols) if cols else np.zeros(0)

    return frame


def algebroid_extract(G: GroupoidInstance, m, h: float = nc.DEFAULT_STEP) -> AlgebroidData:
    """Frame, anchor and bracket table of ``A`` at ``m``.

    Brackets of frame sections are chart brackets of their right-invariant
    extensions at ``1_m``; all extensions share one finite-difference Jacobian.
    """
    m = np.asarray(m, dtype=float)
    basis = a_basis(G, m)
    N, r = basis.shape
    e = np.asarray(nc.real(G.identity(m)), dtype=float)
    frame = right_invariant_frame(G)
    vals = frame(e).reshape(r, N)
    jac = nc.jacobian(frame, e, nc.CENTRAL, h).reshape(r, N, N)
    c = np.zeros((r, r, r))
    closure = 0.0
    for i in range(r):
        for j in range(i + 1, r):
            v = jac[j] @ vals[i] - jac[i] @ vals[j]
            coeffs = basis.T @ v
            closure = max(closure, float(np.max(np.abs(v - basis @ coeffs))))
            c[:, i, j] = coeffs
            c[:, j, i] = -coeffs
    return AlgebroidData(m, basis, anchor_matrix(G, m), c, closure)


def algebroid_anchor_morphism_residual(G: GroupoidInstance, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """``a[s1, s2] = [a s1, a s2]`` for random polynomial sections."""
    chart = nc.Chart(G.base_dim)
    r = G.arrow_dim - G.base_dim
    worst = 0.0
    for _ in range(count):
        m = G.sample_base(rng)
        p1 = [nc.random_polynomial(chart, 2, rng) for _ in range(r)]
        p2 = [nc.random_polynomial(chart, 2, rng) for _ in range(r)]
        s1 = lambda y, p=p1: np.array([float(nc.real(q(y))) for q in p])
        s2 = lambda y, p=p2: np.array([float(nc.real(q(y))) for q in p])
        lhs = anchor_matrix(G, m) @ section_bracket(G, s1, s2, m, h)
        u = lambda y, s=s1: anchor_matrix(G, y) @ s(y)
        v = lambda y, s=s2: anchor_matrix(G, y) @ s(y)
        worst = max(worst, _dist(lhs, nc.vector_field_bracket(u, v, m, h)))
    return worst


def action_bracket_residual(G: ActionGroupoid, rng: np.random.Generator, count: int, h: float = nc.DEFAULT_STEP) -> float:
    """Algebroid bracket of ``M x g`` against ``[V, W] = V_M(W) - W_M(V) + [V, W]^pt``.

    The pointwise bracket is the one of right-invariant fields on ``G``.
    """
    alg = G.group.right_invariant_algebra()
    n = G.n
    chart = nc.Chart(G.base_dim)
    worst = 0.0
    for _ in range(count):
        m = G.sample_base(rng)
        p1 = [nc.random_polynomial(chart, 2, rng) for _ in range(n)]
        p2 = [nc.random_polynomial(chart, 2, rng) for _ in range(n)]
        s1 = lambda y, p=p1: np.array([float(nc.real(q(y))) for q in p])
        s2 = lambda y, p=p2: np.array([float(nc.real(q(y))) for q in p])
        got = a_basis(G, m) @ section_bracket(G, s1, s2, m, h)
        # frame is (e_i, 0), so coefficients are algebra coordinates
        anc = anchor_matrix(G, m)
        v, w = s1(m), s2(m)
        expected = (
            nc.diff_directional(s2, m, anc @ v, nc.CENTRAL, h)
            - nc.diff_directional(s1, m, anc @ w, nc.CENTRAL, h)
            + liealg.bracket(alg, v, w)
        )
        worst = max(worst, _dist(got[:n], expected), _dist(got[n:], 0.0 * got[n:]))
    return worst


def inverse_of_a_residual(G: GroupoidInstance, rng: np.random.Generator, count: int) -> float:
    """``X^-1 = T(1)(aX) - X`` for ``X`` in ``A_m`` at ``1_m``."""
    worst = 0.0
    for _ in range(count):
        m = G.sample_base(rng)
        e = np.asarray(nc.real(G.identity(m)), dtype=float)
        x = a_basis(G, m) @ rng.uniform(-1, 1, G.arrow_dim - G.base_dim)
        _, xinv = tangent_inverse(G, (e, x))
        expected = identity_map(G, m) @ (target_map(G, e) @ x) - x
        worst = max(worst, _dist(xinv, expected))
    return worst


# ---------------------------------------------------------------------------
# Cotangent groupoid of a groupoid
# ---------------------------------------------------------------------------


class CotangentLiftGroupoid(GroupoidInstance):
    """``T*G => A*G``.

    Arrows are ``(g, Phi)`` with ``Phi`` a covector in the arrow chart; base
    points are ``(m, phi)`` with ``phi`` in frame coordinates of ``A*_m``.
    """

    tol = LIFTED_TOL

    def __init__(self, parent: GroupoidInstance):
        self.parent = parent
        self.N = parent.arrow_dim
        self.d = parent.base_dim
        self.r = self.N - self.d
        self.arrow_dim = 2 * self.N
        self.base_dim = self.d + self.r
        self.name = f"cotangent-lift({parent.name})"

    # pieces -----------------------------------------------------------------
    def _split(self, a):
        a = np.asarray(nc.real(a), dtype=float)
        return a[: self.N], a[self.N :]

    def beta_rows(self, g) -> np.ndarray:
        """Rows ``X_i . 0_g = T(R_g)(X_i)`` for the frame at ``beta(g)``."""
        P = self.parent
        m = np.asarray(nc.real(P.target(g)), dtype=float)
        e = np.asarray(nc.real(P.identity(m)), dtype=float)
        basis = a_basis(P, m)
        return np.stack([tangent_mul(P, (e, basis[:, i]), zero(g))[1] for i in range(self.r)]) if self.r else np.zeros((0, self.N))

    def alpha_rows(self, g) -> np.ndarray:
        """Rows ``0_g . (X_i - T(1)(a X_i))`` for the frame at ``alpha(g)``."""
        P = self.parent
        m = np.asarray(nc.real(P.source(g)), dtype=float)
        e = np.asarray(nc.real(P.identity(m)), dtype=float)
        basis = a_basis(P, m)
        vert = basis - identity_map(P, m) @ (target_map(P, e) @ basis)
        return np.stack([tangent_mul(P, zero(g), (e, vert[:, i]))[1] for i in range(self.r)]) if self.r else np.zeros((0, self.N))

    # structure maps -----------------------------------------------------------
    def source(self, a):
        g, phi = self._split(a)
        return np.concatenate([nc.real(self.parent.source(g)), self.alpha_rows(g) @ phi])

    def target(self, a):
        g, phi = self._split(a)
        return np.concatenate([nc.real(self.parent.target(g)), self.beta_rows(g) @ phi])

    def identity(self, m):
        """``<1_phi, T(1)(x) + X> = <phi, X>``."""
        m = np.asarray(nc.real(m), dtype=float)
        base, phi = m[: self.d], m[self.d :]
        e = np.asarray(nc.real(self.parent.identity(base)), dtype=float)
        frame = np.hstack([identity_map(self.parent, base), a_basis(self.parent, base)])
        cov = nc.solve(frame.T, np.concatenate([np.zeros(self.d), phi]))
        return np.concatenate([e, cov])

    def inverse(self, a):
        """``<Phi^-1, xi^-1> = -<Phi, xi>``."""
        g, phi = self._split(a)
        ginv = np.asarray(nc.real(self.parent.inverse(g)), dtype=float)
        return np.concatenate([ginv, -inverse_map(self.parent, ginv).T @ phi])

    def multiply(self, h, g, rng: np.random.Generator | None = None):
        return self.multiply_with(h, g, rng)[0]

    def multiply_with(self, a_h, a_g, rng: np.random.Generator | None = None, basis: np.ndarray | None = None):
        """Product and the decompositions used.

        Each basis vector ``zeta`` at ``hg`` is split as ``zeta2 . zeta1`` with
        ``T(alpha)(zeta1) = T(alpha)(zeta)``; ``rng`` adds a random
        ``alpha``-vertical part to ``zeta1`` (any choice gives the same pairing).
        """
        P = self.parent
        h, psi = self._split(a_h)
        g, phi = self._split(a_g)
        hg = np.asarray(nc.real(P.compose(h, g)), dtype=float)
        ginv = np.asarray(nc.real(P.inverse(g)), dtype=float)
        ta_g = source_map(P, g)
        ta_hg = source_map(P, hg)
        kern = _null_space(ta_g)
        pinv = np.linalg.pinv(ta_g) if ta_g.shape[0] else np.zeros((self.N, 0))
        basis = np.eye(self.N) if basis is None else np.asarray(basis, dtype=float)
        tinv = inverse_map(P, g)
        values = np.zeros(basis.shape[1])
        for j in range(basis.shape[1]):
            zeta = basis[:, j]
            z1 = pinv @ (ta_hg @ zeta)
            if rng is not None and kern.shape[1]:
                z1 = z1 + kern @ rng.normal(size=kern.shape[1])
            _, z2 = tangent_mul(P, (hg, zeta), (ginv, tinv @ z1))
            values[j] = psi @ z2 + phi @ z1
        cov = nc.solve(basis.T, values)
        return np.concatenate([hg, cov]), values

    def adjust_source(self, a, m):
        g, phi = self._split(a)
        m = np.asarray(nc.real(m), dtype=float)
        g2 = np.asarray(nc.real(self.parent.adjust_source(g, m[: self.d])), dtype=float)
        rows = self.alpha_rows(g2)
        phi2 = phi + np.linalg.pinv(rows) @ (m[self.d :] - rows @ phi)
        return np.concatenate([g2, phi2])

    def sample_arrow(self, rng):
        return np.concatenate([self.parent.sample_arrow(rng), rng.uniform(-1, 1, self.N)])


def cotangent_source_target(CT: CotangentLiftGroupoid, a) -> tuple[np.ndarray, np.ndarray]:
    return CT.source(a), CT.target(a)


def cotangent_mul(CT: CotangentLiftGroupoid, psi, phi, rng: np.random.Generator | None = None) -> np.ndarray:
    defect = CT.composability_defect(psi, phi)
    if defect > CT.tol:
        raise ComposabilityError(f"{CT.name}: source(Psi) != target(Phi) (defect {defect:.2e})")
    return CT.multiply(psi, phi, rng)


def cotangent_identity(CT: CotangentLiftGroupoid, m) -> np.ndarray:
    return CT.identity(m)


def cotangent_inverse(CT: CotangentLiftGroupoid, a) -> np.ndarray:
    return CT.inverse(a)


def well_definedness_residual(CT: CotangentLiftGroupoid, rng: np.random.Generator, count: int) -> float:
    """Two random decompositions ``zeta = zeta2 . zeta1`` give the same pairing."""
    worst = 0.0
    for _ in range(count):
        psi, phi = CT.sample_composable(rng, 2)
        _, v1 = CT.multiply_with(psi, phi, rng)
        _, v2 = CT.multiply_with(psi, phi, rng)
        worst = max(worst, _dist(v1, v2))
    return worst


def group_lift_oracle_residual(group: mg.MatrixLieGroup, rng: np.random.Generator, count: int) -> dict[str, float]:
    """Generic cotangent lift of ``G => pt`` against the closed-form ``T*G => g*``.

    A right-trivialized ``(x, mu)`` corresponds to the chart covector ``J_R(x)^T mu``.
    """
    CT = CotangentLiftGroupoid(GroupAsGroupoid(group))
    C = CotangentGroupGroupoid(group)
    n = group.dim

    def to_chart(c):
        c = np.asarray(c, dtype=float)
        return np.concatenate([c[:n], group.right_jacobian(c[:n]).T @ c[n:]])

    res = dict.fromkeys(("source", "target", "multiply", "identity", "inverse"), 0.0)
    for _ in range(count):
        h, g = C.sample_composable(rng, 2)
        lg, lh = to_chart(g), to_chart(h)
        res["source"] = max(res["source"], _dist(CT.source(lg), C.source(g)))
        res["target"] = max(res["target"], _dist(CT.target(lg), C.target(g)))
        res["multiply"] = max(res["multiply"], _dist(cotangent_mul(CT, lh, lg), to_chart(C.compose(h, g))))
        m = np.asarray(C.target(g), dtype=float)
        res["identity"] = max(res["identity"], _dist(CT.identity(m), to_chart(C.identity(m))))
        res["inverse"] = max(res["inverse"], _dist(CT.inverse(lg), to_chart(C.inverse(g))))
    return res


# ---------------------------------------------------------------------------
# Construction by kind
# ---------------------------------------------------------------------------


def make_instance(kind: str, *args) -> GroupoidInstance:
    """``pair n``, ``action G coadjoint|linear``, ``cotangent-group G``, ``group G``,
    ``tangent-lift <kind ...>``, ``cotangent-lift <kind ...>``."""
    if kind == "pair":
        return PairGroupoid(int(args[0]))
    if kind == "action":
        return ActionGroupoid(mg.get_group(args[0]), args[1] if len(args) > 1 else "coadjoint")
    if kind == "cotangent-group":
        return CotangentGroupGroupoid(mg.get_group(args[0]))
    if kind == "group":
        return GroupAsGroupoid(mg.get_group(args[0]))
    if kind == "tangent-lift":
        return TangentLiftGroupoid(make_instance(*args))
    if kind == "cotangent-lift":
        return CotangentLiftGroupoid(make_instance(*args))
    raise ValueError(f"unknown groupoid kind {kind!r}")
