"""Poisson structures in global charts.

A structure is a chart plus a bivector-valued function ``x -> pi(x)`` with
``{f, g}(x) = df(x) @ pi(x) @ dg(x)``. The anchor is fixed by the pairing
``<phi, pi#(psi)> = pi(psi, phi)``, which in components reads
``pi#(psi) = pi(x).T @ psi``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from poissonlab import liealg
from poissonlab import numcore as nc
from poissonlab.errors import DimensionError, EvaluationError, MembershipError, RankDeficiencyError

ON_SUBMANIFOLD_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PoissonStructure:
    chart: nc.Chart
    pi_fn: Callable
    name: str = ""
    #: ``pi_fn`` accepts dual-number points (so derivatives of pi are exact)
    dual_ok: bool = False

    @property
    def dim(self) -> int:
        return self.chart.dim

    def matrix(self, x):
        """``pi(x)``, antisymmetrized so that antisymmetry holds exactly."""
        p = self.pi_fn(x)
        if nc.is_dual(p):
            return 0.5 * (p - p.T)
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim, self.dim):
            raise DimensionError(f"{self.name}: bivector has shape {p.shape}, expected {(self.dim, self.dim)}")
        return 0.5 * (p - p.T)

    def derivative(self, x, v, h: float = nc.DEFAULT_STEP) -> np.ndarray:
        """Directional derivative of ``pi`` at ``x`` along ``v``."""
        mode = nc.DUAL if self.dual_ok else nc.CENTRAL
        return np.asarray(nc.diff_directional(self.matrix, x, v, mode, h)).reshape(self.dim, self.dim)


@dataclass(frozen=True)
class Submanifold:
    """Common zero set of constraint functions ``h_1 .. h_c``."""

    chart: nc.Chart
    constraints: tuple
    mode: str = nc.CENTRAL
    #: optional vector-valued map returning all constraints at once (one Jacobian instead of ``codim`` gradients)
    stacked: Callable | None = None

    @property
    def codim(self) -> int:
        return len(self.constraints)

    def values(self, x) -> np.ndarray:
        return np.array([float(nc.real(h(x))) for h in self.constraints])

    def gradients(self, x) -> np.ndarray:
        """Rows are ``dh_a(x)``; refuses dependent constraints."""
        if self.stacked is not None:
            grads = nc.jacobian(self.stacked, x, self.mode)
        else:
            grads = np.stack([nc.gradient(h, x, self.mode) for h in self.constraints])
        s = np.linalg.svd(grads, compute_uv=False)
        if s[-1] < 1e-8 * max(1.0, s[0]):
            raise RankDeficiencyError("constraint gradients are linearly dependent")
        return grads


# ---------------------------------------------------------------------------
# Bracket, anchor, Jacobi
# ---------------------------------------------------------------------------


def bracket_fn(pi: PoissonStructure, f: Callable, g: Callable, x, mode: str = nc.CENTRAL, h: float = nc.DEFAULT_STEP) -> float:
    """``{f, g}(x)``; ``mode`` selects how the gradients of ``f`` and ``g`` are taken."""
    x = np.asarray(x, dtype=float)
    df = nc.gradient(f, x, mode, h)
    dg = nc.gradient(g, x, mode, h)
    return float(df @ pi.matrix(x) @ dg)


def anchor(pi: PoissonStructure, psi, x) -> np.ndarray:
    return pi.matrix(np.asarray(x, dtype=float)).T @ np.asarray(psi, dtype=float)


def anchor_field(pi: PoissonStructure, form: Callable) -> Callable:
    """The vector field ``x -> pi#(form(x))``."""
    return lambda y: anchor(pi, nc.real(form(y)), nc.real(y))


def jacobi_residual_pts(pi: PoissonStructure, points, h: float = nc.DEFAULT_STEP) -> float:
    """Max over points and coordinate triples of the cyclic sum of ``{x_i, {x_j, x_k}}``.

    ``{x_i, F}(x) = pi^{il} d_l F``, and ``{x_j, x_k} = pi^{jk}``, so only first
    derivatives of ``pi`` enter.
    """
    n = pi.dim
    worst = 0.0
    for x in np.atleast_2d(points):
        p = pi.matrix(x)
        # dp[l, j, k] = d_l pi^{jk}
        dp = np.stack([pi.derivative(x, e, h) for e in np.eye(n)])
        t = np.einsum("il,ljk->ijk", p, dp)  # {x_i, {x_j, x_k}}
        cyc = t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))
        worst = max(worst, float(np.max(np.abs(cyc))) if n else 0.0)
    return worst


# ---------------------------------------------------------------------------
# Bracket of 1-forms and the cotangent algebroid
# ---------------------------------------------------------------------------


def oneform_bracket(pi: PoissonStructure, phi: Callable, psi: Callable, x, h: float = nc.DEFAULT_STEP) -> np.ndarray:
    """``[phi, psi] = L_{phi#} psi - L_{psi#} phi - d(pi(phi, psi))``."""
    x = np.asarray(x, dtype=float)
    phi_sharp = anchor_field(pi, phi)
    psi_sharp = anchor_field(pi, psi)

    def pairing(y):
        return float(np.asarray(nc.real(phi(y))) @ pi.matrix(nc.real(y)) @ np.asarray(nc.real(psi(y))))

    return (
        nc.lie_derivative_oneform(phi_sharp, psi, x, h)
        - nc.lie_derivative_oneform(psi_sharp, phi, x, h)
        - nc.gradient(pairing, x, nc.CENTRAL, h)
    )


def exact_form(f: Callable, mode: str = nc.DUAL) -> Callable:
    """``df`` as a 1-form field."""
    return lambda y: nc.gradient(f, nc.real(y), mode)


def random_oneform(chart: nc.Chart, rng: np.random.Generator, degree: int = 2) -> nc.OneFormField:
    """``sum_i p_i(x) dx_i`` with random polynomial coefficients."""
    coeffs = [nc.random_polynomial(chart, degree, rng) for _ in range(chart.dim)]
    return nc.OneFormField(chart, lambda y: np.array([float(nc.real(c(y))) for c in coeffs]))


@dataclass
class AlgebroidResiduals:
    exactness: float  # [df, dg] - d{f, g}
    anchor_morphism: float  # pi#[phi, psi] - [pi# phi, pi# psi]
    leibniz: float  # [phi, f psi] - f [phi, psi] - (pi# phi)(f) psi

    def worst(self) -> float:
        return max(self.exactness, self.anchor_morphism, self.leibniz)


def cotangent_algebroid_residuals(pi: PoissonStructure, points, rng: np.random.Generator, h: float = nc.DEFAULT_STEP) -> AlgebroidResiduals:
    """Check that ``T*P`` with the 1-form bracket and anchor ``pi#`` is a Lie algebroid.

    Each sample point draws fresh random polynomial functions and 1-forms.
    """
    chart = pi.chart
    ex = am = lb = 0.0
    for x in np.atleast_2d(points):
        f = nc.random_polynomial(chart, 3, rng)
        g = nc.random_polynomial(chart, 3, rng)
        lhs = oneform_bracket(pi, exact_form(f), exact_form(g), x, h)
        rhs = nc.gradient(lambda y: bracket_fn(pi, f, g, y, nc.DUAL), x, nc.CENTRAL, h)
        ex = max(ex, float(np.max(np.abs(lhs - rhs))))

        phi = random_oneform(chart, rng)
        psi = random_oneform(chart, rng)
        left = anchor(pi, oneform_bracket(pi, phi, psi, x, h), x)
        right = nc.vector_field_bracket(anchor_field(pi, phi), anchor_field(pi, psi), x, h)
        am = max(am, float(np.max(np.abs(left - right))))

        u = nc.random_polynomial(chart, 2, rng)
        u_psi = lambda y: float(nc.real(u(nc.real(y)))) * np.asarray(psi(y))
        lhs = oneform_bracket(pi, phi, u_psi, x, h)
        du = nc.gradient(u, x, nc.DUAL)
        rhs = float(u(x)) * oneform_bracket(pi, phi, psi, x, h) + float(du @ anchor(pi, phi(x), x)) * np.asarray(psi(x))
        lb = max(lb, float(np.max(np.abs(lhs - rhs))))
    return AlgebroidResiduals(ex, am, lb)


# ---------------------------------------------------------------------------
# Catalog structures
# ---------------------------------------------------------------------------


def lie_poisson(g: liealg.LieAlgebra) -> PoissonStructure:
    """``pi^{ij}(phi) = sum_k c^k_ij phi_k`` on ``g*``; then ``{l_X, l_Y} = l_[X,Y]``."""
    c = g.constants

    def pi_fn(phi):
        if nc.is_dual(phi):
            return nc.Dual(np.tensordot(phi.re, c, axes=1), np.tensordot(phi.du, c, axes=1))
        return np.tensordot(np.asarray(phi, dtype=float), c, axes=1)

    return PoissonStructure(nc.Chart(g.dim, f"{g.name}*"), pi_fn, f"lie-poisson {g.name}", dual_ok=True)


def constant_structure(matrix, name: str = "constant") -> PoissonStructure:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("constant bivector must be square")
    return PoissonStructure(nc.Chart(m.shape[0], name), lambda x: m, name, dual_ok=True)


def constant_symplectic(dim: int) -> PoissonStructure:
    """Standard structure on ``R^dim`` with coordinates ``(q_1..q_k, p_1..p_k)``, ``{q_i, p_i} = 1``."""
    if dim <= 0 or dim % 2:
        raise ValueError(f"symplectic dimension must be positive and even, got {dim}")
    k = dim // 2
    m = np.zeros((dim, dim))
    m[:k, k:] = np.eye(k)
    m[k:, :k] = -np.eye(k)
    return constant_structure(m, f"constant-symplectic {dim}")


def zero_structure(dim: int) -> PoissonStructure:
    return constant_structure(np.zeros((dim, dim)), f"zero {dim}")


_FACTOR = re.compile(r"x(\d+)(?:\^(\d+))?")


def parse_polynomial(text: str, dim: int) -> list[tuple[float, tuple[int, ...]]]:
    """Parse ``"2*x0*x1^2 - x2 + 1"`` into ``(coefficient, exponents)`` terms (0-based variables)."""
    terms = []
    src = text.replace(" ", "")
    if not src:
        raise ValueError("empty polynomial")
    pieces = [p for p in re.split(r"(?<![eE])(?=[+-])", src) if p]
    for piece in pieces:
        factors = piece.split("*")
        coef = 1.0
        expo = [0] * dim
        for fac in factors:
            fac = fac.strip()
            sign = 1.0
            while fac and fac[0] in "+-":
                sign *= -1.0 if fac[0] == "-" else 1.0
                fac = fac[1:]
            coef *= sign
            m = _FACTOR.fullmatch(fac)
            if m:
                i = int(m.group(1))
                if i >= dim:
                    raise ValueError(f"variable x{i} out of range for dimension {dim}")
                expo[i] += int(m.group(2) or 1)
            elif fac:
                coef *= float(fac)
        terms.append((coef, tuple(expo)))
    return terms


def polynomial_structure(dim: int, entries: dict, name: str = "polynomial") -> PoissonStructure:
    """Bivector whose upper-triangular entries ``(i, j)`` are polynomials.

    ``entries`` maps ``(i, j)`` (0-based, ``i < j``) to a list of
    ``(coefficient, exponents)`` terms or to a string accepted by
    :func:`parse_polynomial`.
    """
    table = {}
    for (i, j), poly in entries.items():
        if not (0 <= i < dim and 0 <= j < dim) or i == j:
            raise ValueError(f"bad bivector entry index {(i, j)}")
        table[(i, j)] = parse_polynomial(poly, dim) if isinstance(poly, str) else list(poly)

    def monomial(x, expo):
        val = 1.0
        for k, e in enumerate(expo):
            for _ in range(e):
                val = val * x[k]
        return val

    def pi_fn(x):
        rows = [[0.0] * dim for _ in range(dim)]
        for (i, j), terms in table.items():
            val = 0.0
            for coef, expo in terms:
                val = val + coef * monomial(x, expo)
            rows[i][j] = rows[i][j] + val
            rows[j][i] = rows[j][i] - val
        if nc.is_dual(x):
            return nc.Dual(
                np.array([[float(nc.real(v)) for v in r] for r in rows]),
                np.array([[float(nc.tangent(v)) if nc.is_dual(v) else 0.0 for v in r] for r in rows]),
            )
        return np.array(rows, dtype=float)

    return PoissonStructure(nc.Chart(dim, name), pi_fn, name, dual_ok=True)


def reversed_structure(pi: PoissonStructure) -> PoissonStructure:
    """``-pi`` (the structure of ``P-bar``)."""
    return PoissonStructure(pi.chart, lambda x: -1.0 * pi.pi_fn(x), f"-({pi.name})", pi.dual_ok)


def product_structure(*parts: PoissonStructure) -> PoissonStructure:
    """Block-diagonal structure on the product chart."""
    dims = [p.dim for p in parts]
    total = sum(dims)
    offsets = np.cumsum([0] + dims)

    def pi_fn(x):
        x = np.asarray(nc.real(x), dtype=float)
        out = np.zeros((total, total))
        for p, a, b in zip(parts, offsets[:-1], offsets[1:]):
            out[a:b, a:b] = p.matrix(x[a:b])
        return out

    name = " x ".join(p.name for p in parts)
    return PoissonStructure(nc.Chart(total, name), pi_fn, name)


# ---------------------------------------------------------------------------
# Tangent lift
# ---------------------------------------------------------------------------


def _lift_candidate(pi: PoissonStructure) -> Callable:
    n = pi.dim

    def pi_fn(y):
        y = np.asarray(nc.real(y), dtype=float)
        x, v = y[:n], y[n:]
        p = pi.matrix(x)
        out = np.zeros((2 * n, 2 * n))
        out[:n, n:] = p
        out[n:, :n] = p
        out[n:, n:] = pi.derivative(x, v)
        return out

    return pi_fn


def linear_lift(f: Callable) -> Callable:
    """``l_df(x, v) = df(x) . v`` on the tangent chart; ``f`` must accept duals."""

    def fn(y):
        y = np.asarray(nc.real(y), dtype=float)
        n = y.size // 2
        return nc.diff_directional(f, y[:n], y[n:], nc.DUAL)

    return fn


def pullback_lift(f: Callable) -> Callable:
    """``p*f(x, v) = f(x)``."""

    def fn(y):
        n = len(y) // 2
        return f(y[:n])

    return fn


def courant_residuals(pi: PoissonStructure, lift: PoissonStructure, f1: Callable, f2: Callable, points, h: float = nc.DEFAULT_STEP) -> tuple[float, float, float]:
    """Residuals of the three defining identities of the tangent lift at ``(x, v)`` points.

    ``{l_df1, l_df2} = l_d{f1,f2}``, ``{l_df1, p*f2} = p*{f1,f2}``, ``{p*f1, p*f2} = 0``.
    ``f1`` and ``f2`` must accept dual numbers.
    """
    n = pi.dim
    l1, l2 = linear_lift(f1), linear_lift(f2)
    p1, p2 = pullback_lift(f1), pullback_lift(f2)
    pb = lambda x: bracket_fn(pi, f1, f2, x, nc.DUAL)
    r1 = r2 = r3 = 0.0
    for y in np.atleast_2d(points):
        x, v = y[:n], y[n:]
        lhs1 = bracket_fn(lift, l1, l2, y, nc.CENTRAL, h)
        rhs1 = nc.diff_directional(pb, x, v, nc.CENTRAL, h)
        r1 = max(r1, abs(lhs1 - rhs1))
        lhs2 = bracket_fn(lift, l1, p2, y, nc.CENTRAL, h)
        r2 = max(r2, abs(lhs2 - pb(x)))
        r3 = max(r3, abs(bracket_fn(lift, p1, p2, y, nc.CENTRAL, h)))
    return r1, r2, r3


LIFT_ACCEPT_TOL = 1e-5


def tangent_lift(pi: PoissonStructure, rng: np.random.Generator | None = None, check_points: int = 3) -> PoissonStructure:
    """Poisson structure on ``TP`` in the chart ``(x, v)``.

    The block candidate ``[[0, pi], [pi, D_v pi]]`` is accepted only after
    the three Courant identities hold for random polynomials at a few points.
    """
    n = pi.dim
    lift = PoissonStructure(nc.Chart(2 * n, f"T({pi.chart.label})"), _lift_candidate(pi), f"tangent-lift {pi.name}")
    rng = np.random.default_rng(0) if rng is None else rng
    if check_points:
        chart = pi.chart
        f1 = nc.random_polynomial(chart, 3, rng)
        f2 = nc.random_polynomial(chart, 3, rng)
        pts = rng.uniform(-1, 1, (check_points, 2 * n))
        worst = max(courant_residuals(pi, lift, f1, f2, pts))
        if worst > LIFT_ACCEPT_TOL:
            raise EvaluationError(f"tangent-lift candidate fails the Courant identities (residual {worst:.2e})")
    return lift


# ---------------------------------------------------------------------------
# Poisson maps and coisotropy
# ---------------------------------------------------------------------------


def poisson_map_residual(
    mu: Callable,
    pi_p: PoissonStructure,
    pi_q: PoissonStructure,
    functions: Sequence[Callable],
    points,
    h: float = nc.DEFAULT_STEP,
) -> float:
    """Max of ``|{f1 o mu, f2 o mu}_P - {f1, f2}_Q o mu|`` over points and function pairs."""
    worst = 0.0
    fs = list(functions)
    for x in np.atleast_2d(points):
        x = np.asarray(x, dtype=float)
        y = np.asarray(nc.real(mu(x)), dtype=float)
        jac = nc.jacobian(lambda z: np.asarray(nc.real(mu(z)), dtype=float), x, nc.CENTRAL, h)
        pp = pi_p.matrix(x)
        pq = pi_q.matrix(y)
        grads = [nc.gradient(f, y, nc.CENTRAL, h) for f in fs]
        for a in range(len(fs)):
            for b in range(a + 1, len(fs)):
                lhs = (jac.T @ grads[a]) @ pp @ (jac.T @ grads[b])
                rhs = grads[a] @ pq @ grads[b]
                worst = max(worst, abs(float(lhs - rhs)))
    return worst


def coisotropy_residual(c: Submanifold, pi: PoissonStructure, points) -> float:
    """Max of ``|dh_b(pi# dh_a)|``: does ``pi#`` send the annihilator of ``TC`` into ``TC``?"""
    worst = 0.0
    for x in np.atleast_2d(points):
        off = np.max(np.abs(c.values(x))) if c.codim else 0.0
        if off > ON_SUBMANIFOLD_TOL:
            raise MembershipError(f"sample is off the submanifold (constraint value {off:.2e})")
        grads = c.gradients(x)
        p = pi.matrix(np.asarray(x, dtype=float))
        worst = max(worst, float(np.max(np.abs(grads @ p.T @ grads.T))) if c.codim else 0.0)
    return worst


def lie_poisson_bracket_residual(g: liealg.LieAlgebra, points) -> float:
    """Max of ``|{l_ei, l_ej} - l_[ei,ej]|`` over points, with brackets from :func:`bracket_fn`."""
    pi = lie_poisson(g)
    n = g.dim
    lin = [lambda phi, i=i: phi[i] for i in range(n)]
    worst = 0.0
    for phi in np.atleast_2d(points):
        for i in range(n):
            for j in range(n):
                lhs = bracket_fn(pi, lin[i], lin[j], phi, nc.DUAL)
                rhs = float(liealg.bracket(g, np.eye(n)[i], np.eye(n)[j]) @ phi)
                worst = max(worst, abs(lhs - rhs))
    return worst
