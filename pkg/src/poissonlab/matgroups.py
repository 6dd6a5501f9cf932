"""Concrete matrix Lie groups with exponential charts.

Every group carries an algebra basis ``E_1..E_n`` of ``m x m`` matrices whose
commutators reproduce the stored structure constants. Points of the group are
addressed through the chart ``x -> g0 @ expm(sum_i x_i E_i)``.

Covectors at ``g`` are right-trivialized: ``mu`` in ``g*`` acts on ``V`` in
``T_g G`` by ``<mu, V g^-1>``.

The chart functions (:meth:`MatrixLieGroup.chart`, :meth:`MatrixLieGroup.chart_inv`,
:meth:`MatrixLieGroup.ad_matrix` ...) accept :class:`~poissonlab.numcore.Dual`
input so the groupoid layer can differentiate through them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from poissonlab import liealg
from poissonlab import numcore as nc
from poissonlab.errors import ChartDomainError, DimensionError, MembershipError

MEMBERSHIP_TOL = 1e-9
PROJECTION_TOL = 1e-9
#: chart inversion is refused when ``||g0^-1 g - I||_2`` reaches this
CHART_RADIUS = 1.0


@dataclass(frozen=True, eq=False)
class MatrixLieGroup:
    name: str
    algebra: liealg.LieAlgebra
    basis: np.ndarray  # (n, m, m)
    defect: Callable[[np.ndarray], float]  # membership defect of a matrix
    base_coords: np.ndarray = field(default=None)

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        n = self.algebra.dim
        if basis.shape[0] != n or basis.shape[1] != basis.shape[2]:
            raise DimensionError(f"{self.name}: basis must be {n} square matrices")
        flat = basis.reshape(n, -1).T
        if np.linalg.matrix_rank(flat) != n:
            raise ValueError(f"{self.name}: algebra basis matrices are linearly dependent")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_flat", flat)
        object.__setattr__(self, "_pinv", np.linalg.pinv(flat))
        coords = np.zeros(n) if self.base_coords is None else np.asarray(self.base_coords, dtype=float)
        object.__setattr__(self, "base_coords", coords)
        g0 = self.hat_exp(coords)
        object.__setattr__(self, "_g0", g0)
        object.__setattr__(self, "_g0inv", np.linalg.inv(g0))
        object.__setattr__(self, "_ad_g0", self.ad_matrix(g0))

    # -- sizes ---------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def size(self) -> int:
        return self.basis.shape[1]

    @property
    def g0(self) -> np.ndarray:
        return self._g0

    def with_base(self, coords) -> "MatrixLieGroup":
        return MatrixLieGroup(self.name, self.algebra, self.basis, self.defect, np.asarray(coords, dtype=float))

    def right_invariant_algebra(self) -> liealg.LieAlgebra:
        """Algebra bracket of right-invariant vector fields: minus the commutator."""
        return self.algebra.opposite(f"{self.algebra.name}-rinv")

    # -- algebra <-> matrices ----------------------------------------------
    def hat(self, x):
        """``sum_i x_i E_i``."""
        m = self.size
        if nc.is_dual(x):
            return nc.Dual((self._flat @ x.re).reshape(m, m), (self._flat @ x.du).reshape(m, m))
        return (self._flat @ np.asarray(x, dtype=float)).reshape(m, m)

    def vee(self, mat, check: bool = True):
        """Coordinates of an algebra matrix; refuses matrices off the span."""
        m = self.size
        if nc.is_dual(mat):
            re = self._pinv @ mat.re.reshape(m * m)
            out = nc.Dual(re, self._pinv @ mat.du.reshape(m * m))
            resid_src = mat.re
        else:
            mat = np.asarray(mat, dtype=float)
            re = self._pinv @ mat.reshape(m * m)
            out = re
            resid_src = mat
        if check:
            resid = np.max(np.abs(resid_src.reshape(m * m) - self._flat @ re))
            scale = max(1.0, np.max(np.abs(resid_src)))
            if resid > PROJECTION_TOL * scale:
                raise MembershipError(f"{self.name}: matrix leaves the algebra span (residual {resid:.2e})")
        return out

    def hat_exp(self, x):
        return nc.expm(self.hat(x))

    # -- chart ---------------------------------------------------------------
    def chart(self, x):
        """``g0 @ expm(hat(x))``."""
        return self._g0 @ self.hat_exp(x)

    def chart_inv(self, g):
        """Inverse of :meth:`chart` near ``g0``."""
        local = self._g0inv @ g
        dist = np.linalg.norm(nc.real(local) - np.eye(self.size), 2)
        if dist >= CHART_RADIUS:
            raise ChartDomainError(f"{self.name}: ||g0^-1 g - I|| = {dist:.3f} outside chart radius {CHART_RADIUS}")
        return self.vee(nc.logm(local))

    def identity_coords(self) -> np.ndarray:
        return np.asarray(self.chart_inv(np.eye(self.size)))

    def right_jacobian(self, x) -> np.ndarray:
        """Matrix ``J`` with ``(d/dt chart(x + t v)) chart(x)^-1 = hat(J v)``.

        ``J = Ad(g0) (exp(ad_X) - 1) / ad_X``, the series read off the corner
        of ``expm([[ad_X, I], [0, 0]])``.
        """
        x = np.asarray(x, dtype=float)
        n = self.dim
        block = np.zeros((2 * n, 2 * n))
        block[:n, :n] = self.algebra.ad(x)
        block[:n, n:] = np.eye(n)
        return self._ad_g0 @ scipy.linalg.expm(block)[:n, n:]

    def right_jacobian_dual(self, x) -> np.ndarray:
        """Same matrix, column by column from dual-number chart derivatives."""
        x = np.asarray(x, dtype=float)
        ginv = np.linalg.inv(self.chart(x))
        cols = [self.vee(self.chart(nc.Dual(x, e)).du @ ginv) for e in np.eye(self.dim)]
        return np.stack(cols, axis=1) if cols else np.zeros((0, 0))

    # -- group structure in matrices ---------------------------------------
    def ad_matrix(self, g):
        """Matrix of ``Ad_g`` in the algebra basis (columns are ``Ad_g E_j``)."""
        ginv = nc.inv(g)
        if nc.is_dual(g):
            re = self._conjugate(g.re, ginv.re)
            du = self._conjugate(g.du, ginv.re) + self._conjugate(g.re, ginv.du)
            self._check_span(re)
            return nc.Dual(self._pinv @ re, self._pinv @ du)
        re = self._conjugate(np.asarray(g, dtype=float), ginv)
        self._check_span(re)
        return self._pinv @ re

    def _conjugate(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Columns are the flattened ``a E_j b``."""
        m = self.size
        return np.matmul(np.matmul(a, self.basis), b).reshape(self.dim, m * m).T

    def _check_span(self, cols: np.ndarray) -> None:
        resid = np.max(np.abs(cols - self._flat @ (self._pinv @ cols))) if cols.size else 0.0
        if resid > PROJECTION_TOL * max(1.0, np.max(np.abs(cols)) if cols.size else 0.0):
            raise MembershipError(f"{self.name}: matrix leaves the algebra span (residual {resid:.2e})")

    def member_defect(self, g: np.ndarray) -> float:
        return float(self.defect(np.asarray(g, dtype=float)))

    def random_coords(self, rng: np.random.Generator, radius: float) -> np.ndarray:
        """Uniform-direction sample with ``||x - base|| < radius``."""
        v = rng.normal(size=self.dim)
        v /= np.linalg.norm(v)
        return self.base_coords + v * radius * rng.uniform() ** (1.0 / self.dim)


# ---------------------------------------------------------------------------
# Elements, tangents, covectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: MatrixLieGroup
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", mat)
        d = self.group.member_defect(mat)
        if d > MEMBERSHIP_TOL:
            raise MembershipError(f"matrix is not in {self.group.name} (defect {d:.2e})")

    @classmethod
    def from_coords(cls, group: MatrixLieGroup, x) -> "GroupElement":
        return cls(group, group.chart(x))

    def coords(self) -> np.ndarray:
        return np.asarray(self.group.chart_inv(self.matrix))


@dataclass(frozen=True, eq=False)
class GroupTangent:
    base: GroupElement
    velocity: np.ndarray

    def right_trivialized(self) -> np.ndarray:
        return self.base.group.vee(self.velocity @ np.linalg.inv(self.base.matrix))

    @classmethod
    def from_right(cls, base: GroupElement, w) -> "GroupTangent":
        return cls(base, base.group.hat(w) @ base.matrix)


@dataclass(frozen=True, eq=False)
class GroupCovector:
    base: GroupElement
    mu: np.ndarray

    def pair(self, v: GroupTangent) -> float:
        return float(self.mu @ v.right_trivialized())


def _same_group(*elements: GroupElement) -> MatrixLieGroup:
    group = elements[0].group
    for e in elements[1:]:
        if e.group is not group and e.group.name != group.name:
            raise ValueError(f"group mismatch: {group.name} vs {e.group.name}")
    return group


def identity(group: MatrixLieGroup) -> GroupElement:
    return GroupElement(group, np.eye(group.size))


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    return GroupElement(_same_group(a, b), a.matrix @ b.matrix)


def inv(a: GroupElement) -> GroupElement:
    return GroupElement(a.group, np.linalg.inv(a.matrix))


def Ad(g: GroupElement, x) -> np.ndarray:
    """Coordinates of ``g X g^-1``."""
    return g.group.vee(g.matrix @ g.group.hat(x) @ np.linalg.inv(g.matrix))


def coadjoint(g: GroupElement, theta) -> np.ndarray:
    """``theta o Ad_{g^-1}``."""
    return g.group.ad_matrix(np.linalg.inv(g.matrix)).T @ np.asarray(theta, dtype=float)


def tangent_translate_left(h: GroupElement, xi: GroupTangent) -> GroupTangent:
    """``T(L_h)``: velocity ``h V`` at ``h g``."""
    _same_group(h, xi.base)
    return GroupTangent(mul(h, xi.base), h.matrix @ xi.velocity)


def tangent_translate_right(g: GroupElement, xi: GroupTangent) -> GroupTangent:
    """``T(R_g)``: velocity ``V g`` at ``h g``."""
    _same_group(g, xi.base)
    return GroupTangent(mul(xi.base, g), xi.velocity @ g.matrix)


def tangent_group_mul(y: GroupTangent, x: GroupTangent) -> GroupTangent:
    """``Y . X = T(L_h)(X) + T(R_g)(Y)`` for ``Y`` at ``h`` and ``X`` at ``g``."""
    h, g = y.base, x.base
    _same_group(h, g)
    return GroupTangent(mul(h, g), h.matrix @ x.velocity + y.velocity @ g.matrix)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


def _translations(n: int) -> MatrixLieGroup:
    basis = np.zeros((n, n + 1, n + 1))
    for i in range(n):
        basis[i, i, n] = 1.0

    def defect(g):
        target = np.eye(n + 1)
        target[:n, n] = g[:n, n]
        return np.max(np.abs(g - target))

    return MatrixLieGroup(f"R{n}", liealg.abelian(n), basis, defect)


def _heisenberg() -> MatrixLieGroup:
    basis = np.zeros((3, 3, 3))
    basis[0, 0, 1] = 1.0
    basis[1, 1, 2] = 1.0
    basis[2, 0, 2] = 1.0

    def defect(g):
        target = np.eye(3)
        target[0, 1], target[1, 2], target[0, 2] = g[0, 1], g[1, 2], g[0, 2]
        return np.max(np.abs(g - target))

    return MatrixLieGroup("H3", liealg.heisenberg(), basis, defect)


def _so3() -> MatrixLieGroup:
    basis = np.zeros((3, 3, 3))
    basis[0, 2, 1], basis[0, 1, 2] = 1.0, -1.0
    basis[1, 0, 2], basis[1, 2, 0] = 1.0, -1.0
    basis[2, 1, 0], basis[2, 0, 1] = 1.0, -1.0

    def defect(g):
        return max(np.max(np.abs(g.T @ g - np.eye(3))), abs(np.linalg.det(g) - 1.0))

    return MatrixLieGroup("SO3", liealg.so3(), basis, defect)


def _sl2() -> MatrixLieGroup:
    basis = np.array([[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]])

    def defect(g):
        return abs(np.linalg.det(g) - 1.0)

    return MatrixLieGroup("SL2", liealg.sl2(), basis, defect)


GROUPS = {
    "R3": lambda: _translations(3),
    "H3": _heisenberg,
    "SO3": _so3,
    "SL2": _sl2,
}


def get_group(name: str, base_coords=None) -> MatrixLieGroup:
    if name in GROUPS:
        group = GROUPS[name]()
    elif name.startswith("R") and name[1:].isdigit():
        group = _translations(int(name[1:]))
    else:
        raise KeyError(f"unknown matrix group {name!r}")
    if base_coords is not None:
        group = group.with_base(base_coords)
    return group


def commutator_defect(group: MatrixLieGroup) -> float:
    """Max deviation between basis commutators and the stored constants."""
    worst = 0.0
    c = group.algebra.constants
    for i in range(group.dim):
        for j in range(group.dim):
            comm = group.basis[i] @ group.basis[j] - group.basis[j] @ group.basis[i]
            expected = np.tensordot(c[:, i, j], group.basis, axes=1)
            worst = max(worst, float(np.max(np.abs(comm - expected))))
    return worst
