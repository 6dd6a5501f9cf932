"""Finite-dimensional Lie algebras by structure constants.

Conventions
-----------
``c[k, i, j]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``. Covectors are
written in the dual basis. Multivectors of degree ``k`` are stored by their
components on ``e_{i1} ^ ... ^ e_{ik}`` with ``i1 < ... < ik`` (combinations in
lexicographic order); internally they are expanded to fully antisymmetric
tensors where ``e_i ^ e_j = e_i (x) e_j - e_j (x) e_i``.

The dual differential is fixed once:
``<d_* X, eps^i ^ eps^j> = -<X, [eps^i, eps^j]_*>``, extended to higher degree
as a derivation of the wedge product.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from poissonlab.errors import CompatibilityError, ConfigError, DimensionError

MAX_DEGREE = 3


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    name: str
    constants: np.ndarray  # shape (n, n, n), constants[k, i, j] = c^k_ij
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        c = np.asarray(self.constants, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise DimensionError(f"structure constants must be n x n x n, got {c.shape}")
        if not np.array_equal(c, -np.swapaxes(c, 1, 2)):
            raise ValueError(f"{self.name}: structure constants are not antisymmetric")
        c.setflags(write=False)
        object.__setattr__(self, "constants", c)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{i + 1}" for i in range(c.shape[0])))

    @property
    def dim(self) -> int:
        return self.constants.shape[0]

    def ad(self, x) -> np.ndarray:
        """Matrix of ``ad_X`` acting on coordinate vectors."""
        return np.einsum("kij,i->kj", self.constants, self._vec(x))

    def opposite(self, name: str | None = None) -> "LieAlgebra":
        """Same space with bracket ``[X, Y]' = [Y, X]``."""
        return LieAlgebra(name or f"{self.name}-op", -self.constants, self.labels)

    def _vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"{self.name}: expected a vector of length {self.dim}, got shape {x.shape}")
        return x


@dataclass(frozen=True, eq=False)
class LieBialgebra:
    g: LieAlgebra
    gstar: LieAlgebra

    def __post_init__(self):
        if self.g.dim != self.gstar.dim:
            raise DimensionError("g and g* must have the same dimension")

    @property
    def dim(self) -> int:
        return self.g.dim


def from_triples(name: str, dim: int, triples: Iterable[Sequence], labels: Sequence[str] = ()) -> LieAlgebra:
    """Build an algebra from ``(i, j, k, value)`` entries meaning ``c^k_ij = value``.

    Indices are 0-based. The antisymmetric partner ``c^k_ji = -value`` is filled
    in; specifying both halves inconsistently is an error.
    """
    c = np.zeros((dim, dim, dim))
    seen: dict[tuple[int, int, int], float] = {}
    for entry in triples:
        i, j, k, value = int(entry[0]), int(entry[1]), int(entry[2]), float(entry[3])
        for idx in (i, j, k):
            if not 0 <= idx < dim:
                raise ConfigError(f"{name}: index {idx} out of range for dim {dim}")
        if i == j and value != 0.0:
            raise ConfigError(f"{name}: [e{i}, e{i}] must vanish")
        for key, val in (((i, j, k), value), ((j, i, k), -value)):
            if key in seen and seen[key] != val:
                raise ConfigError(f"{name}: conflicting entries for c^{key[2]}_{key[0]}{key[1]}")
            seen[key] = val
        c[k, i, j] = value
        c[k, j, i] = -value
    return LieAlgebra(name, c, tuple(labels))


def bracket(g: LieAlgebra, x, y) -> np.ndarray:
    return np.einsum("kij,i,j->k", g.constants, g._vec(x), g._vec(y))


def jacobi_residual(g: LieAlgebra) -> float:
    """Max-norm of the cyclic sum ``[[e_i,e_j],e_k] + cyclic`` over basis triples."""
    c = g.constants
    # [[e_i, e_j], e_k]_m = c^l_ij c^m_lk
    t = np.einsum("lij,mlk->mijk", c, c)
    cyc = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


def antisymmetry_defect(g: LieAlgebra) -> float:
    return float(np.max(np.abs(g.constants + np.swapaxes(g.constants, 1, 2)))) if g.dim else 0.0


def coadjoint_inf(g: LieAlgebra, x, phi) -> np.ndarray:
    """``ad*_X phi`` with ``<ad*_X phi, Y> = -<phi, [X, Y]>``."""
    return -g.ad(x).T @ g._vec(phi)


# ---------------------------------------------------------------------------
# Multivectors
# ---------------------------------------------------------------------------


def _combos(dim: int, degree: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(dim), degree))


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class Multivector:
    degree: int
    dim: int
    coeffs: np.ndarray = field(repr=True)

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_DEGREE:
            raise DimensionError(f"multivector degree {self.degree} outside 0..{MAX_DEGREE}")
        coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        expected = math.comb(self.dim, self.degree)
        if coeffs.size != expected:
            raise DimensionError(f"degree-{self.degree} multivector in dim {self.dim} needs {expected} components")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, degree: int, dim: int) -> "Multivector":
        return cls(degree, dim, np.zeros(math.comb(dim, degree)))

    @classmethod
    def vector(cls, x) -> "Multivector":
        x = np.asarray(x, dtype=float)
        return cls(1, x.size, x)

    @classmethod
    def basis(cls, dim: int, *indices: int) -> "Multivector":
        """``e_{i1} ^ ... ^ e_{ik}`` for arbitrary (possibly unsorted) indices."""
        t = np.zeros((dim,) * len(indices)) if indices else np.ones(())
        if indices:
            if len(set(indices)) < len(indices):
                return cls.zero(len(indices), dim)
            for perm in itertools.permutations(range(len(indices))):
                t[tuple(indices[p] for p in perm)] = _perm_sign(perm)
        return cls.from_tensor(t, dim)

    @classmethod
    def from_tensor(cls, t: np.ndarray, dim: int) -> "Multivector":
        degree = np.ndim(t)
        return cls(degree, dim, np.array([t[idx] for idx in _combos(dim, degree)]) if degree else np.atleast_1d(t))

    def to_tensor(self) -> np.ndarray:
        if self.degree == 0:
            return np.asarray(self.coeffs[0])
        t = np.zeros((self.dim,) * self.degree)
        for value, idx in zip(self.coeffs, _combos(self.dim, self.degree)):
            if value == 0.0:
                continue
            for perm in itertools.permutations(range(self.degree)):
                t[tuple(idx[p] for p in perm)] = _perm_sign(perm) * value
        return t

    def components(self) -> dict[tuple[int, ...], float]:
        return dict(zip(_combos(self.dim, self.degree), self.coeffs.tolist()))

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return Multivector(self.degree, self.dim, self.coeffs + other.coeffs)

    def __sub__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return Multivector(self.degree, self.dim, self.coeffs - other.coeffs)

    def __neg__(self) -> "Multivector":
        return Multivector(self.degree, self.dim, -self.coeffs)

    def __mul__(self, s: float) -> "Multivector":
        return Multivector(self.degree, self.dim, self.coeffs * float(s))

    __rmul__ = __mul__

    def _check(self, other: "Multivector"):
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise DimensionError("multivector degree/dimension mismatch")


def _alt(t: np.ndarray) -> np.ndarray:
    k = t.ndim
    out = np.zeros_like(t)
    for perm in itertools.permutations(range(k)):
        out = out + _perm_sign(perm) * np.transpose(t, perm)
    return out


def wedge(p: Multivector, q: Multivector) -> Multivector:
    if p.dim != q.dim:
        raise DimensionError("wedge of multivectors of different dimension")
    degree = p.degree + q.degree
    if degree > MAX_DEGREE:
        raise DimensionError(f"wedge would have degree {degree} > {MAX_DEGREE}")
    if p.degree == 0 or q.degree == 0:
        scale = p.coeffs[0] if p.degree == 0 else q.coeffs[0]
        other = q if p.degree == 0 else p
        return other * scale
    t = np.multiply.outer(p.to_tensor(), q.to_tensor())
    t = _alt(t) / (math.factorial(p.degree) * math.factorial(q.degree))
    return Multivector.from_tensor(t, p.dim)


def _ad_derivation(g: LieAlgebra, x: np.ndarray, p: Multivector) -> Multivector:
    """``ad_X`` extended to ``P`` as a derivation of the wedge product."""
    if p.degree == 0:
        return Multivector.zero(0, p.dim)
    adx = g.ad(x)
    t = p.to_tensor()
    out = np.zeros_like(t)
    for axis in range(p.degree):
        out = out + np.moveaxis(np.tensordot(adx, t, axes=([1], [axis])), 0, axis)
    return Multivector.from_tensor(out, p.dim)


def schouten(g: LieAlgebra, p: Multivector, q: Multivector) -> Multivector:
    """Schouten bracket in degrees (1,1), (1,2) and (2,1).

    ``[X, Y ^ Z] = [X, Y] ^ Z + Y ^ [X, Z]`` and ``[eta, X] = -[X, eta]``.
    """
    if p.dim != g.dim or q.dim != g.dim:
        raise DimensionError("multivector dimension does not match the algebra")
    if (p.degree, q.degree) in ((1, 1), (1, 2)):
        return _ad_derivation(g, p.coeffs, q)
    if (p.degree, q.degree) == (2, 1):
        return -_ad_derivation(g, q.coeffs, p)
    raise DimensionError(f"schouten bracket not implemented for degrees ({p.degree}, {q.degree})")


def ce_differential(b: LieBialgebra, p: Multivector) -> Multivector:
    """Dual differential ``d_*`` built from the bracket of ``g*``."""
    if p.dim != b.dim:
        raise DimensionError("multivector dimension does not match the bialgebra")
    if p.degree == 0:
        # no anchor at a point base: constants are closed
        return Multivector.zero(1, p.dim)
    if p.degree == 1:
        # (d_* X)^{ij} = -sum_k cbar^k_ij X_k
        t = -np.einsum("kij,k->ij", b.gstar.constants, p.coeffs)
        return Multivector.from_tensor(t, p.dim)
    if p.degree == 2:
        # d(X ^ Y) = dX ^ Y - X ^ dY, applied term by term to P = sum_{i<j} P^ij e_i ^ e_j
        out = Multivector.zero(3, p.dim)
        eye = np.eye(p.dim)
        for (i, j), coef in p.components().items():
            if coef == 0.0:
                continue
            ei, ej = Multivector.vector(eye[i]), Multivector.vector(eye[j])
            term = wedge(ce_differential(b, ei), ej) - wedge(ei, ce_differential(b, ej))
            out = out + term * coef
        return out
    raise DimensionError(f"ce_differential not implemented for degree {p.degree}")


def bialgebra_residual(b: LieBialgebra) -> float:
    """Max over basis pairs of ``||d_*[e_i,e_j] - [e_i, d_* e_j] - [d_* e_i, e_j]||``."""
    n = b.dim
    eye = np.eye(n)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            ei, ej = Multivector.vector(eye[i]), Multivector.vector(eye[j])
            lhs = ce_differential(b, Multivector.vector(bracket(b.g, eye[i], eye[j])))
            rhs = schouten(b.g, ei, ce_differential(b, ej)) + schouten(b.g, ce_differential(b, ei), ej)
            worst = max(worst, (lhs - rhs).norm_inf())
    return worst


def coboundary_dual_constants(g: LieAlgebra, r: Multivector) -> np.ndarray:
    """Structure constants of ``g*`` whose ``d_*`` is ``X -> [X, r]``."""
    if r.degree != 2:
        raise DimensionError("r must be a bivector")
    n = g.dim
    eye = np.eye(n)
    cbar = np.zeros((n, n, n))
    for k in range(n):
        delta = schouten(g, Multivector.vector(eye[k]), r).to_tensor()
        # <d_* e_k, eps^i ^ eps^j> = -cbar^k_ij
        cbar[k] = -delta
    return cbar


def drinfeld_double(b: LieBialgebra, tol: float = 1e-10) -> LieAlgebra:
    """Lie algebra on ``g + g*`` with the matched-pair mixed bracket.

    Basis order is ``e_1..e_n`` then ``eps^1..eps^n``;
    ``[X, phi] = ad*_X phi - ad*_phi X``.
    """
    res = bialgebra_residual(b)
    if res > tol:
        raise CompatibilityError(f"bialgebra compatibility fails (residual {res:.3e})", res)
    n = b.dim
    c, cb = b.g.constants, b.gstar.constants
    d = np.zeros((2 * n, 2 * n, 2 * n))
    d[:n, :n, :n] = c
    d[n:, n:, n:] = cb
    for i in range(n):
        for j in range(n):
            # ad*_{e_i} eps^j = -sum_k c^j_ik eps^k ;  ad*_{eps^j} e_i = -sum_k cbar^i_jk e_k
            mixed_star = -c[j, i, :]
            mixed_g = cb[i, j, :]
            d[n:, i, n + j] = mixed_star
            d[:n, i, n + j] = mixed_g
            d[n:, n + j, i] = -mixed_star
            d[:n, n + j, i] = -mixed_g
    labels = tuple(b.g.labels) + tuple(f"{lab}*" for lab in b.g.labels)
    return LieAlgebra(f"double({b.g.name})", d, labels)


def double_pairing(n: int) -> np.ndarray:
    """Gram matrix of ``<<(X, phi), (Y, psi)>> = phi(Y) + psi(X)``."""
    m = np.zeros((2 * n, 2 * n))
    m[:n, n:] = np.eye(n)
    m[n:, :n] = np.eye(n)
    return m


def pairing_invariance_residual(d: LieAlgebra, samples: np.ndarray) -> float:
    """Max of ``|<<[a,b],c>> + <<b,[a,c]>>|`` over sample triples (rows of ``samples``)."""
    gram = double_pairing(d.dim // 2)
    worst = 0.0
    for a, b_, c in samples:
        val = bracket(d, a, b_) @ gram @ c + b_ @ gram @ bracket(d, a, c)
        worst = max(worst, abs(float(val)))
    return worst


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


def so3() -> LieAlgebra:
    return from_triples("so3", 3, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)], ("e1", "e2", "e3"))


def sl2() -> LieAlgebra:
    # basis (h, e, f): [h,e] = 2e, [h,f] = -2f, [e,f] = h
    return from_triples("sl2", 3, [(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)], ("h", "e", "f"))


def heisenberg() -> LieAlgebra:
    return from_triples("h3", 3, [(0, 1, 2, 1.0)], ("x", "y", "z"))


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(f"abelian{n}", np.zeros((n, n, n)))


def broken() -> LieAlgebra:
    """Antisymmetric constants violating Jacobi: [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e1."""
    return from_triples("broken", 3, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 0, 1.0)])


CATALOG = {
    "so3": so3,
    "sl2": sl2,
    "h3": heisenberg,
    "abelian3": lambda: abelian(3),
}


def get_algebra(name: str) -> LieAlgebra:
    if name in CATALOG:
        return CATALOG[name]()
    if name.startswith("abelian") and name[len("abelian"):].isdigit():
        return abelian(int(name[len("abelian"):]))
    if name == "broken":
        return broken()
    raise KeyError(f"unknown Lie algebra {name!r}")


def sl2_coboundary_bialgebra() -> LieBialgebra:
    """sl(2) with cobracket ``X -> [X, e ^ f]``."""
    g = sl2()
    r = Multivector.basis(3, 1, 2)
    gstar = LieAlgebra("sl2*", coboundary_dual_constants(g, r))
    return LieBialgebra(g, gstar)
