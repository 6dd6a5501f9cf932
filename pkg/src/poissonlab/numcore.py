"""Numerical kernel: dual numbers, directional derivatives, exterior calculus in a chart.

All charts are global vector-space charts, so points, vectors and covectors are
plain 1-d arrays. Fields are callables on such arrays. Any callable written in
terms of arithmetic, ``@`` and the functions exported here (``sin``, ``exp``,
``expm``, ``logm``, ``inv``, ``concat``...) also accepts a :class:`Dual` array and
can then be differentiated exactly with ``mode="dual"``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from poissonlab.errors import EvaluationError, SingularSystemError

#: Default central-difference step; inputs are assumed scaled to O(1).
DEFAULT_STEP = 1e-5
#: Pivots below this magnitude make :func:`solve` refuse the system.
PIVOT_THRESHOLD = 1e-10

CENTRAL = "central"
DUAL = "dual"


# ---------------------------------------------------------------------------
# Dual numbers
# ---------------------------------------------------------------------------


class Dual:
    """Array-valued dual number ``re + du*eps`` with ``eps**2 = 0``.

    ``re`` and ``du`` are float arrays of one shape. Numpy arrays on the left of
    an operator defer to the reflected method here (``__array_ufunc__ = None``).
    """

    __slots__ = ("re", "du")
    __array_ufunc__ = None

    def __init__(self, re, du=None):
        re = np.asarray(re, dtype=float)
        if du is None:
            du = np.zeros_like(re)
        else:
            du = np.asarray(du, dtype=float)
            if du.shape != re.shape:
                du = np.broadcast_to(du, re.shape).copy()
        self.re = re
        self.du = du

    # shape plumbing -------------------------------------------------------
    @property
    def shape(self):
        return self.re.shape

    @property
    def ndim(self):
        return self.re.ndim

    @property
    def size(self):
        return self.re.size

    @property
    def T(self) -> "Dual":
        return Dual(self.re.T, self.du.T)

    def __len__(self):
        return len(self.re)

    def __getitem__(self, key) -> "Dual":
        return Dual(self.re[key], self.du[key])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def reshape(self, *shape) -> "Dual":
        return Dual(self.re.reshape(*shape), self.du.reshape(*shape))

    def sum(self, axis=None) -> "Dual":
        return Dual(self.re.sum(axis=axis), self.du.sum(axis=axis))

    def __repr__(self):
        return f"Dual({self.re!r}, {self.du!r})"

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _parts(other):
        if isinstance(other, Dual):
            return other.re, other.du
        return np.asarray(other, dtype=float), 0.0

    def __add__(self, other):
        r, d = self._parts(other)
        return Dual(self.re + r, self.du + d)

    __radd__ = __add__

    def __sub__(self, other):
        r, d = self._parts(other)
        return Dual(self.re - r, self.du - d)

    def __rsub__(self, other):
        r, d = self._parts(other)
        return Dual(r - self.re, d - self.du)

    def __neg__(self):
        return Dual(-self.re, -self.du)

    def __pos__(self):
        return self

    def __mul__(self, other):
        r, d = self._parts(other)
        return Dual(self.re * r, self.re * d + self.du * r)

    __rmul__ = __mul__

    def __truediv__(self, other):
        r, d = self._parts(other)
        return Dual(self.re / r, (self.du * r - self.re * d) / (r * r))

    def __rtruediv__(self, other):
        r, d = self._parts(other)
        return Dual(r / self.re, (d * self.re - r * self.du) / (self.re * self.re))

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("Dual only supports integer powers; use exp/log")
        if k == 0:
            return Dual(np.ones_like(self.re))
        return Dual(self.re**k, k * self.re ** (k - 1) * self.du)

    def __matmul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re @ other.re, self.re @ other.du + self.du @ other.re)
        r = np.asarray(other, dtype=float)
        return Dual(self.re @ r, self.du @ r)

    def __rmatmul__(self, other):
        r = np.asarray(other, dtype=float)
        return Dual(r @ self.re, r @ self.du)


def is_dual(x) -> bool:
    return isinstance(x, Dual)


def real(x):
    """Real part of a dual array; plain arrays pass through."""
    return x.re if isinstance(x, Dual) else np.asarray(x, dtype=float)


def tangent(x):
    """Infinitesimal part of a dual array; zero for plain arrays."""
    return x.du if isinstance(x, Dual) else np.zeros_like(np.asarray(x, dtype=float))


def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.re), np.cos(x.re) * x.du)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.re), -np.sin(x.re) * x.du)
    return np.cos(x)


def exp(x):
    if isinstance(x, Dual):
        e = np.exp(x.re)
        return Dual(e, e * x.du)
    return np.exp(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = np.sqrt(x.re)
        return Dual(s, x.du / (2.0 * s))
    return np.sqrt(x)


def concat(parts: Sequence) -> np.ndarray | Dual:
    """Concatenate 1-d pieces, any of which may be dual."""
    if any(isinstance(p, Dual) for p in parts):
        return Dual(
            np.concatenate([real(p).ravel() for p in parts]),
            np.concatenate([tangent(p).ravel() for p in parts]),
        )
    return np.concatenate([np.asarray(p, dtype=float).ravel() for p in parts])


def stack(parts: Sequence, axis: int = 0) -> np.ndarray | Dual:
    if any(isinstance(p, Dual) for p in parts):
        return Dual(
            np.stack([real(p) for p in parts], axis=axis),
            np.stack([tangent(p) for p in parts], axis=axis),
        )
    return np.stack([np.asarray(p, dtype=float) for p in parts], axis=axis)


def _block(fn, x: Dual) -> Dual:
    # f([[A, E], [0, A]]) = [[f(A), Df(A)[E]], [0, f(A)]]
    k = x.re.shape[0]
    big = np.zeros((2 * k, 2 * k))
    big[:k, :k] = x.re
    big[k:, k:] = x.re
    big[:k, k:] = x.du
    out = fn(big)
    return Dual(out[:k, :k], out[:k, k:])


def expm(a):
    """Matrix exponential, with Frechet derivative for dual input."""
    if isinstance(a, Dual):
        return _block(scipy.linalg.expm, a)
    return scipy.linalg.expm(np.asarray(a, dtype=float))


def _sqrt_db(a: np.ndarray, iters: int = 40) -> np.ndarray:
    # Denman-Beavers iteration
    y = a.copy()
    z = np.eye(a.shape[0])
    for _ in range(iters):
        y_next = 0.5 * (y + np.linalg.inv(z))
        z = 0.5 * (z + np.linalg.inv(y))
        if np.linalg.norm(y_next - y, ord=np.inf) <= 1e-15 * max(1.0, np.linalg.norm(y_next, ord=np.inf)):
            return y_next
        y = y_next
    return y


def _log_series(a: np.ndarray, nterms: int) -> np.ndarray:
    eye = np.eye(a.shape[0])
    z = (a - eye) @ np.linalg.inv(a + eye)
    z2 = z @ z
    term = z.copy()
    total = z.copy()
    for j in range(1, nterms):
        term = term @ z2
        total = total + term / (2 * j + 1)
    return 2.0 * total


def logm(a, reduce_to: float = 0.3):
    """Principal matrix logarithm by inverse scaling and squaring.

    Square roots are taken until ``||A - I||_F <= reduce_to``; the remaining log
    is summed from the artanh series. The root count and series length are fixed
    from the real part so dual input gets the matching Frechet derivative.
    """
    a_re = real(a)
    eye = np.eye(a_re.shape[0])
    roots = 0
    probe = a_re
    while np.linalg.norm(probe - eye) > reduce_to:
        probe = _sqrt_db(probe)
        roots += 1
        if roots > 40:
            raise EvaluationError("logm: square-root reduction did not converge")
    z = np.linalg.norm((probe - eye) @ np.linalg.inv(probe + eye))
    nterms = 4
    while z ** (2 * nterms + 1) > 1e-19 and nterms < 200:
        nterms += 1
    nterms += 3  # headroom for the derivative block

    def run(m):
        for _ in range(roots):
            m = _sqrt_db(m)
        return _log_series(m, nterms) * (2.0**roots)

    if isinstance(a, Dual):
        return _block(run, a)
    return run(np.asarray(a, dtype=float))


def inv(a):
    """Matrix inverse; dual input gets ``d(A^-1) = -A^-1 dA A^-1``."""
    if isinstance(a, Dual):
        ai = np.linalg.inv(a.re)
        return Dual(ai, -ai @ a.du @ ai)
    return np.linalg.inv(np.asarray(a, dtype=float))


# ---------------------------------------------------------------------------
# Charts and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    dim: int
    label: str = ""

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError(f"chart dimension must be non-negative, got {self.dim}")


@dataclass(frozen=True)
class ScalarField:
    chart: Chart
    fn: Callable

    def __call__(self, x):
        return self.fn(x)


@dataclass(frozen=True)
class OneFormField:
    chart: Chart
    fn: Callable

    def __call__(self, x):
        return self.fn(x)


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    fn: Callable

    def __call__(self, x):
        return self.fn(x)


def _check_finite(value, where):
    arr = real(value)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(f"non-finite value at {where}")
    return value


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def diff_directional(f: Callable, x, v, mode: str = CENTRAL, h: float = DEFAULT_STEP):
    """Directional derivative ``<df(x), v>`` of a scalar or array valued map."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if mode not in (DUAL, CENTRAL):
        raise ValueError(f"unknown differentiation mode {mode!r}")
    # non-finite intermediates are reported below as EvaluationError
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if mode == DUAL:
            out = f(Dual(x, v))
            result = tangent(out) if isinstance(out, Dual) else np.zeros_like(np.asarray(out, dtype=float))
        else:
            result = (np.asarray(real(f(x + h * v))) - np.asarray(real(f(x - h * v)))) / (2.0 * h)
    _check_finite(result, x)
    return float(result) if np.ndim(result) == 0 else result


def gradient(f: Callable, x, mode: str = CENTRAL, h: float = DEFAULT_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    eye = np.eye(x.size)
    return np.array([diff_directional(f, x, eye[i], mode, h) for i in range(x.size)], dtype=float)


def jacobian(fmap: Callable, x, mode: str = CENTRAL, h: float = DEFAULT_STEP) -> np.ndarray:
    """Matrix ``J[i, j] = d fmap_i / d x_j``."""
    x = np.asarray(x, dtype=float)
    eye = np.eye(x.size)
    cols = [np.atleast_1d(diff_directional(fmap, x, eye[j], mode, h)) for j in range(x.size)]
    if not cols:
        return np.zeros((np.size(real(fmap(x))), 0))
    return np.stack(cols, axis=1)


def curve_velocity(gamma: Callable, t0: float = 0.0, h: float = DEFAULT_STEP, mode: str = CENTRAL) -> np.ndarray:
    """Velocity of a curve at ``t0``; central differences unless ``mode="dual"``."""
    if mode == DUAL:
        out = gamma(Dual(np.asarray(t0, dtype=float), 1.0))
        vel = tangent(out) if isinstance(out, Dual) else np.zeros_like(np.asarray(out, dtype=float))
    else:
        vel = (np.asarray(real(gamma(t0 + h)), dtype=float) - np.asarray(real(gamma(t0 - h)), dtype=float)) / (2.0 * h)
    _check_finite(vel, t0)
    return np.asarray(vel, dtype=float)


def exterior_d1(form: Callable, x, v, w, h: float = DEFAULT_STEP) -> float:
    """``d(form)(v, w)`` at ``x`` for constant vector fields ``v, w`` in the chart."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    dvw = diff_directional(lambda y: np.dot(real(form(y)), w), x, v, CENTRAL, h)
    dwv = diff_directional(lambda y: np.dot(real(form(y)), v), x, w, CENTRAL, h)
    return dvw - dwv


def exterior_d1_matrix(form: Callable, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Matrix ``W`` with ``d(form)(v, w) = v @ W @ w``, from one Jacobian."""
    jac = jacobian(lambda y: real(form(y)), x, CENTRAL, h)
    # d(lambda)(e_a, e_b) = d_a lambda_b - d_b lambda_a
    return jac.T - jac


def lie_derivative_oneform(field: Callable, form: Callable, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """``(L_X psi)_i = X^j d_j psi_i + psi_j d_i X^j`` at ``x``."""
    x = np.asarray(x, dtype=float)
    jpsi = jacobian(lambda y: real(form(y)), x, CENTRAL, h)
    jx = jacobian(lambda y: real(field(y)), x, CENTRAL, h)
    return jpsi @ np.asarray(real(field(x))) + jx.T @ np.asarray(real(form(x)))


def vector_field_bracket(u: Callable, v: Callable, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Chart bracket ``[U, V] = DV.U - DU.V``."""
    x = np.asarray(x, dtype=float)
    ju = jacobian(lambda y: real(u(y)), x, CENTRAL, h)
    jv = jacobian(lambda y: real(v(y)), x, CENTRAL, h)
    return jv @ np.asarray(real(u(x))) - ju @ np.asarray(real(v(x)))


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------


def solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by partially pivoted LU, refusing tiny pivots."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"solve needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return np.zeros_like(b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)  # singularity is reported via the pivot test
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    smallest = np.min(np.abs(np.diag(lu)))
    if smallest < PIVOT_THRESHOLD:
        raise SingularSystemError(f"pivot {smallest:.3e} below threshold {PIVOT_THRESHOLD:.0e}")
    return scipy.linalg.lu_solve((lu, piv), b)


# ---------------------------------------------------------------------------
# Seeded test-function families
# ---------------------------------------------------------------------------


def coordinate_function(chart: Chart, i: int) -> ScalarField:
    return ScalarField(chart, lambda x, i=i: x[i])


def random_polynomial(chart: Chart, degree: int, rng: np.random.Generator) -> ScalarField:
    """Dense polynomial of the given degree (<= 3), coefficients uniform in [-1, 1]."""
    if degree not in (1, 2, 3):
        raise ValueError("degree must be 1, 2 or 3")
    n = chart.dim
    c0 = rng.uniform(-1, 1)
    c1 = rng.uniform(-1, 1, n)
    c2 = rng.uniform(-1, 1, (n, n)) if degree >= 2 else np.zeros((n, n))
    c3 = rng.uniform(-1, 1, (n * n, n)) if degree >= 3 else None

    def fn(x):
        val = c0 + c1 @ x
        if degree >= 2:
            val = val + x @ (c2 @ x)
        if c3 is not None:
            m = (c3 @ x).reshape(n, n)
            val = val + x @ (m @ x)
        return val

    return ScalarField(chart, fn)


def test_functions(chart: Chart, rng: np.random.Generator, n_random: int = 2) -> list[ScalarField]:
    """Coordinate functions, then ``n_random`` quadratics and ``n_random`` cubics."""
    fns = [coordinate_function(chart, i) for i in range(chart.dim)]
    fns += [random_polynomial(chart, 2, rng) for _ in range(n_random)]
    fns += [random_polynomial(chart, 3, rng) for _ in range(n_random)]
    return fns


test_functions.__test__ = False  # not a pytest test
