"""Named verification suites.

Every check draws from its own generator seeded by ``(seed, suite, check)``,
so results do not depend on which other checks ran or in what order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from poissonlab import groupoids as gp
from poissonlab import liealg
from poissonlab import numcore as nc
from poissonlab import poisson as ps
from poissonlab import symplectic as sy
from poissonlab.errors import ConfigError, PoissonLabError
from poissonlab.harness.config import RunConfig, SuiteConfig
from poissonlab.harness.report import ReportRecord

#: every anchor a record may carry
ANCHORS = (
    "§1", "§2", "§4", "§5",
    "Eq. 1", "Eq. 2", "Eq. 3", "Eq. 5", "Eq. 6", "Eq. 7", "Eq. 10", "Eq. 11",
    "Eq. 17", "Eq. 18", "Eq. 19",
    "Eq. wd", "Eq. cotst", "Eq. add", "Eq. cotid", "Eq. inverses",
    "Definition 2.1", "Definition 4.1", "Theorem 2.2", "Prop. 2.3", "Prop. 2.6", "Prop. 2.7", "Lemma 2.5",
)  # fmt: skip


class Context:
    def __init__(self, cfg: RunConfig, suite: str):
        self.cfg = cfg
        self.suite = suite
        self.sc: SuiteConfig = cfg.suite(suite)
        self.records: list[ReportRecord] = []

    @property
    def h(self) -> float:
        return self.cfg.step

    def rng(self, check: str) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, zlib.crc32(self.suite.encode()), zlib.crc32(check.encode())])

    def samples(self, key: str, default: int) -> int:
        return self.sc.get_int(key, default)

    def _record(self, check: str, anchor: str, residual: float, tol: float, samples: int, error: str = "") -> None:
        assert anchor in ANCHORS, anchor
        self.records.append(ReportRecord(self.suite, check, anchor, float(residual), float(tol), int(samples), self.cfg.seed, error))

    def check(self, check: str, anchor: str, tol: float, samples: int, fn: Callable[[np.random.Generator], float]) -> None:
        """Run ``fn`` and record its residual; failures to build inputs become error records."""
        base = check.split("[", 1)[0]
        tol = self.sc.tol(base, tol)
        try:
            value = float(fn(self.rng(check)))
        except (PoissonLabError, ValueError, KeyError, ArithmeticError) as exc:
            self._record(check, anchor, float("inf"), tol, samples, f"{type(exc).__name__}: {exc}")
            return
        self._record(check, anchor, value, tol, samples)

    def multi(self, label: str, parts: dict[str, tuple[str, float]], samples: int, fn: Callable[[np.random.Generator], dict]) -> None:
        """One computation, several records ``key[label]`` (``parts`` maps key to anchor and tolerance)."""
        seed_key = f"*[{label}]"
        try:
            values = fn(self.rng(seed_key))
            error = ""
        except (PoissonLabError, ValueError, KeyError, ArithmeticError) as exc:
            values, error = {}, f"{type(exc).__name__}: {exc}"
        for key, (anchor, tol) in parts.items():
            tol = self.sc.tol(key, tol)
            if error:
                self._record(f"{key}[{label}]", anchor, float("inf"), tol, samples, error)
            else:
                self._record(f"{key}[{label}]", anchor, float(values[key]), tol, samples)


@dataclass(frozen=True)
class Suite:
    name: str
    anchors: tuple[str, ...]
    summary: str
    runner: Callable[[Context], None]


def _points(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    return rng.uniform(-1, 1, (count, dim))


# ---------------------------------------------------------------------------
# Structures from text
# ---------------------------------------------------------------------------


def parse_structure(text: str, cfg: RunConfig) -> ps.PoissonStructure:
    """``lie-poisson <algebra>``, ``constant-symplectic <dim>``, ``tangent-lift <structure>``,
    ``zero <dim>`` or ``poly <dim> | i,j: <polynomial> | ...``."""
    text = text.strip()
    head, _, rest = text.partition(" ")
    rest = rest.strip()
    try:
        if head == "lie-poisson":
            return ps.lie_poisson(cfg.algebra(rest))
        if head == "constant-symplectic":
            return ps.constant_symplectic(int(rest))
        if head == "zero":
            return ps.zero_structure(int(rest))
        if head == "tangent-lift":
            return ps.tangent_lift(parse_structure(rest, cfg))
        if head == "poly":
            dim_text, *entries = rest.split("|")
            dim = int(dim_text)
            table = {}
            for entry in entries:
                idx, _, poly = entry.partition(":")
                i, j = (int(t) for t in idx.split(","))
                table[(i, j)] = poly.strip()
            return ps.polynomial_structure(dim, table, f"poly {dim}")
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cannot build structure {text!r}: {exc}") from None
    raise ConfigError(f"unknown structure kind in {text!r}")


def parse_instance(text: str, cfg: RunConfig) -> gp.GroupoidInstance:
    parts = text.split()
    if not parts:
        raise ConfigError("empty groupoid declaration")
    kinds = []
    while parts and parts[0] in ("tangent-lift", "cotangent-lift"):
        kinds.append(parts.pop(0))
    if not parts:
        raise ConfigError(f"groupoid declaration {text!r} has no base instance")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "pair":
            inst = gp.PairGroupoid(int(args[0]))
        elif kind == "action":
            inst = gp.ActionGroupoid(cfg.group(args[0]), args[1] if len(args) > 1 else "coadjoint")
        elif kind == "cotangent-group":
            inst = gp.CotangentGroupGroupoid(cfg.group(args[0]))
        elif kind == "group":
            inst = gp.GroupAsGroupoid(cfg.group(args[0]))
        else:
            raise ConfigError(f"unknown groupoid kind {kind!r}")
    except (IndexError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot build groupoid {text!r}: {exc}") from None
    for wrap in reversed(kinds):
        inst = gp.TangentLiftGroupoid(inst) if wrap == "tangent-lift" else gp.CotangentLiftGroupoid(inst)
    return inst


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def _algebra(ctx: Context) -> None:
    for name in ctx.sc.get_list("algebras", ["so3", "sl2", "h3", "abelian3"]):
        ctx.check(f"antisymmetry[{name}]", "§1", 0.0, 1, lambda rng, n=name: liealg.antisymmetry_defect(ctx.cfg.algebra(n)))
        ctx.check(f"jacobi[{name}]", "§1", 1e-12, 1, lambda rng, n=name: liealg.jacobi_residual(ctx.cfg.algebra(n)))
    for name in ctx.sc.get_list("broken", ["broken"]):
        # the Jacobi defect of the injected algebra must be detected (hand value 1)
        ctx.check(f"detects-broken[{name}]", "§1", 0.0, 1, lambda rng, n=name: max(0.0, 1.0 - liealg.jacobi_residual(ctx.cfg.algebra(n))))


def _lie_poisson(ctx: Context) -> None:
    count = ctx.samples("samples", 100)
    for name in ctx.sc.get_list("algebras", ["so3", "sl2", "h3", "abelian3"]):

        def bracket(rng, n=name):
            g = ctx.cfg.algebra(n)
            return ps.lie_poisson_bracket_residual(g, _points(rng, count, g.dim))

        def jacobi(rng, n=name):
            g = ctx.cfg.algebra(n)
            return ps.jacobi_residual_pts(ps.lie_poisson(g), _points(rng, count, g.dim), ctx.h)

        ctx.check(f"bracket-identity[{name}]", "Eq. 5", 1e-8, count, bracket)
        ctx.check(f"jacobi-points[{name}]", "§1", 1e-7, count, jacobi)


def _cotangent_algebroid(ctx: Context) -> None:
    count = ctx.samples("samples", 50)
    for text in ctx.sc.get_list("structures", ["lie-poisson so3", "constant-symplectic 4"], sep=";"):

        def residuals(rng, t=text):
            pi = parse_structure(t, ctx.cfg)
            r = ps.cotangent_algebroid_residuals(pi, _points(rng, count, pi.dim), rng, ctx.h)
            jac = ps.jacobi_residual_pts(pi, _points(rng, count, pi.dim), ctx.h)
            return {"exactness": r.exactness, "anchor-morphism": r.anchor_morphism, "leibniz": r.leibniz, "jacobi-points": jac}

        ctx.multi(
            text,
            {"exactness": ("Eq. 3", 1e-6), "anchor-morphism": ("§1", 1e-6), "leibniz": ("§1", 1e-6), "jacobi-points": ("§1", 1e-7)},
            count,
            residuals,
        )


DEFAULT_INSTANCES = [
    "pair 3",
    "action SO3 coadjoint",
    "action H3 coadjoint",
    "cotangent-group R3",
    "cotangent-group H3",
    "cotangent-group SO3",
    "cotangent-group SL2",
]


def _groupoid_axioms(ctx: Context) -> None:
    count = ctx.samples("samples", 100)
    lift_count = ctx.samples("lift_samples", 30)
    for text in ctx.sc.get_list("instances", DEFAULT_INSTANCES, sep=";"):
        ctx.check(f"axioms[{text}]", "§1", 1e-8, count, lambda rng, t=text: max(gp.axiom_residuals(parse_instance(t, ctx.cfg), rng, count).values()))
        ctx.check(
            f"tangent-lift-axioms[{text}]",
            "§2",
            1e-6,
            lift_count,
            lambda rng, t=text: max(gp.axiom_residuals(gp.TangentLiftGroupoid(parse_instance(t, ctx.cfg)), rng, lift_count).values()),
        )
        ctx.check(f"interchange[{text}]", "Eq. 7", 1e-6, lift_count, lambda rng, t=text: gp.interchange_residual(parse_instance(t, ctx.cfg), rng, lift_count))


def _action_isomorphism(ctx: Context) -> None:
    count = ctx.samples("samples", 100)
    for name in ctx.sc.get_list("groups", ["R3", "H3", "SO3", "SL2"]):

        def run(rng, n=name):
            r = gp.act_iso_residual(ctx.cfg.group(n), rng, count)
            rt = r.pop("round-trip")
            return {"morphism": max(r.values()), "round-trip": rt}

        ctx.multi(name, {"morphism": ("§2", 1e-9), "round-trip": ("§2", 1e-9)}, count, run)


def _lagrangian_graph(ctx: Context) -> None:
    count = ctx.samples("samples", 100)
    pairs = ctx.samples("pairs", 50)
    closed = ctx.samples("closedness_samples", 20)
    for name in ctx.sc.get_list("groups", ["R3", "H3", "SO3"]):
        grp = lambda n=name: ctx.cfg.group(n)
        ctx.check(f"graph-isotropy[{name}]", "Eq. 10", 1e-5, count, lambda rng, g=grp: sy.graph_isotropy_residual(g(), rng, count, ctx.h))
        ctx.check(f"dimensions[{name}]", "Definition 2.1", 0.0, 1, lambda rng, g=grp: sy.dimension_identities(g())["defect"])
        ctx.check(f"identity-isotropy[{name}]", "Theorem 2.2", 1e-6, count, lambda rng, g=grp: sy.identity_lagrangian_residual(g(), rng, count, ctx.h))
        ctx.check(f"inversion-antisymplectic[{name}]", "Eq. 11", 1e-5, count, lambda rng, g=grp: sy.inversion_antisymplectic_residual(g(), rng, count, ctx.h))
        ctx.check(f"orthogonality[{name}]", "Prop. 2.6", 1e-5, count, lambda rng, g=grp: sy.orthogonality_residual(g(), rng, count, ctx.h))
        ctx.check(f"flat-morphism[{name}]", "Eq. wd", 1e-5, pairs, lambda rng, g=grp: max(sy.omega_flat_morphism_residual(g(), rng, pairs, ctx.h).values()))
        ctx.check(f"omega-closed[{name}]", "§2", 1e-5, closed, lambda rng, g=grp: sy.closedness_residual(sy.CotangentPhaseChart(g(), ctx.h), rng, closed))
        ctx.check(
            f"omega-closed-form[{name}]",
            "§2",
            1e-5,
            closed,
            lambda rng, g=grp: sy.closed_form_residual(sy.CotangentPhaseChart(g(), ctx.h), rng, closed),
        )


def _induced_poisson(ctx: Context) -> None:
    count = ctx.samples("samples", 50)
    map_count = ctx.samples("map_samples", 20)
    basic = ctx.samples("basic_samples", 20)
    for name in ctx.sc.get_list("groups", ["R3", "H3", "SO3"]):

        def run(rng, n=name):
            return sy.induced_base_poisson_residual(ctx.cfg.group(n), rng, count, ctx.h, map_count).as_dict()

        ctx.multi(
            name,
            {"vs-lie-poisson": ("Theorem 2.2", 1e-5), "skewness": ("§2", 1e-6), "beta-poisson-map": ("Theorem 2.2", 1e-5)},
            count,
            run,
        )
        ctx.check(f"basic-identity[{name}]", "§2", 1e-5, basic, lambda rng, n=name: sy.basic_identity_residual(ctx.cfg.group(n), rng, basic, ctx.h))


def _tangent_lift(ctx: Context) -> None:
    count = ctx.samples("samples", 100)
    prop_count = ctx.samples("prop_samples", 30)
    for text in ctx.sc.get_list("structures", ["lie-poisson so3"], sep=";"):

        def courant(rng, t=text):
            pi = parse_structure(t, ctx.cfg)
            lift = ps.tangent_lift(pi, rng)
            f1 = nc.random_polynomial(pi.chart, 3, rng)
            f2 = nc.random_polynomial(pi.chart, 3, rng)
            r1, r2, r3 = ps.courant_residuals(pi, lift, f1, f2, _points(rng, count, 2 * pi.dim), ctx.h)
            return {"courant-linear": r1, "courant-mixed": r2, "courant-basic": r3}

        ctx.multi(text, {"courant-linear": ("§2", 1e-6), "courant-mixed": ("§2", 1e-6), "courant-basic": ("§2", 1e-6)}, count, courant)
    for name in ctx.sc.get_list("groups", ["SO3"]):
        ctx.check(
            f"minus-w-poisson[{name}]",
            "Prop. 2.7",
            1e-4,
            prop_count,
            lambda rng, n=name: sy.tangent_lift_poisson_map_residual(ctx.cfg.group(n), rng, prop_count, ctx.h),
        )


def _cotangent_lift_oracle(ctx: Context) -> None:
    count = ctx.samples("samples", 100)
    wd = ctx.samples("wd_samples", 20)
    for name in ctx.sc.get_list("groups", ["R3", "H3", "SO3", "SL2"]):
        ctx.multi(
            name,
            {
                "source": ("Eq. cotst", 1e-6),
                "target": ("Eq. cotst", 1e-6),
                "multiply": ("Eq. add", 1e-6),
                "identity": ("Eq. cotid", 1e-6),
                "inverse": ("Eq. inverses", 1e-6),
            },
            count,
            lambda rng, n=name: gp.group_lift_oracle_residual(ctx.cfg.group(n), rng, count),
        )

        def well_defined(rng, n=name):
            CT = gp.CotangentLiftGroupoid(gp.CotangentGroupGroupoid(ctx.cfg.group(n)))
            return gp.well_definedness_residual(CT, rng, wd)

        ctx.check(f"well-defined[{name}]", "Eq. wd", 1e-7, wd, well_defined)


def _bialgebra_double(ctx: Context) -> None:
    count = ctx.samples("samples", 100)
    so3 = liealg.so3()
    cases = {
        "so3+zero": liealg.LieBialgebra(so3, liealg.abelian(3)),
        "sl2-coboundary": liealg.sl2_coboundary_bialgebra(),
    }
    for label, b in cases.items():
        ctx.check(f"cocycle[{label}]", "Eq. 19", 1e-12, 1, lambda rng, b=b: liealg.bialgebra_residual(b))
        ctx.check(f"double-jacobi[{label}]", "§5", 1e-12, 1, lambda rng, b=b: liealg.jacobi_residual(liealg.drinfeld_double(b)))

        def pairing(rng, b=b):
            d = liealg.drinfeld_double(b)
            return liealg.pairing_invariance_residual(d, rng.uniform(-1, 1, (count, 3, d.dim)))

        ctx.check(f"pairing-invariance[{label}]", "§5", 1e-12, count, pairing)

        def d_squared(rng, b=b):
            n = b.g.dim
            worst = 0.0
            for deg in (0, 1):
                for idx in liealg._combos(n, deg) if deg else [()]:
                    p = liealg.Multivector.basis(n, *idx) if deg else liealg.Multivector(0, n, np.ones(1))
                    worst = max(worst, liealg.ce_differential(b, liealg.ce_differential(b, p)).norm_inf())
            return worst

        ctx.check(f"ce-square[{label}]", "§4", 1e-12, 1, d_squared)
    mismatch = liealg.LieBialgebra(so3, so3)
    # detector: the so(3)/so(3) pairing must violate the cocycle identity by more than 0.5
    ctx.check("detects-mismatch[so3/so3]", "Eq. 19", 0.0, 1, lambda rng: max(0.0, 0.5 - liealg.bialgebra_residual(mismatch)))


def _poisson_groupoid(ctx: Context) -> None:
    count = ctx.samples("samples", 50)
    for name in ctx.sc.get_list("groups", ["R3", "H3", "SO3"]):
        ctx.multi(
            name,
            {"graph-coisotropy": ("Definition 4.1", 1e-5), "morphism": ("Eq. 17", 1e-5), "base-map": ("Eq. 18", 1e-5)},
            count,
            lambda rng, n=name: sy.pg_coisotropy_suite(ctx.cfg.group(n), rng, count, ctx.h),
        )


def _algebroid_extraction(ctx: Context) -> None:
    count = ctx.samples("samples", 10)
    ctx.check("anchor-morphism[pair 2]", "§1", 1e-5, count, lambda rng: gp.algebroid_anchor_morphism_residual(gp.PairGroupoid(2), rng, count, ctx.h))
    for name in ctx.sc.get_list("groups", ["H3", "SO3"]):
        grp = lambda n=name: ctx.cfg.group(n)
        ctx.check(
            f"action-bracket[{name}]",
            "§1",
            1e-5,
            count,
            lambda rng, g=grp: gp.action_bracket_residual(gp.ActionGroupoid(g()), rng, count, ctx.h),
        )

        def anchor_vs_lp(rng, g=grp):
            group = g()
            inst = gp.CotangentGroupGroupoid(group)
            lp = ps.lie_poisson(group.right_invariant_algebra())
            worst = 0.0
            for _ in range(count):
                m = rng.uniform(-1, 1, group.dim)
                data = gp.algebroid_extract(inst, m, ctx.h)
                worst = max(worst, float(np.max(np.abs(data.anchor - lp.matrix(m).T @ data.basis[: group.dim]))), data.closure)
            return worst

        ctx.check(f"cotangent-anchor[{name}]", "§1", 1e-5, count, anchor_vs_lp)
        ctx.check(f"inverse-of-a[{name}]", "§2", 1e-7, count, lambda rng, g=grp: gp.inverse_of_a_residual(gp.CotangentGroupGroupoid(g()), rng, count))
        ctx.check(f"translations[{name}]", "Lemma 2.5", 1e-6, count, lambda rng, g=grp: gp.translation_residual(gp.CotangentGroupGroupoid(g()), rng, count))


SUITES: dict[str, Suite] = {
    s.name: s
    for s in (
        Suite("algebra", ("§1",), "antisymmetry and Jacobi of catalog algebras; detection of the broken algebra", _algebra),
        Suite("lie-poisson", ("Eq. 5", "§1"), "{l_X, l_Y} = l_[X,Y] and pointwise Jacobi of Lie-Poisson structures", _lie_poisson),
        Suite("cotangent-algebroid", ("Eq. 3", "§1"), "bracket of 1-forms: [df, dg] = d{f, g}, anchor morphism, Leibniz", _cotangent_algebroid),
        Suite("groupoid-axioms", ("§1", "§2", "Eq. 7"), "groupoid axioms, tangent lifts and the interchange law", _groupoid_axioms),
        Suite("action-isomorphism", ("§2",), "coadjoint action groupoid is isomorphic to T*G", _action_isomorphism),
        Suite(
            "eq10-lagrangian-graph",
            ("Eq. 10", "Eq. 11", "Eq. wd", "Definition 2.1", "Theorem 2.2", "Prop. 2.6", "§2"),
            "T*G is a symplectic groupoid: Lagrangian graph and its consequences",
            _lagrangian_graph,
        ),
        Suite("induced-poisson", ("Theorem 2.2", "§2"), "base structure a o r^-1 is Lie-Poisson and beta is Poisson", _induced_poisson),
        Suite("tangent-lift", ("§2", "Prop. 2.7"), "Courant identities of the tangent lift and the map -w", _tangent_lift),
        Suite(
            "cotangent-lift-oracle",
            ("Eq. cotst", "Eq. add", "Eq. cotid", "Eq. inverses", "Eq. wd"),
            "generic cotangent groupoid of G => pt against the closed form T*G => g*",
            _cotangent_lift_oracle,
        ),
        Suite("bialgebra-double", ("Eq. 19", "§4", "§5"), "Lie bialgebra cocycle identity and the Drinfel'd double", _bialgebra_double),
        Suite("poisson-groupoid", ("Definition 4.1", "Eq. 17", "Eq. 18"), "Poisson groupoid conditions for T*G", _poisson_groupoid),
        Suite("algebroid-extraction", ("§1", "§2", "Lemma 2.5"), "Lie algebroid of a groupoid from right-invariant fields", _algebroid_extraction),
    )
}


def run_suite(cfg: RunConfig, name: str) -> list[ReportRecord]:
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}")
    ctx = Context(cfg, name)
    SUITES[name].runner(ctx)
    return ctx.records
