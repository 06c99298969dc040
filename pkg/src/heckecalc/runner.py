"""Check suites and the full verification run."""

from __future__ import annotations

from itertools import product
from typing import Callable

from . import __version__
from .config import RunConfig
from .cosets import GAMMA, LEFT, RIGHT, CosetEngine, CosetVector, inner, level_embed
from .hecke import HeckeAlgebra, NotLiftable
from .report import NOT_APPLICABLE, SKIPPED, CheckResult, VerificationReport, exact

# --------------------------------------------------------------------------
# finite pairs, no representation needed


def hecke_checks(algebra: HeckeAlgebra) -> list[CheckResult]:
    from .rep import UniformIndicatorModel

    pair = algebra.pair
    reps = algebra.double_cosets()
    model = UniformIndicatorModel(algebra.engine)
    fmt = pair.format

    def first_failure(cases, pred):
        for case in cases:
            if not pred(*case):
                return ", ".join(fmt(s) for s in case)
        return None

    prod = {(a, b): algebra.mul(algebra.basis(a), algebra.basis(b)) for a, b in product(reps, repeat=2)}
    oracle = first_failure(product(reps, repeat=2),
                           lambda a, b: prod[a, b] == model.mul(algebra.basis(a), algebra.basis(b)))

    def assoc(a, b, c):
        ha, hb, hc = (algebra.basis(x) for x in (a, b, c))
        return algebra.mul(prod[a, b], hc) == algebra.mul(ha, prod[b, c])

    right_reps = sorted({pair.canon_right(g) for g in pair.elements()})

    def module(a, b, y):
        v = algebra.coset_vector(y)
        lhs = algebra.act_left(prod[a, b], v)
        return lhs == algebra.act_left(algebra.basis(a), algebra.act_left(algebra.basis(b), v))

    def involution(a, b):
        ha, hb = algebra.basis(a), algebra.basis(b)
        return (algebra.star(prod[a, b]) == algebra.mul(algebra.star(hb), algebra.star(ha))
                and algebra.star(algebra.star(ha)) == ha)

    def mass(a, b):
        return algebra.mass(prod[a, b]) == algebra.mass(algebra.basis(a)) * algebra.mass(algebra.basis(b))

    def unit(a):
        h = algebra.basis(a)
        return algebra.mul(algebra.unit(), h) == h == algebra.mul(h, algebra.unit())

    def instances(a, y):
        inst = algebra.action_instance(a, y)
        return bool(algebra.verify_relation(inst, "elements")) and bool(algebra.verify_relation(inst, "cosets"))

    def right_action_mirror(a, y):
        # [x Gamma][Gamma s Gamma] through left decompositions, compared with inverses
        v = CosetVector.from_keys([algebra.engine.left(y)], GAMMA, LEFT)
        out = algebra.act_right(algebra.basis(a), v)
        mirrored = algebra.act_left(algebra.star(algebra.basis(a)), algebra.coset_vector(pair.inv(y)))
        return {algebra.engine.right(pair.inv(k.rep)): c for k, c in out} == dict(mirrored.coeffs)

    return [
        exact("hecke.oracle_equivalence", "Def1", oracle is None, oracle),
        exact("hecke.unit", "Def1", first_failure([(a,) for a in reps], unit) is None),
        exact("hecke.associative", "Def1", (w := first_failure(product(reps, repeat=3), assoc)) is None, w),
        exact("hecke.module", "Def1", (w := first_failure(product(reps, reps, right_reps), module)) is None, w),
        exact("hecke.involution", "Def1", (w := first_failure(product(reps, repeat=2), involution)) is None, w),
        exact("hecke.mass", "Def1", (w := first_failure(product(reps, repeat=2), mass)) is None, w),
        exact("hecke.action_instances", "Def1-(1)",
              (w := first_failure(product(reps, right_reps), instances)) is None, w),
        exact("hecke.right_action", "Def1",
              (w := first_failure(product(reps, right_reps), right_action_mirror)) is None, w),
    ]


def coset_checks(engine: CosetEngine) -> list[CheckResult]:
    pair = engine.pair
    algebra = HeckeAlgebra(engine)
    reps = algebra.double_cosets()
    partition, index_ok, adjoint_ok = True, True, True
    wpart = windex = wadj = None
    for s in reps:
        double = pair.double_coset(s)
        for keys in (engine.decompose_double_right(s), engine.decompose_double_left(s)):
            sets = [engine.coset_elements(k) for k in keys]
            if sum(map(len, sets)) != len(double) or frozenset().union(*sets) != double:
                partition, wpart = False, pair.format(s)
        n = engine.stabilizer_index(s)
        if not (len(engine.decompose_double_right(s)) == len(engine.decompose_double_left(s)) == n):
            index_ok, windex = False, pair.format(s)
        if engine.stabilizer_index(pair.inv(s)) != n:
            adjoint_ok, wadj = False, pair.format(s)

    iso_ok, wiso = True, None
    lift_ok, wlift = True, None
    for s in reps:
        finer = engine.level_of(s)
        if finer.is_gamma:
            continue
        for side in (RIGHT, LEFT):
            transversal = sorted({engine.canon(side, GAMMA, g) for g in pair.elements()})
            basis = [CosetVector.basis(k) for k in transversal]
            embedded = [level_embed(engine, v, finer) for v in basis]
            for i, j in product(range(len(basis)), repeat=2):
                if inner(engine, embedded[i], embedded[j]) != inner(engine, basis[i], basis[j]):
                    iso_ok, wiso = False, f"{pair.format(s)}: {i}, {j}"
        for a in reps:
            for y in sorted({pair.canon_right(g) for g in pair.elements()}):
                inst = algebra.action_instance(a, y)
                fine = algebra.split_relation(inst, finer)
                try:
                    lifted = algebra.refine_relation(fine, GAMMA)
                except NotLiftable:
                    lift_ok, wlift = False, f"{pair.format(a)}, {pair.format(y)}"
                    continue
                if not algebra.verify_relation(lifted):
                    lift_ok, wlift = False, f"{pair.format(a)}, {pair.format(y)}"
    return [
        exact("coset.partition", "intro", partition, wpart),
        exact("coset.index_consistency", "intro", index_ok, windex),
        exact("coset.adjoint_index", "Def1", adjoint_ok, wadj),
        exact("coset.embed_isometric", "Rem9", iso_ok, wiso),
        exact("coset.refine_split_instances", "Rem9", lift_ok, wlift),
    ]


def uniform_checks(engine: CosetEngine) -> list[CheckResult]:
    from .rep import UniformIndicatorModel

    model = UniformIndicatorModel(engine)
    algebra = HeckeAlgebra(engine)
    out = [
        exact("uniform.rel0_exact", "Def3-(0)", model.relation_0_exact()),
        exact("uniform.rel2_exact", "Def3-(2)", model.relation_2_exact(algebra)),
    ]
    out.extend(model.relation_3_negative_control())
    return out


# --------------------------------------------------------------------------
# finite pairs with a representation


def rep_checks(engine: CosetEngine, config: RunConfig) -> list[CheckResult]:
    from .phi import DiagonalPhi, gram
    from .rep import RepEngine, build_t, check_regular_extension, load_extension

    pi = load_extension(engine.pair, config.pi_path())
    pre = check_regular_extension(pi, config.tolerance)
    if any(r.failed for r in pre):
        return pre
    rep = RepEngine(engine, build_t(pi, config.tolerance), config.tolerance, pi=pi)
    out = rep.check_all()
    out.extend(DiagonalPhi(rep).check_all())
    out.extend(gram(rep).checks(config.tolerance))
    return out


# --------------------------------------------------------------------------
# the modular pair


def modular_checks(engine: CosetEngine, config: RunConfig) -> list[CheckResult]:
    from .modular import (PsiUndefined, build_psi, build_tree_ball, coset_count_checks,
                          hecke_recursion_checks, psi_checks, radius_bound, spectrum_checks,
                          tree_invariants)

    pair = engine.pair
    p = pair.p
    algebra = HeckeAlgebra(engine)
    out = coset_count_checks(engine)
    out.extend(hecke_recursion_checks(algebra))
    radius = 4 if p <= 3 else 3
    ball = build_tree_ball(engine, radius, max_radius=max(radius, radius_bound(p)))
    out.extend(tree_invariants(ball))
    try:
        out.extend(psi_checks(ball, build_psi(ball)))
    except PsiUndefined as exc:
        out.append(CheckResult("psi", "Rem8-psi", NOT_APPLICABLE, detail=str(exc)))
    out.extend(spectrum_checks(engine, 6 if p <= 3 else 4))
    return out


# --------------------------------------------------------------------------


Suite = Callable[[CosetEngine, RunConfig], list[CheckResult]]

FINITE_SUITES: list[tuple[tuple[str, ...], Suite]] = [
    (("hecke",), lambda eng, cfg: hecke_checks(HeckeAlgebra(eng))),
    (("coset",), lambda eng, cfg: coset_checks(eng)),
    (("uniform",), lambda eng, cfg: uniform_checks(eng)),
    (("rep", "rel", "phi", "gram"), rep_checks),
]
MODULAR_SUITES: list[tuple[tuple[str, ...], Suite]] = [
    (("modular", "tree", "psi"), modular_checks),
]
REP_PREFIXES = ("rep", "rel", "phi", "gram", "uniform")


def _wanted(config: RunConfig, prefixes: tuple[str, ...]) -> bool:
    for s in config.select:
        if s == "all":
            return True
        head = s.split(".")[0]
        if head in prefixes:
            return True
    return False


def run_all(config: RunConfig) -> VerificationReport:
    """Run every selected check serially, in a fixed order."""
    report = VerificationReport(config=config.echo(), tool_version=__version__)
    if not config.select:
        return report
    pair = config.build_pair()
    engine = CosetEngine(pair)
    if pair.is_finite:
        for prefixes, suite in FINITE_SUITES:
            if not _wanted(config, prefixes):
                continue
            if suite is rep_checks and config.pi is None:
                results = [CheckResult(p, "Thm4", SKIPPED, detail="no pi file configured")
                           for p in prefixes]
            else:
                results = suite(engine, config)
            report.extend(r for r in results if config.selected(r.check_id)
                          or (r.status == SKIPPED and _wanted(config, (r.check_id,))))
    else:
        for prefixes, suite in MODULAR_SUITES:
            if _wanted(config, prefixes):
                report.extend(r for r in suite(engine, config) if config.selected(r.check_id))
        for prefix in REP_PREFIXES:
            if _wanted(config, (prefix,)):
                report.records.append(CheckResult(prefix, "Thm4", NOT_APPLICABLE,
                                                  detail="representation checks need a finite pair"))
    return report
