"""The Hecke algebra of double cosets, its coset actions and relation checks."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .cosets import (GAMMA, LEFT, RIGHT, CosetEngine, CosetKey, CosetVector, Level,
                     LevelError)
from .groups import Element, GroupError


class HeckeError(ValueError):
    pass


class NotLiftable(HeckeError):
    pass


@dataclass(frozen=True)
class HeckeElement:
    """Rational combination of double cosets, keyed by canonical representative."""

    coeffs: Mapping[Element, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {k: Fraction(c) for k, c in self.coeffs.items() if Fraction(c)}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def __add__(self, other: "HeckeElement") -> "HeckeElement":
        acc = dict(self.coeffs)
        for k, c in other.coeffs.items():
            acc[k] = acc.get(k, Fraction(0)) + c
        return HeckeElement(acc)

    def __sub__(self, other: "HeckeElement") -> "HeckeElement":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "HeckeElement":
        s = Fraction(scalar)
        return HeckeElement({k: s * c for k, c in self.coeffs.items()})

    def __iter__(self):
        return iter(self.coeffs.items())

    def __getitem__(self, rep: Element) -> Fraction:
        return self.coeffs.get(rep, Fraction(0))

    def __len__(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class RelationInstance:
    """Two families of pairs (a, b) standing for the sets a*Gamma_T*b."""

    lhs: tuple[tuple[Element, Element], ...]
    rhs: tuple[tuple[Element, Element], ...]
    level: Level = GAMMA


@dataclass(frozen=True)
class RelationVerdict:
    valid: bool
    reason: str = ""
    witness: Element | None = None

    def __bool__(self) -> bool:
        return self.valid


class HeckeAlgebra:
    def __init__(self, engine: CosetEngine):
        self.engine = engine
        self.pair = engine.pair

    # construction ---------------------------------------------------------

    def basis(self, sigma: Element) -> HeckeElement:
        return HeckeElement({self.pair.double_canon(sigma): Fraction(1)})

    def unit(self) -> HeckeElement:
        return self.basis(self.pair.identity)

    def coset_vector(self, *sigmas: Element, side: str = RIGHT) -> CosetVector:
        keys = [self.engine.canon(side, GAMMA, s) for s in sigmas]
        return CosetVector.from_keys(keys, GAMMA, side)

    def double_cosets(self) -> tuple[Element, ...]:
        """All double-coset representatives (finite backend)."""
        pair = self.pair
        return tuple(sorted({pair.double_canon(g) for g in pair.elements()}))

    def index_of(self, rep: Element) -> int:
        return len(self.engine.decompose_double_right(rep))

    # involution and actions -----------------------------------------------

    def star(self, h: HeckeElement) -> HeckeElement:
        pair = self.pair
        acc: dict[Element, Fraction] = {}
        for rep, c in h:
            k = pair.double_canon(pair.inv(rep))
            acc[k] = acc.get(k, Fraction(0)) + c  # rational: conj(c) == c
        return HeckeElement(acc)

    def act_left(self, h: HeckeElement, v: CosetVector) -> CosetVector:
        """[Gamma s Gamma][Gamma y] = sum_j [Gamma x_j y] over Gamma s Gamma = ⊔ Gamma x_j."""
        if v.side != RIGHT or v.level != GAMMA:
            raise LevelError("left action needs right cosets of Gamma")
        pair, engine = self.pair, self.engine
        acc: dict[CosetKey, Fraction] = {}
        for rep, c in h:
            for xj in engine.decompose_double_right(rep):
                for key, c2 in v:
                    out = engine.right(pair.mul(xj.rep, key.rep))
                    acc[out] = acc.get(out, Fraction(0)) + c * c2
        return CosetVector(GAMMA, RIGHT, acc)

    def act_right(self, h: HeckeElement, v: CosetVector) -> CosetVector:
        """[y Gamma][Gamma s Gamma] = sum_i [y s_i Gamma] over Gamma s Gamma = ⊔ s_i Gamma."""
        if v.side != LEFT or v.level != GAMMA:
            raise LevelError("right action needs left cosets of Gamma")
        pair, engine = self.pair, self.engine
        acc: dict[CosetKey, Fraction] = {}
        for rep, c in h:
            for si in engine.decompose_double_left(rep):
                for key, c2 in v:
                    out = engine.left(pair.mul(key.rep, si.rep))
                    acc[out] = acc.get(out, Fraction(0)) + c * c2
        return CosetVector(GAMMA, LEFT, acc)

    def expand(self, h: HeckeElement) -> CosetVector:
        """h applied to [Gamma]: each double coset as the sum of its right cosets."""
        return self.act_left(h, self.coset_vector(self.pair.identity))

    def regroup(self, v: CosetVector) -> HeckeElement:
        """Read a left-Gamma-invariant coset vector as a combination of double cosets."""
        pair = self.pair
        out: dict[Element, Fraction] = {}
        for key, c in v:
            rep = pair.double_canon(key.rep)
            if rep in out:
                continue
            canon_key = self.engine.right(rep)
            if canon_key not in v.coeffs:
                raise HeckeError(f"vector is not a sum of double cosets (missing {canon_key})")
            out[rep] = v[canon_key]
        back = self.expand(HeckeElement(out))
        if back != v:
            raise HeckeError("vector is not a sum of double cosets")
        return HeckeElement(out)

    def mul(self, h1: HeckeElement, h2: HeckeElement) -> HeckeElement:
        return self.regroup(self.act_left(h1, self.expand(h2)))

    def mass(self, h: HeckeElement) -> Fraction:
        """Total number of right cosets, counted with coefficients."""
        return sum((c * self.index_of(rep) for rep, c in h), Fraction(0))

    # automorphisms --------------------------------------------------------

    def check_automorphism(self, theta: Callable[[Element], Element]) -> None:
        pair = self.pair
        if not pair.is_finite:
            return
        images = {theta(g) for g in pair.gamma}
        if not all(pair.in_gamma(x) for x in images) or len(images) != len(pair.gamma):
            raise HeckeError("automorphism does not preserve Gamma")
        gens = pair.generators()
        for a in gens:
            for b in gens:
                if theta(pair.mul(a, b)) != pair.mul(theta(a), theta(b)):
                    raise HeckeError("map is not multiplicative on generators")

    def apply_automorphism(self, theta: Callable[[Element], Element], x):
        self.check_automorphism(theta)
        pair = self.pair
        if isinstance(x, HeckeElement):
            acc: dict[Element, Fraction] = {}
            for rep, c in x:
                k = pair.double_canon(theta(rep))
                acc[k] = acc.get(k, Fraction(0)) + c
            return HeckeElement(acc)
        if isinstance(x, CosetVector):
            if x.level != GAMMA:
                raise LevelError("automorphisms are applied at level Gamma")
            keys: dict[CosetKey, Fraction] = {}
            for key, c in x:
                k = self.engine.canon(x.side, GAMMA, theta(key.rep))
                keys[k] = keys.get(k, Fraction(0)) + c
            return CosetVector(GAMMA, x.side, keys)
        raise TypeError(f"cannot apply an automorphism to {type(x).__name__}")

    # relations ------------------------------------------------------------

    def action_instance(self, sigma1: Element, sigma2: Element) -> RelationInstance:
        """The relation encoding [Gamma s1 Gamma][Gamma s2] = sum_j [Gamma x_j s2].

        Left side: the sets s_i*Gamma*s2 over Gamma s1 Gamma = ⊔ s_i Gamma;
        right side: the sets Gamma*x_j*s2 over Gamma s1 Gamma = ⊔ Gamma x_j.
        """
        pair, engine = self.pair, self.engine
        e = pair.identity
        lhs = tuple((s.rep, sigma2) for s in engine.decompose_double_left(sigma1))
        rhs = tuple((e, pair.mul(x.rep, sigma2)) for x in engine.decompose_double_right(sigma1))
        return RelationInstance(lhs, rhs)

    def verify_relation(self, inst: RelationInstance, method: str | None = None) -> RelationVerdict:
        """Check that both unions are disjoint and equal.

        The finite backend compares element sets. The coset method works at
        coset granularity: at level Gamma via double-coset tests and relative
        densities, otherwise via multisets of left cosets of a common
        finite-index subgroup.
        """
        if method is None:
            method = "elements" if self.pair.is_finite else "cosets"
        if method == "elements":
            return self._verify_by_elements(inst)
        if method == "cosets":
            return self._verify_by_cosets(inst)
        raise ValueError(f"unknown method {method!r}")

    def _term_set(self, a, b, level: Level) -> frozenset:
        pair = self.pair
        return frozenset(pair.mul(pair.mul(a, c), b) for c in self.engine.level_elements(level))

    def _verify_by_elements(self, inst: RelationInstance) -> RelationVerdict:
        sides = []
        for name, terms in (("lhs", inst.lhs), ("rhs", inst.rhs)):
            union: set = set()
            for a, b in terms:
                s = self._term_set(a, b, inst.level)
                overlap = union & s
                if overlap:
                    return RelationVerdict(False, f"{name} terms overlap", min(overlap))
                union |= s
            sides.append(union)
        diff = sides[0] ^ sides[1]
        if diff:
            return RelationVerdict(False, "unions differ", min(diff))
        return RelationVerdict(True)

    def _term_pieces(self, inst: RelationInstance) -> list[tuple[Counter, dict]]:
        """Split each term into left cosets of one common subgroup H.

        The set a*Gamma_T*b is a left coset of b^-1 Gamma_T b, an intersection
        of conjugates rho^-1 Gamma rho with rho = tau^-1 b. H intersects all of
        them, and y*H is labelled by the cosets y*rho^-1*Gamma.
        """
        pair, engine = self.pair, self.engine
        conj = [pair.identity, *inst.level.conjugators]
        rhos = sorted({pair.canon_right(pair.mul(pair.inv(t), b))
                       for _, b in inst.lhs + inst.rhs for t in conj})
        inv_rhos = [pair.inv(r) for r in rhos]

        def h_label(y):
            return tuple(pair.canon_left(pair.mul(y, ri)) for ri in inv_rhos)

        out = []
        for terms in (inst.lhs, inst.rhs):
            counts: Counter = Counter()
            reps: dict = {}
            for a, b in terms:
                # b H b^-1 is the level {b rho^-1}, a subgroup of Gamma_T
                fine = engine.level_of(*(pair.mul(b, ri) for ri in inv_rhos)).join(inst.level)
                for u in engine.transversal(fine, LEFT).reps:
                    if engine.in_level(inst.level, u):
                        y = pair.mul(pair.mul(a, u), b)
                        lab = h_label(y)
                        counts[lab] += 1
                        reps.setdefault(lab, y)
            out.append((counts, reps))
        return out

    def _verify_by_densities(self, inst: RelationInstance) -> RelationVerdict:
        """Level-Gamma shortcut.

        a*Gamma*b meets c*Gamma*d iff c^-1 a lies in Gamma d b^-1 Gamma, and the
        meet is then one coset of a subgroup of relative index [Gamma : Gamma_{d b^-1}]
        in either term. With both sides disjoint, every term is covered by the
        other side iff those relative densities sum to 1. Witnesses are the
        element a*b of the offending term.
        """
        pair = self.pair

        def meets(t1, t2):
            (a, b), (c, d) = t1, t2
            return pair.double_canon(pair.mul(pair.inv(c), a)) == pair.double_canon(pair.mul(d, pair.inv(b)))

        def density(t1, t2):
            return Fraction(1, self.index_of(pair.mul(t2[1], pair.inv(t1[1]))))

        for name, terms in (("lhs", inst.lhs), ("rhs", inst.rhs)):
            for i, t in enumerate(terms):
                for u in terms[:i]:
                    if meets(t, u):
                        return RelationVerdict(False, f"{name} terms overlap", pair.mul(*t))
        for mine, other in ((inst.lhs, inst.rhs), (inst.rhs, inst.lhs)):
            for t in mine:
                if sum((density(t, u) for u in other if meets(t, u)), Fraction(0)) != 1:
                    return RelationVerdict(False, "unions differ", pair.mul(*t))
        return RelationVerdict(True)

    def _verify_by_cosets(self, inst: RelationInstance) -> RelationVerdict:
        if inst.level.is_gamma:
            return self._verify_by_densities(inst)
        (lhs, lreps), (rhs, rreps) = self._term_pieces(inst)
        for name, counts, reps in (("lhs", lhs, lreps), ("rhs", rhs, rreps)):
            for lab, n in sorted(counts.items()):
                if n > 1:
                    return RelationVerdict(False, f"{name} terms overlap", reps[lab])
        diff = set(lhs) ^ set(rhs)
        if diff:
            lab = min(diff)
            return RelationVerdict(False, "unions differ", lreps.get(lab, rreps.get(lab)))
        return RelationVerdict(True)

    def split_relation(self, inst: RelationInstance, finer: Level) -> RelationInstance:
        """Rewrite each a*Gamma_T*b as the union of a*u*Gamma_finer*b (u over Gamma_T/Gamma_finer)."""
        engine, pair = self.engine, self.pair
        engine.require_contains(inst.level, finer)
        inside = [u for u in engine.transversal(finer, LEFT).reps if engine.in_level(inst.level, u)]

        def split(terms):
            return tuple((pair.mul(a, u), b) for a, b in terms for u in inside)

        return RelationInstance(split(inst.lhs), split(inst.rhs), finer)

    def refine_relation(self, inst: RelationInstance, coarse: Level) -> RelationInstance:
        """Regroup a verified instance at a finer level into one at ``coarse``.

        Terms sharing the right factor b are merged whenever their left cosets
        a*Gamma_fine exhaust a whole coset a*Gamma_coarse. Raises
        :class:`NotLiftable` if some term cannot be absorbed that way.
        """
        engine, pair = self.engine, self.pair
        fine = inst.level
        engine.require_contains(coarse, fine)
        verdict = self.verify_relation(inst)
        if not verdict:
            raise HeckeError(f"input instance is invalid: {verdict.reason}")
        inside = [u for u in engine.transversal(fine, LEFT).reps if engine.in_level(coarse, u)]

        def lift(terms):
            by_b: dict = {}
            for a, b in terms:
                by_b.setdefault(b, set()).add(engine.left(a, fine))
            lifted = []
            for b, keys in sorted(by_b.items()):
                remaining = set(keys)
                for key in sorted(keys):
                    if key not in remaining:
                        continue
                    pieces = {engine.left(pair.mul(key.rep, u), fine) for u in inside}
                    if not pieces <= remaining:
                        raise NotLiftable(
                            f"coset {engine.format_key(key)} with right factor "
                            f"{pair.format(b)} does not fill a coarse coset")
                    remaining -= pieces
                    lifted.append((engine.left(key.rep, coarse).rep, b))
            return tuple(sorted(lifted))

        out = RelationInstance(lift(inst.lhs), lift(inst.rhs), coarse)
        verdict = self.verify_relation(out)
        if not verdict:
            raise HeckeError(f"lifted instance failed re-verification: {verdict.reason}")
        return out


# text forms ---------------------------------------------------------------


def format_hecke(pair, h: HeckeElement) -> str:
    if not len(h):
        return "0"
    return " + ".join(f"{c}*[G {pair.format(rep)} G]" for rep, c in h)


def parse_terms(pair, terms: Sequence[str]) -> list[tuple[Fraction, Element]]:
    """Parse ``"c@element"`` strings (coefficient defaults to 1)."""
    out = []
    for term in terms:
        if "@" in term:
            c, g = term.split("@", 1)
            out.append((Fraction(c.strip()), pair.parse(g)))
        else:
            out.append((Fraction(1), pair.parse(term)))
    return out


def hecke_from_terms(algebra: HeckeAlgebra, terms: Iterable[tuple[Fraction, Element]]) -> HeckeElement:
    h = HeckeElement({})
    for c, g in terms:
        h = h + c * algebra.basis(g)
    return h


def instance_from_dict(pair, engine: CosetEngine, data: Mapping) -> RelationInstance:
    def pairs(items):
        return tuple((pair.parse(str(a)), pair.parse(str(b))) for a, b in items)

    level = engine.level_of(*(pair.parse(str(s)) for s in data.get("level", [])))
    return RelationInstance(pairs(data.get("lhs", [])), pairs(data.get("rhs", [])), level)


def instance_to_dict(pair, inst: RelationInstance) -> dict:
    return {
        "level": [pair.format(t) for t in inst.level.conjugators],
        "lhs": [[pair.format(a), pair.format(b)] for a, b in inst.lhs],
        "rhs": [[pair.format(a), pair.format(b)] for a, b in inst.rhs],
    }


__all__ = [
    "HeckeAlgebra", "HeckeElement", "RelationInstance", "RelationVerdict",
    "HeckeError", "NotLiftable", "GroupError", "format_hecke", "parse_terms",
    "hecke_from_terms", "instance_from_dict", "instance_to_dict",
]
