"""Canonical cosets of Gamma and of the finite-index subgroups Gamma_T.

A *level* ``T`` is a finite set of elements ``tau`` and stands for the
subgroup ``Gamma_T = Gamma ∩ (∩_tau tau Gamma tau^-1)``; the empty level is
Gamma itself and ``level_of(sigma)`` gives ``Gamma_sigma``. Since
``tau Gamma tau^-1`` only depends on ``tau Gamma``, a level stores the
canonical left-coset representatives of its conjugators.

Two elements x, y lie in the same right coset of Gamma_T exactly when
``Gamma tau^-1 x = Gamma tau^-1 y`` for every tau in T ∪ {e}; this tuple of
Gamma-cosets is the *label* used to canonicalize. Canonical representatives
come from a breadth-first Schreier transversal of ``Gamma_T`` in Gamma, so
subgroups are never listed element by element and the same code serves the
infinite modular backend.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .groups import Element, GroupPair

RIGHT = "right"  # Gamma_T * x
LEFT = "left"    # x * Gamma_T
SIDES = (RIGHT, LEFT)

DEFAULT_MAX_INDEX = 200_000


class LevelError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Level:
    conjugators: tuple = ()

    @property
    def is_gamma(self) -> bool:
        return not self.conjugators

    def join(self, other: "Level") -> "Level":
        """The level of the intersection of the two subgroups."""
        return Level(tuple(sorted(set(self.conjugators) | set(other.conjugators))))


GAMMA = Level()


@dataclass(frozen=True, order=True)
class CosetKey:
    side: str
    level: Level
    rep: Element


@dataclass(frozen=True)
class Transversal:
    level: Level
    side: str
    reps: tuple  # canonical transversal elements, BFS order, reps[0] = identity
    labels: Mapping  # label -> rep

    def __len__(self) -> int:
        return len(self.reps)


class CosetEngine:
    """Coset canonicalization and decomposition for one group pair.

    Results are memoized; inserts are idempotent so the memo tables are safe
    to share between threads.
    """

    def __init__(self, pair: GroupPair, max_index: int = DEFAULT_MAX_INDEX):
        self.pair = pair
        self.max_index = max_index
        self._transversals: dict[tuple[Level, str], Transversal] = {}
        self._right_decomp: dict[Element, tuple[CosetKey, ...]] = {}
        self._left_decomp: dict[Element, tuple[CosetKey, ...]] = {}

    # levels ---------------------------------------------------------------

    def level_of(self, *sigmas: Element) -> Level:
        pair = self.pair
        conj = {pair.canon_left(s) for s in sigmas if not pair.in_gamma(s)}
        return Level(tuple(sorted(conj)))

    def _label(self, level: Level, side: str, g: Element) -> tuple:
        pair = self.pair
        if side == RIGHT:
            return tuple(pair.canon_right(pair.mul(pair.inv(t), g)) for t in level.conjugators)
        return tuple(pair.canon_left(pair.mul(g, t)) for t in level.conjugators)

    def transversal(self, level: Level, side: str = RIGHT) -> Transversal:
        """Schreier transversal of Gamma_T in Gamma (right or left cosets)."""
        if side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        cached = self._transversals.get((level, side))
        if cached is not None:
            return cached
        pair = self.pair
        gens = []
        for g in pair.gamma_generators():
            gens.extend([g, pair.inv(g)])
        ident = pair.identity
        labels = {self._label(level, side, ident): ident}
        reps = [ident]
        queue = deque([ident])
        while queue:
            u = queue.popleft()
            for g in gens:
                v = pair.mul(u, g) if side == RIGHT else pair.mul(g, u)
                lab = self._label(level, side, v)
                if lab not in labels:
                    labels[lab] = v
                    reps.append(v)
                    if len(reps) > self.max_index:
                        raise LevelError(f"index of level exceeds bound {self.max_index}")
                    queue.append(v)
        result = Transversal(level, side, tuple(reps), labels)
        return self._transversals.setdefault((level, side), result)

    def index(self, level: Level) -> int:
        """[Gamma : Gamma_T]."""
        return len(self.transversal(level, RIGHT))

    def relative_index(self, coarse: Level, fine: Level) -> int:
        self.require_contains(coarse, fine)
        return self.index(fine) // self.index(coarse)

    def contains(self, coarse: Level, fine: Level) -> bool:
        """True iff Gamma_fine is a subgroup of Gamma_coarse."""
        if set(coarse.conjugators) <= set(fine.conjugators):
            return True
        return self.index(fine.join(coarse)) == self.index(fine)

    def require_contains(self, coarse: Level, fine: Level) -> None:
        if not self.contains(coarse, fine):
            raise LevelError(f"{self.format_level(fine)} is not contained in "
                             f"{self.format_level(coarse)}")

    def in_level(self, level: Level, g: Element) -> bool:
        pair = self.pair
        if not pair.in_gamma(g):
            return False
        return self._label(level, RIGHT, g) == self._label(level, RIGHT, pair.identity)

    # canonical cosets -----------------------------------------------------

    def canon(self, side: str, level: Level, g: Element) -> CosetKey:
        pair = self.pair
        g = pair.validate(g)
        if side == RIGHT:
            h = pair.canon_right(g)
            if level.is_gamma:
                return CosetKey(RIGHT, level, h)
            u = pair.mul(g, pair.inv(h))
            t = self.transversal(level, RIGHT).labels[self._label(level, RIGHT, u)]
            return CosetKey(RIGHT, level, pair.mul(t, h))
        if side == LEFT:
            h = pair.canon_left(g)
            if level.is_gamma:
                return CosetKey(LEFT, level, h)
            u = pair.mul(pair.inv(h), g)
            t = self.transversal(level, LEFT).labels[self._label(level, LEFT, u)]
            return CosetKey(LEFT, level, pair.mul(h, t))
        raise ValueError(f"side must be one of {SIDES}")

    def right(self, g: Element, level: Level = GAMMA) -> CosetKey:
        return self.canon(RIGHT, level, g)

    def left(self, g: Element, level: Level = GAMMA) -> CosetKey:
        return self.canon(LEFT, level, g)

    def stabilizer_index(self, sigma: Element) -> int:
        """[Gamma : Gamma_sigma] with Gamma_sigma = sigma Gamma sigma^-1 ∩ Gamma."""
        return self.index(self.level_of(sigma))

    def decompose_double_right(self, sigma: Element) -> tuple[CosetKey, ...]:
        """Right cosets Gamma*x making up Gamma*sigma*Gamma, sorted."""
        pair = self.pair
        rep = pair.double_canon(sigma)
        cached = self._right_decomp.get(rep)
        if cached is not None:
            return cached
        reps_of_double = getattr(pair, "right_reps_of_double", None)
        if reps_of_double is not None:
            keys = {CosetKey(RIGHT, GAMMA, h) for h in reps_of_double(rep)}
        else:
            keys = set(self.decompose_double_right_bfs(rep))
        return self._right_decomp.setdefault(rep, tuple(sorted(keys)))

    def decompose_double_right_bfs(self, sigma: Element) -> tuple[CosetKey, ...]:
        """Backend-independent decomposition via a transversal of Gamma_{sigma^-1}."""
        pair = self.pair
        level = self.level_of(pair.inv(sigma))
        keys = {self.right(pair.mul(sigma, u)) for u in self.transversal(level, RIGHT).reps}
        return tuple(sorted(keys))

    def decompose_double_left(self, sigma: Element) -> tuple[CosetKey, ...]:
        """Left cosets x*Gamma making up Gamma*sigma*Gamma, sorted."""
        pair = self.pair
        rep = pair.double_canon(sigma)
        cached = self._left_decomp.get(rep)
        if cached is not None:
            return cached
        reps_of_double = getattr(pair, "right_reps_of_double", None)
        if reps_of_double is not None:
            # x Gamma <-> Gamma x^-1 inside the inverse double coset
            keys = {self.left(pair.inv(h)) for h in reps_of_double(pair.inv(rep))}
        else:
            level = self.level_of(rep)
            keys = {self.left(pair.mul(u, rep)) for u in self.transversal(level, LEFT).reps}
        return self._left_decomp.setdefault(rep, tuple(sorted(keys)))

    def split_coset(self, key: CosetKey, finer: Level) -> tuple[CosetKey, ...]:
        """Cosets of Gamma_finer whose disjoint union is the coset ``key``."""
        self.require_contains(key.level, finer)
        pair = self.pair
        trans = self.transversal(finer, key.side)
        inside = [t for t in trans.reps if self.in_level(key.level, t)]
        if key.side == RIGHT:
            pieces = {self.right(pair.mul(t, key.rep), finer) for t in inside}
        else:
            pieces = {self.left(pair.mul(key.rep, t), finer) for t in inside}
        expected = self.relative_index(key.level, finer)
        if len(pieces) != expected:
            raise LevelError(f"split produced {len(pieces)} pieces, expected {expected}")
        return tuple(sorted(pieces))

    def level_elements(self, level: Level) -> tuple[Element, ...]:
        """Elements of Gamma_T (finite backend only)."""
        pair = self.pair
        if not pair.is_finite:
            raise LevelError("subgroups of the modular backend are infinite")
        return tuple(g for g in pair.gamma if self.in_level(level, g))

    def coset_elements(self, key: CosetKey) -> frozenset:
        pair = self.pair
        sub = self.level_elements(key.level)
        if key.side == RIGHT:
            return frozenset(pair.mul(c, key.rep) for c in sub)
        return frozenset(pair.mul(key.rep, c) for c in sub)

    # text -----------------------------------------------------------------

    def format_level(self, level: Level) -> str:
        if level.is_gamma:
            return "G"
        return "G[" + ";".join(self.pair.format(t) for t in level.conjugators) + "]"

    def parse_level(self, text: str) -> Level:
        text = text.strip()
        if text in ("G", "", "Gamma"):
            return GAMMA
        if not (text.startswith("G[") and text.endswith("]")):
            raise LevelError(f"bad level tag {text!r}")
        parts = [s for s in text[2:-1].split(";") if s.strip()]
        return self.level_of(*(self.pair.parse(s) for s in parts))

    def format_key(self, key: CosetKey) -> str:
        """Stable text form ``R|G|<rep>`` / ``L|G[...]|<rep>``."""
        tag = "R" if key.side == RIGHT else "L"
        return f"{tag}|{self.format_level(key.level)}|{self.pair.format(key.rep)}"

    def parse_key(self, text: str) -> CosetKey:
        tag, level, rep = text.split("|", 2)
        side = {"R": RIGHT, "L": LEFT}[tag.strip()]
        return self.canon(side, self.parse_level(level), self.pair.parse(rep))


@dataclass(frozen=True)
class CosetVector:
    """Finitely supported rational combination of cosets at one level and side."""

    level: Level
    side: str
    coeffs: Mapping[CosetKey, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            if k.side != self.side or k.level != self.level:
                raise LevelError(f"key {k} does not match vector level/side")
            c = Fraction(c)
            if c:
                clean[k] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def basis(cls, key: CosetKey) -> "CosetVector":
        return cls(key.level, key.side, {key: Fraction(1)})

    @classmethod
    def from_keys(cls, keys: Iterable[CosetKey], level: Level, side: str) -> "CosetVector":
        acc: dict[CosetKey, Fraction] = {}
        for k in keys:
            acc[k] = acc.get(k, Fraction(0)) + 1
        return cls(level, side, acc)

    def _check(self, other: "CosetVector") -> None:
        if (self.level, self.side) != (other.level, other.side):
            raise LevelError("coset vectors live at different levels or sides")

    def __add__(self, other: "CosetVector") -> "CosetVector":
        self._check(other)
        acc = dict(self.coeffs)
        for k, c in other.coeffs.items():
            acc[k] = acc.get(k, Fraction(0)) + c
        return CosetVector(self.level, self.side, acc)

    def __sub__(self, other: "CosetVector") -> "CosetVector":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "CosetVector":
        s = Fraction(scalar)
        return CosetVector(self.level, self.side, {k: s * c for k, c in self.coeffs.items()})

    def __iter__(self) -> Iterator[tuple[CosetKey, Fraction]]:
        return iter(self.coeffs.items())

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, key: CosetKey) -> Fraction:
        return self.coeffs.get(key, Fraction(0))

    def mass(self) -> Fraction:
        return sum(self.coeffs.values(), Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs


def zero_vector(level: Level = GAMMA, side: str = RIGHT) -> CosetVector:
    return CosetVector(level, side, {})


def inner(engine: CosetEngine, u: CosetVector, v: CosetVector) -> Fraction:
    """Pre-Hilbert pairing; a coset of Gamma_T has squared norm 1/[Gamma:Gamma_T]."""
    u._check(v)
    weight = Fraction(1, engine.index(u.level))
    return weight * sum((c * v[k] for k, c in u), Fraction(0))


def level_embed(engine: CosetEngine, v: CosetVector, finer: Level) -> CosetVector:
    """Replace each coset by the sum of its Gamma_finer pieces (isometric)."""
    engine.require_contains(v.level, finer)
    acc: dict[CosetKey, Fraction] = {}
    for key, c in v:
        for piece in engine.split_coset(key, finer):
            acc[piece] = acc.get(piece, Fraction(0)) + c
    return CosetVector(finer, v.side, acc)
