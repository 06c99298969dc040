"""Group backends for Hecke pairs (Gamma inside G).

Two backends share one small interface:

* :class:`FinitePair` -- G generated by permutations, fully enumerated.
  Elements are integer indices into the sorted element table, so the
  identity is always ``0``.
* :class:`ModularPair` -- G is the group of content-one integral 2x2
  matrices with determinant a power of ``p``, taken modulo ``-1``; Gamma is
  the determinant-one part, i.e. PSL2(Z). Elements are 4-tuples
  ``(a, b, c, d)`` in canonical form.

Permutation products compose right to left: ``(a*b)(x) = a(b(x))``.
"""

from __future__ import annotations

import math
import re
from collections import deque
from typing import Hashable, Iterable, Sequence

Element = Hashable
Matrix = tuple[int, int, int, int]

DEFAULT_MAX_ORDER = 20_000


class GroupError(ValueError):
    pass


class BackendMismatch(TypeError):
    pass


class OrderBoundExceeded(GroupError):
    pass


class GroupPair:
    """Interface shared by both backends."""

    backend: str
    identity: Element

    def mul(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inv(self, a: Element) -> Element:
        raise NotImplementedError

    def in_gamma(self, g: Element) -> bool:
        raise NotImplementedError

    def canon_right(self, g: Element) -> Element:
        """Canonical representative of the right coset Gamma*g."""
        raise NotImplementedError

    def canon_left(self, g: Element) -> Element:
        """Canonical representative of the left coset g*Gamma."""
        raise NotImplementedError

    def double_canon(self, g: Element) -> Element:
        """Canonical representative of Gamma*g*Gamma."""
        raise NotImplementedError

    def gamma_generators(self) -> tuple[Element, ...]:
        raise NotImplementedError

    def validate(self, g: Element) -> Element:
        raise NotImplementedError

    def format(self, g: Element) -> str:
        raise NotImplementedError

    def parse(self, text: str) -> Element:
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return self.backend == "finite"

    def mul_all(self, *elements: Element) -> Element:
        out = self.identity
        for g in elements:
            out = self.mul(out, g)
        return out

    def describe(self) -> dict:
        raise NotImplementedError


# --------------------------------------------------------------------------
# permutations


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> tuple[int, ...]:
    """Parse cycle notation on points ``1..degree`` into a 0-based image tuple.

    >>> parse_cycles("(1 2 3)", 4)
    (1, 2, 0, 3)
    >>> parse_cycles("()", 2)
    (0, 1)
    """
    text = text.strip()
    image = list(range(degree))
    if text in ("", "()", "e", "id"):
        return tuple(image)
    stripped = _CYCLE_RE.sub("", text).strip()
    if stripped:
        raise GroupError(f"bad cycle notation: {text!r}")
    seen: set[int] = set()
    for body in _CYCLE_RE.findall(text):
        points = [int(tok) - 1 for tok in re.split(r"[\s,]+", body.strip()) if tok]
        for pt in points:
            if not 0 <= pt < degree:
                raise GroupError(f"point {pt + 1} outside 1..{degree} in {text!r}")
            if pt in seen:
                raise GroupError(f"point {pt + 1} repeated in {text!r}")
            seen.add(pt)
        for i, pt in enumerate(points):
            image[pt] = points[(i + 1) % len(points)]
    return tuple(image)


def format_cycles(perm: Sequence[int]) -> str:
    seen = set()
    parts = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cycle = [start]
        seen.add(start)
        nxt = perm[start]
        while nxt != start:
            cycle.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        parts.append("(" + " ".join(str(x + 1) for x in cycle) + ")")
    return "".join(parts) or "()"


def compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(a[x] for x in b)


def closure(generators: Iterable[tuple[int, ...]], degree: int,
            max_order: int = DEFAULT_MAX_ORDER) -> list[tuple[int, ...]]:
    ident = tuple(range(degree))
    gens = list(generators)
    seen = {ident}
    queue = deque([ident])
    while queue:
        a = queue.popleft()
        for g in gens:
            c = compose(a, g)
            if c not in seen:
                seen.add(c)
                if len(seen) > max_order:
                    raise OrderBoundExceeded(
                        f"group order exceeds configured bound {max_order}")
                queue.append(c)
    return sorted(seen)


class FinitePair(GroupPair):
    """A finite group given by permutation generators, with a subgroup Gamma."""

    backend = "finite"

    def __init__(self, degree: int, generators: Sequence[str | Sequence[int]],
                 gamma_generators: Sequence[str | Sequence[int]],
                 max_order: int = DEFAULT_MAX_ORDER, name: str | None = None):
        self.degree = degree
        self.name = name
        self.max_order = max_order
        self.generator_perms = [self._to_perm(g) for g in generators]
        self.gamma_generator_perms = [self._to_perm(g) for g in gamma_generators]
        self.perms = closure(self.generator_perms, degree, max_order)
        self.index = {p: i for i, p in enumerate(self.perms)}
        self.order = len(self.perms)
        self.identity = 0
        missing = [p for p in self.gamma_generator_perms if p not in self.index]
        if missing:
            raise GroupError(
                f"Gamma generator {format_cycles(missing[0])} is not in G")
        gamma_perms = closure(self.gamma_generator_perms, degree, max_order)
        self.gamma = tuple(sorted(self.index[p] for p in gamma_perms))
        self._gamma_set = frozenset(self.gamma)
        self._inv = [self.index[_invert_perm(p)] for p in self.perms]
        self._table = None
        self._canon_right: dict[int, int] = {}
        self._canon_left: dict[int, int] = {}
        self._double: dict[int, int] = {}

    def _to_perm(self, g: str | Sequence[int]) -> tuple[int, ...]:
        if isinstance(g, str):
            return parse_cycles(g, self.degree)
        perm = tuple(int(x) for x in g)
        if sorted(perm) != list(range(self.degree)):
            raise GroupError(f"not a permutation of 0..{self.degree - 1}: {g!r}")
        return perm

    # elements -----------------------------------------------------------

    def elements(self) -> range:
        return range(self.order)

    def generators(self) -> tuple[int, ...]:
        return tuple(self.index[p] for p in self.generator_perms)

    def gamma_generators(self) -> tuple[int, ...]:
        return tuple(self.index[p] for p in self.gamma_generator_perms)

    def validate(self, g: Element) -> int:
        if isinstance(g, bool) or not isinstance(g, int):
            raise BackendMismatch(f"finite backend expects an element index, got {g!r}")
        if not 0 <= g < self.order:
            raise GroupError(f"element index {g} out of range 0..{self.order - 1}")
        return g

    def mul(self, a: Element, b: Element) -> int:
        a, b = self.validate(a), self.validate(b)
        if self._table is not None:
            return int(self._table[a, b])
        return self.index[compose(self.perms[a], self.perms[b])]

    def inv(self, a: Element) -> int:
        return self._inv[self.validate(a)]

    def in_gamma(self, g: Element) -> bool:
        return self.validate(g) in self._gamma_set

    def table(self):
        """Multiplication table as an ``order x order`` numpy array (cached)."""
        if self._table is None:
            import numpy as np

            table = np.empty((self.order, self.order), dtype=np.int64)
            for a, pa in enumerate(self.perms):
                for b, pb in enumerate(self.perms):
                    table[a, b] = self.index[compose(pa, pb)]
            self._table = table
        return self._table

    def inverse_array(self):
        import numpy as np

        return np.array(self._inv, dtype=np.int64)

    # cosets ---------------------------------------------------------------

    def canon_right(self, g: Element) -> int:
        g = self.validate(g)
        rep = self._canon_right.get(g)
        if rep is None:
            rep = min(self.mul(c, g) for c in self.gamma)
            self._canon_right[g] = rep
        return rep

    def canon_left(self, g: Element) -> int:
        g = self.validate(g)
        rep = self._canon_left.get(g)
        if rep is None:
            rep = min(self.mul(g, c) for c in self.gamma)
            self._canon_left[g] = rep
        return rep

    def double_canon(self, g: Element) -> int:
        g = self.validate(g)
        rep = self._double.get(g)
        if rep is None:
            rep = min(self.mul(self.mul(c, g), d) for c in self.gamma for d in self.gamma)
            self._double[g] = rep
        return rep

    def right_coset(self, g: Element) -> frozenset[int]:
        return frozenset(self.mul(c, g) for c in self.gamma)

    def left_coset(self, g: Element) -> frozenset[int]:
        return frozenset(self.mul(g, c) for c in self.gamma)

    def double_coset(self, g: Element) -> frozenset[int]:
        return frozenset(self.mul(self.mul(c, g), d) for c in self.gamma for d in self.gamma)

    # text -----------------------------------------------------------------

    def format(self, g: Element) -> str:
        return format_cycles(self.perms[self.validate(g)])

    def parse(self, text: str) -> int:
        perm = parse_cycles(text, self.degree)
        try:
            return self.index[perm]
        except KeyError:
            raise GroupError(f"{text!r} is not an element of G") from None

    def describe(self) -> dict:
        return {
            "backend": self.backend,
            "degree": self.degree,
            "generators": [format_cycles(p) for p in self.generator_perms],
            "gamma_generators": [format_cycles(p) for p in self.gamma_generator_perms],
            "order": self.order,
            "gamma_order": len(self.gamma),
        }


def _invert_perm(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for x, y in enumerate(p):
        out[y] = x
    return tuple(out)


# --------------------------------------------------------------------------
# integral 2x2 matrices


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, math.isqrt(n) + 1))


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``x*a + y*b == g == gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        return -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def content(m: Matrix) -> int:
    return math.gcd(math.gcd(m[0], m[1]), math.gcd(m[2], m[3]))


def det(m: Matrix) -> int:
    return m[0] * m[3] - m[1] * m[2]


def matmul(x: Matrix, y: Matrix) -> Matrix:
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def transpose(m: Matrix) -> Matrix:
    return (m[0], m[2], m[1], m[3])


def projective_normalize(m: Sequence[int]) -> Matrix:
    """Divide out the content and make the first nonzero entry positive."""
    m = tuple(int(x) for x in m)
    if len(m) != 4:
        raise BackendMismatch(f"modular backend expects 4 entries, got {m!r}")
    c = content(m)
    if c == 0:
        raise GroupError("zero matrix")
    m = tuple(x // c for x in m)
    first = next(x for x in m if x)
    if first < 0:
        m = tuple(-x for x in m)
    return m  # type: ignore[return-value]


def hnf_upper(m: Matrix) -> Matrix:
    """Row-style Hermite form under left multiplication by SL2(Z), modulo -1.

    Returns ``(a, b, 0, d)`` with ``a, d > 0`` and ``0 <= b < d``; requires
    ``det(m) > 0``.
    """
    a, b, c, d = m
    D = det(m)
    if D <= 0:
        raise GroupError(f"determinant must be positive, got {D}")
    g, x, y = egcd(a, c)
    top_right = x * b + y * d
    bottom = D // g
    # g > 0 and D > 0, so bottom > 0
    return (g, top_right % bottom, 0, bottom)


class ModularPair(GroupPair):
    """PSL2(Z) inside the projective group of det-p^k content-one matrices."""

    backend = "modular"

    def __init__(self, p: int):
        if not is_prime(int(p)):
            raise GroupError(f"p must be prime, got {p}")
        self.p = int(p)
        self.identity = (1, 0, 0, 1)
        self.name = f"PSL2(Z) in PGL2(Z[1/{p}])+"

    def det_exponent(self, m: Matrix) -> int:
        D = det(m)
        if D <= 0:
            raise GroupError(f"determinant {D} is not a power of {self.p}")
        k = 0
        while D % self.p == 0:
            D //= self.p
            k += 1
        if D != 1:
            raise GroupError(f"determinant of {m} is not a power of {self.p}")
        return k

    def validate(self, g: Element) -> Matrix:
        if not isinstance(g, tuple) or len(g) != 4 or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in g):
            raise BackendMismatch(f"modular backend expects a 4-tuple of ints, got {g!r}")
        return g

    def element(self, m: Sequence[int]) -> Matrix:
        """Canonicalize arbitrary integer entries into a group element."""
        g = projective_normalize(m)
        self.det_exponent(g)
        return g

    def mul(self, a: Element, b: Element) -> Matrix:
        return projective_normalize(matmul(self.validate(a), self.validate(b)))

    def inv(self, a: Element) -> Matrix:
        x, y, z, w = self.validate(a)
        return projective_normalize((w, -y, -z, x))

    def in_gamma(self, g: Element) -> bool:
        return det(self.validate(g)) == 1

    def canon_right(self, g: Element) -> Matrix:
        return hnf_upper(self.validate(g))

    def canon_left(self, g: Element) -> Matrix:
        return transpose(hnf_upper(transpose(self.validate(g))))

    def double_canon(self, g: Element) -> Matrix:
        return (1, 0, 0, self.p ** self.det_exponent(self.validate(g)))

    def gamma_generators(self) -> tuple[Matrix, ...]:
        # S and T
        return ((0, 1, -1, 0), (1, 1, 0, 1))

    def sigma_p(self, k: int = 1) -> Matrix:
        return (self.p ** k, 0, 0, 1)

    def right_reps_of_double(self, g: Element) -> list[Matrix]:
        """Hermite forms of all right cosets in the double coset of ``g``."""
        return primitive_hermite_forms(self.p, self.det_exponent(self.validate(g)))

    def format(self, g: Element) -> str:
        a, b, c, d = self.validate(g)
        return f"[[{a},{b}],[{c},{d}]]"

    def parse(self, text: str) -> Matrix:
        if text.strip() in ("e", "id"):
            return self.identity
        nums = [int(x) for x in re.findall(r"-?\d+", text)]
        if len(nums) != 4:
            raise GroupError(f"expected four integers in {text!r}")
        return self.element(nums)

    def describe(self) -> dict:
        return {"backend": self.backend, "p": self.p}


def hermite_forms(p: int, k: int, primitive: bool) -> list[Matrix]:
    """All ``(a, b, 0, d)`` with ``a*d = p**k`` and ``0 <= b < d``.

    With ``primitive`` only content-one forms are kept.
    """
    out = []
    n = p ** k
    for j in range(k + 1):
        d = p ** j
        a = n // d
        for b in range(d):
            if primitive and math.gcd(math.gcd(a, b), d) != 1:
                continue
            out.append((a, b, 0, d))
    return sorted(out)


def primitive_hermite_forms(p: int, k: int) -> list[Matrix]:
    return hermite_forms(p, k, primitive=True)
