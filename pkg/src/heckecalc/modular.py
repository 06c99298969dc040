"""The modular pair: T_p, the coset tree on Gamma\\G and its free-group word labels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .cosets import CosetEngine, CosetVector
from .groups import BackendMismatch, Matrix, ModularPair, hermite_forms
from .hecke import HeckeAlgebra, HeckeElement
from .report import CheckResult, exact, measured

DEFAULT_RADIUS_BOUND = {2: 8, 3: 8, 5: 5}
BALL_SIZE_LIMIT = 100_000
DENSE_LIMIT = 3000


class TreeError(ValueError):
    pass


class PsiUndefined(TreeError):
    """Raised for p = 2, where (p+1)/2 is not an integer."""


def ball_size(p: int, r: int) -> int:
    """Vertices within distance r of a point in the (p+1)-regular tree."""
    if r == 0:
        return 1
    return 1 + (p + 1) * (p ** r - 1) // (p - 1)


def radius_bound(p: int) -> int:
    if p in DEFAULT_RADIUS_BOUND:
        return DEFAULT_RADIUS_BOUND[p]
    r = 0
    while ball_size(p, r + 1) < BALL_SIZE_LIMIT:
        r += 1
    return r


def _modular(engine: CosetEngine) -> ModularPair:
    if engine.pair.backend != "modular":
        raise BackendMismatch("this operation needs the modular backend")
    return engine.pair


def t_p(algebra: HeckeAlgebra, k: int = 1) -> HeckeElement:
    """The double coset of diag(p^k, 1)."""
    pair = _modular(algebra.engine)
    return algebra.basis(pair.sigma_p(k))


def t_p_action(algebra: HeckeAlgebra, v: CosetVector) -> CosetVector:
    return algebra.act_left(t_p(algebra), v)


# --------------------------------------------------------------------------
# tree balls


@dataclass
class TreeBall:
    p: int
    radius: int
    root: Matrix
    vertices: list[Matrix]
    depth: dict[Matrix, int]
    adjacency: dict[Matrix, tuple[Matrix, ...]]
    psi: dict[Matrix, tuple[int, ...]] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.vertices)

    def children(self, v: Matrix) -> tuple[Matrix, ...]:
        d = self.depth[v]
        return tuple(w for w in self.adjacency[v] if self.depth.get(w) == d + 1)

    def edges(self) -> Iterator[tuple[Matrix, Matrix]]:
        for v in self.vertices:
            for w in self.adjacency[v]:
                if w in self.depth and v < w:
                    yield v, w

    def inner(self) -> list[Matrix]:
        return [v for v in self.vertices if self.depth[v] < self.radius]


def _hecke_neighbors(engine: CosetEngine) -> list[Matrix]:
    pair = _modular(engine)
    return [k.rep for k in engine.decompose_double_right(pair.sigma_p(1))]


def build_tree_ball(engine: CosetEngine, radius: int, max_radius: int | None = None) -> TreeBall:
    """Breadth-first closure of [Gamma] under T_p up to ``radius``.

    Vertices are Hermite forms of right cosets. Neighbors of Gamma x are the
    cosets Gamma h x, h running over the right representatives of T_p; all
    neighbors are recorded, including those one step outside the ball.
    """
    pair = _modular(engine)
    bound = radius_bound(pair.p) if max_radius is None else max_radius
    if radius < 0:
        raise TreeError("radius must be nonnegative")
    if radius > bound:
        raise TreeError(f"radius {radius} exceeds the bound {bound} for p = {pair.p}")
    hs = _hecke_neighbors(engine)
    root = pair.canon_right(pair.identity)
    depth = {root: 0}
    order = [root]
    adjacency: dict[Matrix, tuple[Matrix, ...]] = {}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        nbrs = tuple(sorted({pair.canon_right(pair.mul(h, v)) for h in hs}))
        adjacency[v] = nbrs
        if depth[v] == radius:
            continue
        for w in nbrs:
            if w not in depth:
                depth[w] = depth[v] + 1
                order.append(w)
                queue.append(w)
    return TreeBall(pair.p, radius, root, order, depth, adjacency)


def tree_invariants(ball: TreeBall) -> list[CheckResult]:
    p = ball.p
    witness = None
    regular = True
    one_parent = True
    symmetric = True
    depth_is_det = True
    for v in ball.vertices:
        nbrs = ball.adjacency[v]
        if len(nbrs) != p + 1 or len(set(nbrs)) != p + 1:
            regular, witness = False, v
        d = ball.depth[v]
        if d < ball.radius:
            up = [w for w in nbrs if ball.depth[w] < d]
            if (d == 0 and up) or (d > 0 and len(up) != 1):
                one_parent, witness = False, v
            if any(v not in ball.adjacency[w] for w in nbrs):
                symmetric, witness = False, v
        a, _, _, dd = v
        if _exponent(a * dd, p) != d:
            depth_is_det, witness = False, v
    n_edges = sum(1 for _ in ball.edges())
    fmt = (lambda m: f"[[{m[0]},{m[1]}],[{m[2]},{m[3]}]]")
    w = None if witness is None else fmt(witness)
    return [
        exact("tree.vertex_count", "Rem8-tree", len(ball) == ball_size(p, ball.radius),
              f"{len(ball)} vertices", detail=f"{len(ball)} vertices"),
        exact("tree.regular", "Rem8-tree", regular, w),
        exact("tree.single_parent", "Rem8-tree", one_parent, w),
        exact("tree.symmetric", "Rem8-tree", symmetric, w),
        exact("tree.acyclic", "Rem8-tree", n_edges == len(ball) - 1, f"{n_edges} edges"),
        exact("tree.depth_is_det_exponent", "Rem8-tree", depth_is_det, w),
    ]


def _exponent(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


# --------------------------------------------------------------------------
# word labels


def letters(n: int) -> list[int]:
    """u_1..u_N then u_1^-1..u_N^-1, encoded as +i / -i."""
    return list(range(1, n + 1)) + [-i for i in range(1, n + 1)]


def format_word(word: tuple[int, ...]) -> str:
    if not word:
        return "e"
    return " ".join(f"u{x}" if x > 0 else f"u{-x}^-1" for x in word)


def reduce_word(word) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def reduced_words(n: int, r: int) -> set[tuple[int, ...]]:
    """All reduced words in F_n of length at most r."""
    words = {()}
    layer = [()]
    for _ in range(r):
        nxt = []
        for w in layer:
            for x in letters(n):
                if not w or w[-1] != -x:
                    nxt.append(w + (x,))
        words.update(nxt)
        layer = nxt
    return words


def build_psi(ball: TreeBall) -> dict[Matrix, tuple[int, ...]]:
    """Label the ball by reduced words, new letters prepended.

    The root's p+1 children receive u_1..u_N, u_1^-1..u_N^-1 in sorted key
    order; a vertex whose word starts with x gives its p children the letters
    other than x^-1, again in sorted key order.
    """
    p = ball.p
    if p % 2 == 0:
        raise PsiUndefined(f"the word labeling needs (p+1)/2 integral; p = {p}")
    n = (p + 1) // 2
    psi = {ball.root: ()}
    queue = deque([ball.root])
    while queue:
        v = queue.popleft()
        if ball.depth[v] == ball.radius:
            continue
        w = psi[v]
        allowed = [x for x in letters(n) if not w or x != -w[0]]
        kids = ball.children(v)
        if len(kids) != len(allowed):
            raise TreeError("ball is not a regular tree; cannot label")
        for x, child in zip(allowed, kids):
            psi[child] = (x,) + w
            queue.append(child)
    ball.psi = psi
    return psi


def psi_checks(ball: TreeBall, psi: dict[Matrix, tuple[int, ...]]) -> list[CheckResult]:
    n = (ball.p + 1) // 2
    labels = list(psi.values())
    injective = len(set(labels)) == len(labels)
    reduced = all(reduce_word(w) == w for w in labels)
    exact_set = set(labels) == reduced_words(n, ball.radius)
    intertwine = True
    witness = None
    for v in ball.inner():
        got = sorted(psi[w] for w in ball.adjacency[v])
        want = sorted(reduce_word((g,) + psi[v]) for g in letters(n))
        if got != want:
            intertwine, witness = False, format_word(psi[v])
            break
    return [
        exact("psi.injective", "Rem8-psi", injective),
        exact("psi.reduced", "Rem8-psi", reduced),
        exact("psi.all_reduced_words", "Rem8-psi", exact_set,
              detail=f"{len(labels)} labels, N = {n}"),
        exact("psi.intertwines_adjacency", "Rem8-psi", intertwine, witness),
    ]


# --------------------------------------------------------------------------
# spectra


def adjacency_matrix(ball: TreeBall):
    from scipy.sparse import coo_matrix

    index = {v: i for i, v in enumerate(ball.vertices)}
    rows, cols = [], []
    for v, w in ball.edges():
        rows += [index[v], index[w]]
        cols += [index[w], index[v]]
    n = len(ball)
    return coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()


def truncated_spectrum(ball: TreeBall, k: int | None = None) -> np.ndarray:
    """Eigenvalues of the ball adjacency in decreasing order.

    Balls up to a few thousand vertices are diagonalized in full; larger ones
    return the top ``k`` (default 6) eigenvalues from a sparse solver.
    """
    n = len(ball)
    if n == 1:
        return np.zeros(1)
    a = adjacency_matrix(ball)
    if n <= DENSE_LIMIT and k is None:
        return np.linalg.eigvalsh(a.toarray())[::-1]
    from scipy.sparse.linalg import eigsh

    k = min(k or 6, n - 2)
    vals = eigsh(a.astype(float), k=k, which="LA", return_eigenvectors=False)
    return np.sort(vals)[::-1]


def spectral_radius(ball: TreeBall) -> float:
    return float(truncated_spectrum(ball, k=None if len(ball) <= DENSE_LIMIT else 1)[0])


def radial_spectral_radius(p: int, r: int) -> float:
    """Top eigenvalue of the radial quotient, a tridiagonal (r+1)x(r+1) matrix."""
    if r == 0:
        return 0.0
    off = np.array([np.sqrt(p + 1)] + [np.sqrt(p)] * (r - 1))
    m = np.diag(off, 1) + np.diag(off, -1)
    return float(np.linalg.eigvalsh(m)[-1])


# --------------------------------------------------------------------------
# coset counts and the Hecke recursion


def right_cosets_of_determinant(engine: CosetEngine, k: int) -> list[Matrix]:
    """Distinct right cosets Gamma g over all integral g with det p^k.

    Integral Hermite forms need not be primitive; dividing out the content
    lands on vertices of smaller depth.
    """
    pair = _modular(engine)
    return sorted({pair.canon_right(pair.element(m)) for m in hermite_forms(pair.p, k, primitive=False)})


def coset_count_checks(engine: CosetEngine, kmax: int = 4) -> list[CheckResult]:
    pair = _modular(engine)
    p = pair.p
    ball = build_tree_ball(engine, kmax, max_radius=max(kmax, radius_bound(p)))
    counts_ok, placement_ok = True, True
    witness = None
    for k in range(kmax + 1):
        cosets = right_cosets_of_determinant(engine, k)
        if len(cosets) != sum(p ** j for j in range(k + 1)):
            counts_ok, witness = False, f"k={k}: {len(cosets)}"
        expected = {v for v in ball.vertices if ball.depth[v] <= k and (k - ball.depth[v]) % 2 == 0}
        if set(cosets) != expected:
            placement_ok, witness = False, f"k={k}"
    n_sigma = len(engine.decompose_double_right(pair.sigma_p(1)))
    return [
        exact("modular.t_p_coset_count", "Rem8", n_sigma == p + 1, f"{n_sigma}",
              detail=f"{n_sigma} right cosets in Gamma sigma_p Gamma"),
        exact("modular.det_coset_counts", "Rem8", counts_ok, witness),
        exact("modular.det_cosets_in_ball", "Rem8", placement_ok, witness),
    ]


def hecke_recursion_checks(algebra: HeckeAlgebra, kmax: int = 3) -> list[CheckResult]:
    """T_p T_{p^k} = T_{p^{k+1}} + p T_{p^{k-1}}, with p T_1 replaced by (p+1)[Gamma] at k = 1."""
    pair = _modular(algebra.engine)
    p = pair.p
    ok, witness = True, None
    for k in range(1, kmax + 1):
        lhs = algebra.mul(t_p(algebra), t_p(algebra, k))
        lower = (p + 1) * algebra.unit() if k == 1 else p * t_p(algebra, k - 1)
        rhs = t_p(algebra, k + 1) + lower
        if lhs != rhs:
            ok, witness = False, f"k={k}"
    star_ok = algebra.star(t_p(algebra)) == t_p(algebra)
    tp_gamma = t_p_action(algebra, algebra.coset_vector(pair.identity))
    twice = t_p_action(algebra, tp_gamma)
    return [
        exact("modular.hecke_recursion", "Def1", ok, witness),
        exact("modular.t_p_self_adjoint", "Def1", star_ok),
        exact("modular.t_p_on_gamma", "Def1", len(tp_gamma) == p + 1 and tp_gamma.mass() == p + 1),
        exact("modular.t_p_twice_on_gamma", "Def1", twice[algebra.engine.right(pair.identity)] == Fraction(p + 1)),
    ]


def spectrum_checks(engine: CosetEngine, rmax: int) -> list[CheckResult]:
    pair = _modular(engine)
    p = pair.p
    radii = [spectral_radius(build_tree_ball(engine, r, max_radius=rmax)) for r in range(rmax + 1)]
    limit = 2 * np.sqrt(p)
    below = max(radii) < limit
    monotone = all(b >= a - 1e-12 for a, b in zip(radii, radii[1:]))
    radial = max(abs(x - radial_spectral_radius(p, r)) for r, x in enumerate(radii))
    return [
        exact("tree.spectral_radius_below_ramanujan", "Rem8-spectrum", below,
              f"{max(radii):.6f}", detail=f"radius {rmax}: {radii[-1]:.6f} < {limit:.6f}"),
        exact("tree.spectral_radius_monotone", "Rem8-spectrum", monotone),
        measured("tree.spectral_radius_radial", "Rem8-spectrum", radial, 1e-9),
    ]


def to_dot(ball: TreeBall) -> str:
    def name(m):
        return f"[[{m[0]},{m[1]}],[{m[2]},{m[3]}]]"

    lines = [f"graph tree_p{ball.p}_r{ball.radius} {{"]
    for v in ball.vertices:
        label = f"R|G|{name(v)}"
        if ball.psi is not None:
            label += f"\\n{format_word(ball.psi[v])}"
        lines.append(f'  "{name(v)}" [label="{label}"];')
    for v, w in ball.edges():
        if w in ball.depth and v in ball.depth:
            lines.append(f'  "{name(v)}" -- "{name(w)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
