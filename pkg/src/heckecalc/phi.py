"""The diagonal representation of the Hecke algebra on l2(G) and the trace Gram pairing."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cosets import CosetVector, RIGHT
from .hecke import HeckeElement
from .rep import ConvElement, RepEngine, left_conv, opnorm, right_conv
from .report import INFO, CheckResult, measured


@dataclass(frozen=True)
class TensorOperator:
    """f -> P (a * f * b) P on l2(G)."""

    a: ConvElement
    b: ConvElement

    def matrix(self) -> np.ndarray:
        pair = self.a.pair
        p = np.zeros(pair.order)
        p[list(pair.gamma)] = 1.0
        m = left_conv(self.a) @ right_conv(self.b)
        return p[:, None] * m * p[None, :]

    def adjoint(self) -> "TensorOperator":
        return TensorOperator(self.a.adjoint(), self.b.adjoint())


class DiagonalPhi:
    """Phi built from the coefficients t of a :class:`RepEngine`."""

    def __init__(self, rep: RepEngine):
        self.rep = rep
        self.pair = rep.pair
        self.algebra = rep.algebra
        self.engine = rep.engine
        self.tol = rep.tol
        self._double: dict[int, np.ndarray] = {}

    # images -----------------------------------------------------------------

    def phi_coset(self, sigma: int) -> TensorOperator:
        """Image of the right coset Gamma sigma."""
        return TensorOperator(self.rep.right_coset(sigma), self.rep.double(sigma).adjoint())

    def phi_double_op(self, sigma: int) -> TensorOperator:
        d = self.rep.double(sigma)
        return TensorOperator(d, d.adjoint())

    def triple_set(self, sigma1: int, sigma2: int) -> frozenset[int]:
        """Gamma s1 Gamma s2 Gamma as a union of double cosets."""
        pair = self.pair
        reps = {pair.double_canon(pair.mul(pair.mul(sigma1, c), sigma2)) for c in pair.gamma}
        return frozenset().union(*(pair.double_coset(r) for r in reps))

    def phi_general(self, sigma1: int, sigma2: int, variant: str = "adjoint") -> TensorOperator:
        """Image of s1 Gamma s2, with right leg b = (t^S)^* for S = Gamma s1 Gamma s2 Gamma.

        ``raw`` drops the adjoint on the right leg.
        """
        rep = self.rep
        a = rep.of_set(rep.bitranslate(sigma1, sigma2))
        b = rep.of_set(self.triple_set(sigma1, sigma2))
        if variant == "adjoint":
            b = b.adjoint()
        elif variant != "raw":
            raise ValueError(f"unknown variant {variant!r}")
        return TensorOperator(a, b)

    def phi_left(self, sigma: int, variant: str = "adjoint") -> TensorOperator:
        """Image of the left coset sigma Gamma.

        ``adjoint``: b = (t^{Gamma s Gamma})^*; ``raw``: b = t^{Gamma s Gamma};
        ``inverse``: b = (t^{Gamma s^-1 Gamma})^*.
        """
        rep = self.rep
        if variant == "inverse":
            return TensorOperator(rep.left_coset(sigma), rep.double(self.pair.inv(sigma)).adjoint())
        return self.phi_general(sigma, self.pair.identity, variant)

    def phi_double(self, sigma: int) -> np.ndarray:
        key = self.pair.double_canon(sigma)
        if key not in self._double:
            self._double[key] = self.phi_double_op(key).matrix()
        return self._double[key]

    def phi(self, h: HeckeElement) -> np.ndarray:
        out = np.zeros((self.pair.order,) * 2, dtype=complex)
        for rep, c in h:
            out += float(c) * self.phi_double(rep)
        return out

    def phi_vector(self, v: CosetVector) -> np.ndarray:
        if v.side != RIGHT or not v.level.is_gamma:
            raise ValueError("Phi is defined here on right cosets of Gamma")
        out = np.zeros((self.pair.order,) * 2, dtype=complex)
        for key, c in v:
            out += float(c) * self.phi_coset(key.rep).matrix()
        return out

    # verification -------------------------------------------------------------

    def _sweep(self, cases, fn) -> tuple[float, str | None]:
        worst, witness = 0.0, None
        for case in cases:
            r = fn(*case)
            if r > worst:
                worst, witness = r, ", ".join(self.pair.format(g) for g in case)
        return worst, witness

    def check_unit(self) -> CheckResult:
        return measured("phi.unit", "Thm6", opnorm(self.phi(self.algebra.unit()) - self.rep.P), self.tol)

    def check_compression(self) -> CheckResult:
        P = self.rep.P
        mats = [self.phi_double(s) for s in self.rep.double_reps()]
        mats += [self.phi_coset(s).matrix() for s in self.rep.right_transversal()]
        return measured("phi.compression", "Thm6", max(opnorm(m - P @ m @ P) for m in mats), self.tol)

    def check_commutation(self) -> CheckResult:
        rep = self.rep
        elems = [rep.double(s) for s in rep.double_reps()] + [rep.right_coset(s) for s in rep.right_transversal()]
        worst = 0.0
        for a in elems:
            la = left_conv(a)
            for b in elems:
                rb = right_conv(b.adjoint())
                worst = max(worst, opnorm(la @ rb - rb @ la))
        return measured("phi.left_right_commute", "Thm6", worst, self.tol)

    def check_morphism(self) -> list[CheckResult]:
        alg = self.algebra
        reps = self.rep.double_reps()
        pairs = [(s1, s2) for s1 in reps for s2 in reps]

        def mul_residual(s1, s2):
            prod = alg.mul(alg.basis(s1), alg.basis(s2))
            return opnorm(self.phi_double(s1) @ self.phi_double(s2) - self.phi(prod))

        def star_residual(s):
            return opnorm(self.phi(alg.star(alg.basis(s))) - self.phi_double(s).conj().T)

        mul_r, mul_w = self._sweep(pairs, mul_residual)
        star_r, star_w = self._sweep([(s,) for s in reps], star_residual)
        adj_r, adj_w = self._sweep([(s,) for s in self.rep.right_transversal()],
                                   lambda s: opnorm(self.phi_coset(s).adjoint().matrix()
                                                    - self.phi_coset(s).matrix().conj().T))
        return [
            measured("phi.multiplicative", "Thm6", mul_r, self.tol, mul_w),
            measured("phi.star", "Thm6", star_r, self.tol, star_w),
            measured("phi.adjoint_swap", "Thm6", adj_r, self.tol, adj_w),
        ]

    def check_hecke_linear(self) -> CheckResult:
        alg = self.algebra
        cases = [(s1, s2) for s1 in self.rep.double_reps() for s2 in self.rep.right_transversal()]

        def residual(s1, s2):
            v = alg.coset_vector(s2)
            lhs = self.phi_double(s1) @ self.phi_vector(v)
            return opnorm(lhs - self.phi_vector(alg.act_left(alg.basis(s1), v)))

        r, w = self._sweep(cases, residual)
        return measured("phi.hecke_linear", "Thm6", r, self.tol, w)

    def composition_residual(self, variant: str = "adjoint") -> tuple[float, str | None]:
        """Phi(s1 Gamma) Phi(Gamma s2) against Phi(s1 Gamma s2) over both transversals."""
        rep = self.rep
        lefts = {s: self.phi_left(s, variant).matrix() for s in rep.left_transversal()}
        target = "raw" if variant == "raw" else "adjoint"
        rights = {s: self.phi_coset(s).matrix() for s in rep.right_transversal()}
        cases = [(s1, s2) for s1 in lefts for s2 in rights]
        return self._sweep(cases, lambda s1, s2: opnorm(
            lefts[s1] @ rights[s2] - self.phi_general(s1, s2, target).matrix()))

    def check_composition(self) -> list[CheckResult]:
        r, w = self.composition_residual("adjoint")
        out = [measured("phi.coset_composition", "Rem7", r, self.tol, w)]
        for variant in ("raw", "inverse"):
            rv, wv = self.composition_residual(variant)
            holds = "holds" if rv < self.tol else "does not hold"
            out.append(CheckResult(f"phi.coset_composition.{variant}", "Rem7", INFO, rv, wv,
                                   f"composition law {holds} with the {variant} right leg"))
        return out

    def check_surviving_term(self) -> CheckResult:
        """Phi([Gamma s]) delta_gamma only sees the right coset Gamma s gamma."""
        rep, pair = self.rep, self.pair
        ok, witness = True, None
        worst = 0.0
        for s in rep.right_transversal():
            a = left_conv(rep.right_coset(s))
            full = self.phi_coset(s).matrix()
            pieces = self.engine.decompose_double_right(s)
            for gamma in pair.gamma:
                target = pair.canon_right(pair.mul(s, gamma))
                col = np.zeros(pair.order, dtype=complex)
                col[gamma] = 1.0
                total = np.zeros(pair.order, dtype=complex)
                for key in pieces:
                    term = rep.P @ a @ right_conv(rep.of_key(key).adjoint()) @ col
                    total += term
                    if key.rep != target and np.max(np.abs(term)) >= self.tol:
                        ok, witness = False, f"{pair.format(s)}, {pair.format(gamma)}"
                out = full @ col
                if np.max(np.abs(out[[g for g in pair.elements() if not pair.in_gamma(g)]]), initial=0.0) >= self.tol:
                    ok, witness = False, f"{pair.format(s)}, {pair.format(gamma)}"
                worst = max(worst, float(np.max(np.abs(total - out))))
        return measured("phi.single_surviving_term", "Thm6-(3)", worst if ok else float("inf"), self.tol, witness)

    def check_all(self) -> list[CheckResult]:
        out = [self.check_unit(), self.check_compression(), self.check_commutation()]
        out.extend(self.check_morphism())
        out.append(self.check_hecke_linear())
        out.extend(self.check_composition())
        out.append(self.check_surviving_term())
        return out


# --------------------------------------------------------------------------
# Gram pairing


@dataclass
class GramMatrix:
    labels: list[str]
    matrix: np.ndarray

    @property
    def hermitian_residual(self) -> float:
        return opnorm(self.matrix - self.matrix.conj().T)

    @property
    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(h).min()) if len(h) else 0.0

    def checks(self, tol: float, prefix: str = "gram") -> list[CheckResult]:
        lam = self.min_eigenvalue
        return [
            measured(f"{prefix}.hermitian", "OpSys", self.hermitian_residual, tol),
            measured(f"{prefix}.psd", "OpSys", max(0.0, -lam), tol, detail=f"min eigenvalue {lam:.6e}"),
        ]

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *self.labels])
        for label, row in zip(self.labels, self.matrix):
            w.writerow([label, *(_fmt_complex(z) for z in row)])


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-15:
        return repr(float(z.real) + 0.0)
    return repr(complex(z.real + 0.0, z.imag + 0.0))


def trace_pairing(x: ConvElement, y: ConvElement) -> complex:
    """tau(x y^*)."""
    return (x * y.adjoint()).trace()


def gram(rep: RepEngine, pairs: Sequence[tuple[int, int]] | None = None) -> GramMatrix:
    """Entries tau(t^{s_i Gamma s'_i} (t^{s_j Gamma s'_j})^*)."""
    pair = rep.pair
    if pairs is None:
        pairs = [(a, b) for a in rep.left_transversal() for b in rep.right_transversal()]
    elems = [rep.of_set(rep.bitranslate(a, b)) for a, b in pairs]
    n = len(elems)
    m = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            m[i, j] = trace_pairing(elems[i], elems[j])
    labels = [f"{pair.format(a)}|{pair.format(b)}" for a, b in pairs]
    return GramMatrix(labels, m)


def parse_pairs(pair, items: Iterable) -> list[tuple[int, int]]:
    out = []
    for item in items:
        if isinstance(item, str):
            item = item.split("|")
        a, b = item
        out.append((pair.parse(str(a)), pair.parse(str(b))))
    return out
