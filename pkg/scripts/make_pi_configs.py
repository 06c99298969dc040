"""Regenerate the decimal pi file shipped for (S4, S3).

pi is built as W^* rho W where rho = (2-dim) + (standard 3-dim) + (sign) and
W = T (T^* T)^{-1/2}, T having columns rho(gamma) xi for gamma in Gamma. T
intertwines the left regular representation of Gamma with rho, so the
restriction of pi to Gamma is the regular permutation action.

    python scripts/make_pi_configs.py src/heckecalc/data/s4_s3_pi.yaml
"""

import sys

import numpy as np
import yaml
from scipy.linalg import block_diag, sqrtm

from heckecalc.groups import FinitePair

PAIRINGS = [frozenset({frozenset({0, 1}), frozenset({2, 3})}),
            frozenset({frozenset({0, 2}), frozenset({1, 3})}),
            frozenset({frozenset({0, 3}), frozenset({1, 2})})]


def perm_matrix(perm):
    n = len(perm)
    m = np.zeros((n, n))
    for i, j in enumerate(perm):
        m[j, i] = 1.0
    return m


def sum_zero_basis(n):
    q, _ = np.linalg.qr(np.eye(n) - 1.0 / n)
    return q[:, : n - 1]


def two_dim(perm):
    # S4 acts on the three pairings; project onto the sum-zero plane
    images = []
    for pr in PAIRINGS:
        moved = frozenset(frozenset(perm[x] for x in block) for block in pr)
        images.append(PAIRINGS.index(moved))
    b = sum_zero_basis(3)
    return b.T @ perm_matrix(images) @ b


def standard(perm):
    b = sum_zero_basis(4)
    return b.T @ perm_matrix(perm) @ b


def sign(perm):
    return np.array([[np.linalg.det(perm_matrix(perm))]])


def main(out):
    pair = FinitePair(4, ["(1 2)", "(1 2 3 4)"], ["(1 2)", "(1 2 3)"])
    rho = {g: block_diag(two_dim(p), standard(p), sign(p)) for g, p in enumerate(pair.perms)}
    xi = np.random.default_rng(20260101).normal(size=6)
    t = np.column_stack([rho[g] @ xi for g in pair.gamma])
    w = np.real_if_close(t @ np.linalg.inv(sqrtm(t.T @ t)))
    data = {
        "notes": "pi = (2-dim) + (standard 3-dim) + (sign) of S4, conjugated into the delta basis "
                 "of l2(S3) so that S3 acts by left translation; generated by scripts/make_pi_configs.py",
        "basis": [pair.format(g) for g in pair.gamma],
        "generators": [],
    }
    for text in ["(1 2)", "(1 2 3 4)"]:
        g = pair.parse(text)
        m = w.T @ rho[g] @ w
        if pair.in_gamma(g):
            m = np.round(m)  # exactly the regular permutation matrix
        m[np.abs(m) < 1e-14] = 0.0
        m = m + 0.0
        data["generators"].append({"element": text, "matrix": [[float(x) for x in row] for row in m]})
    with open(out, "w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, sort_keys=False, width=200, default_flow_style=None)


if __name__ == "__main__":
    main(sys.argv[1])
