import numpy as np
import pytest
from scipy.linalg import sqrtm

from heckecalc.config import DATA_DIR
from heckecalc.cosets import CosetEngine
from heckecalc.groups import FinitePair, ModularPair
from heckecalc.hecke import HeckeAlgebra
from heckecalc.rep import RepEngine, UnitaryExtension, build_t, load_extension


def s3_pair():
    return FinitePair(3, ["(1 2)", "(1 2 3)"], ["(1 2)"])


def s4_pair():
    return FinitePair(4, ["(1 2)", "(1 2 3 4)"], ["(1 2)", "(1 2 3)"])


def f21_pair():
    # x -> x+1 and x -> 2x on Z/7, points shifted to 1..7; Gamma = <x -> 2x>
    return FinitePair(7, ["(1 2 3 4 5 6 7)", "(2 3 5)(4 7 6)"], ["(2 3 5)(4 7 6)"])


def f21_rho(pair):
    """The 3-dim representation induced from a nontrivial character of Z/7."""
    z = np.exp(2j * np.pi / 7)
    squares = [1, 2, 4]

    def rho(g):
        perm = pair.perms[g]
        b = perm[0]
        a = (perm[1] - perm[0]) % 7
        m = np.zeros((3, 3), dtype=complex)
        for j, c in enumerate(squares):
            m[squares.index(a * c % 7), j] = z ** (b * pow(a * c, -1, 7) % 7)
        return m

    return rho


def conjugated_extension(pair, rho, seed=0):
    """Conjugate a representation whose restriction to Gamma is regular into the delta basis."""
    dim = len(pair.gamma)
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    t = np.column_stack([rho(g) @ xi for g in pair.gamma])
    w = t @ np.linalg.inv(sqrtm(t.conj().T @ t))
    mats = {g: w.conj().T @ rho(g) @ w for g in pair.generators()}
    return UnitaryExtension(pair, pair.gamma, mats)


class Setup:
    def __init__(self, pair, pi=None):
        self.pair = pair
        self.engine = CosetEngine(pair)
        self.algebra = HeckeAlgebra(self.engine)
        self.pi = pi
        self.rep = None if pi is None else RepEngine(self.engine, build_t(pi), pi=pi)

    def el(self, text):
        return self.pair.parse(text)


@pytest.fixture(scope="session")
def s3():
    pair = s3_pair()
    return Setup(pair, load_extension(pair, DATA_DIR / "s3_c2_pi.yaml"))


@pytest.fixture(scope="session")
def s3_alt():
    pair = s3_pair()
    return Setup(pair, load_extension(pair, DATA_DIR / "s3_c2_pi_alt.yaml"))


@pytest.fixture(scope="session")
def s4():
    pair = s4_pair()
    return Setup(pair, load_extension(pair, DATA_DIR / "s4_s3_pi.yaml"))


@pytest.fixture(scope="session")
def f21():
    pair = f21_pair()
    return Setup(pair, conjugated_extension(pair, f21_rho(pair), seed=1))


@pytest.fixture(scope="session", params=[2, 3, 5])
def modular(request):
    return Setup(ModularPair(request.param))


@pytest.fixture(scope="session")
def mod3():
    return Setup(ModularPair(3))
