"""Shared fixtures: the three worked configurations and random generators."""

import itertools
import random
from fractions import Fraction

import pytest

import gkz
from gkz import intlin

# Unit square over the h = 1 plane; relation lattice of rank 1.
E1_COLUMNS = ((1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1))
# Twisted cubic segment; relation lattice of rank 2, volume 3.
E2_COLUMNS = ((1, 0), (1, 1), (1, 2), (1, 3))
# Pyramid over a segment of length two; the last column carries no relation.
E3_COLUMNS = ((1, 0, 0), (1, 1, 0), (1, 2, 0), (1, 0, 1))

F = Fraction


@pytest.fixture(scope="session")
def e1_cfg():
    return gkz.point_config(E1_COLUMNS)


@pytest.fixture(scope="session")
def e2_cfg():
    return gkz.point_config(E2_COLUMNS)


@pytest.fixture(scope="session")
def e3_cfg():
    return gkz.point_config(E3_COLUMNS)


@pytest.fixture(scope="session")
def e1_sys():
    return gkz.build_system(E1_COLUMNS, (F(1, 5), F(1, 3), F(1, 7)))


@pytest.fixture(scope="session")
def e2_sys():
    return gkz.build_system(E2_COLUMNS, (F(1, 2), F(1, 3)))


@pytest.fixture(scope="session")
def e1_T(e1_cfg):
    # lower hull of the square lifted by (0, 1, 1, 0): both diagonals cells
    return gkz.regular_triangulation(e1_cfg, (F(0), F(1), F(1), F(0)))


@pytest.fixture(scope="session")
def e2_T(e2_cfg):
    # convex heights on the segment keep the three consecutive pairs
    return gkz.regular_triangulation(e2_cfg, (F(0), F(1), F(4), F(9)))


def random_config(rng, max_r=3, max_n=6, coord_bound=3):
    """A random valid configuration: h = first coordinate, Z-span full.

    Retries until the column set spans Z^r with all points on h = 1; the
    loop terminates fast because unit-ish columns are likely at this scale.
    """
    while True:
        r = rng.randint(2, max_r)
        n = rng.randint(r + 1, max_n)
        # keep the candidate pool strictly larger than n so the fill stops
        bound = coord_bound if (coord_bound + 1) ** (r - 1) > n else n
        cols = set()
        for _ in range(50 * n):
            tail = tuple(rng.randint(0, bound) for _ in range(r - 1))
            cols.add((1,) + tail)
            if len(cols) == n:
                break
        cols = tuple(sorted(cols))
        if len(cols) != n:
            continue
        if len(cols) < r + 1:
            continue
        M = intlin.mat([list(c) for c in cols])
        if intlin.rational_rank(intlin.transpose(M)) != r:
            continue
        S, _, _ = gkz.smith_normal_form(intlin.transpose(M))
        divisors = [S[i][i] for i in range(r)]
        if any(abs(d) != 1 for d in divisors):
            continue
        try:
            return gkz.point_config(cols)
        except gkz.ConfigurationError:
            continue


PRIMES = (97, 89, 83, 79, 73, 71, 67, 61, 59, 53)


def random_nonresonant_alpha(rng, cfg, T=None):
    """A rational parameter with no (simplex-)facet form integral on it."""
    forms = list(gkz.facet_forms(cfg))
    if T is not None:
        from gkz import geom

        for J in T.simplices:
            forms.extend(f for _, f in geom.cone_facets_of_simplex(cfg, J))
    for _ in range(200):
        q = rng.choice(PRIMES)
        alpha = tuple(F(rng.randint(1, q - 1), q) + rng.randint(-1, 1) for _ in range(cfg.r))
        vals = [sum(Fraction(f[k]) * alpha[k] for k in range(cfg.r)) for f in forms]
        if all(v.denominator != 1 for v in vals):
            return alpha
    raise AssertionError("could not sample a nonresonant parameter")


def brute_force_kernel_box(columns, bound):
    """All integer relations of the columns with entries in [-bound, bound]."""
    r = len(columns[0])
    n = len(columns)
    hits = []
    for l in itertools.product(range(-bound, bound + 1), repeat=n):
        if all(sum(l[j] * columns[j][k] for j in range(n)) == 0 for k in range(r)):
            hits.append(l)
    return hits


def all_annihilated(sys, solutions):
    report = gkz.annihilation_report(sys, solutions)
    assert report, "empty annihilation report"
    return all(flag for (_, _, flag) in report)


@pytest.fixture
def rng():
    return random.Random(20260817)
