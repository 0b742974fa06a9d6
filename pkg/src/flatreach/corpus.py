"""Seeded random relations and a few fixed reference relations."""

from __future__ import annotations

import random

import numpy as np

from .dbm import DbRelation
from .octagon import OctRelation, atom_cells, from_cells


def random_db_relation(rng: random.Random, n_vars: int, lo: int = -3, hi: int = 3,
                       max_atoms: int | None = None) -> DbRelation:
    size = 2 * n_vars
    top = max_atoms if max_atoms is not None else 3 * n_vars
    count = rng.randint(1, max(1, top))
    atoms = []
    for _ in range(count):
        u, v = rng.sample(range(size), 2)
        atoms.append((u, v, rng.randint(lo, hi)))
    return DbRelation.from_atoms(n_vars, atoms)


def random_octagon_atoms(rng: random.Random, n: int, lo: int, hi: int, count: int):
    atoms = []
    for _ in range(count):
        if n == 1 or rng.random() < 0.25:
            v = rng.randrange(n)
            atoms.append(({v: rng.choice((1, -1))}, rng.randint(lo, hi)))
        else:
            u, v = rng.sample(range(n), 2)
            atoms.append(({u: rng.choice((1, -1)), v: rng.choice((1, -1))}, rng.randint(lo, hi)))
    return atoms


def random_oct_relation(rng: random.Random, n_vars: int, lo: int = -5, hi: int = 5,
                        max_atoms: int | None = None) -> OctRelation:
    top = max_atoms if max_atoms is not None else 3 * n_vars
    count = rng.randint(1, max(1, top))
    return OctRelation.from_atoms(n_vars, random_octagon_atoms(rng, 2 * n_vars, lo, hi, count))


def db_corpus(seed: int, count: int, max_vars: int = 4, lo: int = -3, hi: int = 3) -> list[DbRelation]:
    rng = random.Random(seed)
    return [random_db_relation(rng, rng.randint(1, max_vars), lo, hi) for _ in range(count)]


def oct_corpus(seed: int, count: int, max_vars: int = 3, lo: int = -5, hi: int = 5) -> list[OctRelation]:
    rng = random.Random(seed)
    return [random_oct_relation(rng, rng.randint(1, max_vars), lo, hi) for _ in range(count)]


def octagon_set_corpus(seed: int, count: int, max_vars: int = 3, lo: int = -5,
                       hi: int = 5) -> list[np.ndarray]:
    """Raw (unclosed) dual matrices of random octagons over at most ``max_vars`` variables."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(1, max_vars)
        cells = []
        for terms, c in random_octagon_atoms(rng, n, lo, hi, rng.randint(1, 3 * n)):
            cells += atom_cells(terms, c)
        out.append(from_cells(n, cells))
    return out


def two_counter_relation() -> DbRelation:
    """``x1 - x1' <= 1, x1 - x2' <= -1, x2 - x1' <= -2, x2 - x2' <= 2``."""
    return DbRelation.from_atoms(2, [(0, 2, 1), (0, 3, -1), (1, 2, -2), (1, 3, 2)])


def swap_shift_relation() -> DbRelation:
    """``x' = y + 1 and y' = x``."""
    return DbRelation.from_atoms(2, [(2, 1, 1), (1, 2, -1), (3, 0, 0), (0, 3, 0)])


def spiral_relation() -> DbRelation:
    """Seven-counter relation whose zigzag automaton exhibits a spiral cycle."""
    n = 7
    x = lambda i: i - 1  # noqa: E731
    p = lambda i: n + i - 1  # noqa: E731
    atoms = [
        (x(1), p(2), 0), (x(2), p(3), 0), (p(3), x(4), 0), (p(4), x(5), 0),
        (p(5), x(6), 0), (p(6), x(6), 1), (p(6), x(7), 0), (x(7), p(7), 1),
        (p(7), x(5), 0), (x(5), p(1), -1),
    ]
    return DbRelation.from_atoms(n, atoms)
