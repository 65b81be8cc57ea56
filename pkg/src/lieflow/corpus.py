"""Random test corpora with controlled spectra, built in exact arithmetic."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .linalg import eye, inverse, zeros


def _unimodular(n: int, rng: np.random.Generator) -> np.ndarray:
    """Integer matrix with determinant 1 and small entries (L @ U)."""
    L, U = eye(n, True), eye(n, True)
    for i in range(n):
        for j in range(i):
            L[i, j] = Fraction(int(rng.integers(-1, 2)))
            U[j, i] = Fraction(int(rng.integers(-1, 2)))
    P = L @ U
    perm = rng.permutation(n)
    return P[perm]


def _block(kind: str, rng: np.random.Generator, used: set) -> np.ndarray:
    def fresh_real():
        while True:
            lam = Fraction(int(rng.integers(-6, 7)), int(rng.choice([1, 2])))
            if lam not in used:
                used.add(lam)
                return lam

    if kind == "real":
        return np.array([[fresh_real()]], dtype=object)
    if kind == "defective":
        lam = fresh_real()
        m = int(rng.integers(2, 4))
        B = eye(m, True) * lam
        for i in range(m - 1):
            B[i, i + 1] = Fraction(1)
        return B
    if kind in ("complex", "complex_defective"):
        while True:
            a, b = Fraction(int(rng.integers(-3, 4))), Fraction(int(rng.integers(1, 4)))
            if (a, b) not in used:
                used.add((a, b))
                break
        R = np.array([[a, -b], [b, a]], dtype=object)
        if kind == "complex":
            return R
        B = zeros((4, 4), True)
        B[:2, :2] = R
        B[2:, 2:] = R
        B[0, 2] = B[1, 3] = Fraction(1)
        return B
    raise ValueError(kind)


def random_rational_matrix(n: int, rng: np.random.Generator, kinds=None) -> tuple[np.ndarray, str]:
    """A conjugate P B P^-1 of a block matrix B with a prescribed spectrum type.

    Returns the exact matrix and a label listing the blocks used.
    """
    used: set = set()
    blocks = []
    size = 0
    kinds = kinds or ["real", "defective", "complex", "complex_defective"]
    while size < n:
        room = n - size
        options = [k for k in kinds
                   if (k == "real" and room >= 1) or (k == "defective" and room >= 2)
                   or (k == "complex" and room >= 2) or (k == "complex_defective" and room >= 4)]
        if not options:
            options = ["real"]
        kind = str(rng.choice(options))
        B = _block(kind, rng, used)
        if B.shape[0] > room:
            B = B[:room, :room]
        blocks.append((kind, B))
        size += B.shape[0]
    D = zeros((n, n), True)
    pos = 0
    for _, B in blocks:
        m = B.shape[0]
        D[pos:pos + m, pos:pos + m] = B
        pos += m
    P = _unimodular(n, rng)
    return P @ D @ inverse(P), "+".join(k for k, _ in blocks)


def rational_corpus(count: int, seed: int = 0, dims=(2, 6)) -> list[tuple[np.ndarray, str]]:
    rng = np.random.default_rng(seed)
    return [random_rational_matrix(int(rng.integers(dims[0], dims[1] + 1)), rng) for _ in range(count)]
