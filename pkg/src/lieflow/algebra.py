"""Finite-dimensional Lie algebras given by structure constants."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .linalg import (
    DimensionError,
    RANK_TOL,
    Subspace,
    check_square,
    eye,
    is_exact,
    norm,
    nullspace,
    parse_scalar,
    to_exact,
    to_float,
    zeros,
)
from .report import Report


class StructureError(ValueError):
    """Inconsistent structure constants (e.g. violated antisymmetry)."""


@dataclass(frozen=True)
class LieAlgebra:
    """Lie algebra with basis ``e_0..e_{n-1}`` and ``[e_i, e_j] = sum_k C[i, j, k] e_k``.

    ``constants`` is the dense (n, n, n) tensor, object dtype in exact mode.
    Build instances with :meth:`from_structure` so antisymmetry is enforced.
    """

    dim: int
    labels: tuple[str, ...]
    constants: np.ndarray = field(repr=False)

    @property
    def exact(self) -> bool:
        return is_exact(self.constants)

    @classmethod
    def from_structure(cls, dim: int, structure, labels=None, mode: str = "exact") -> "LieAlgebra":
        """Build from a sparse list of ``(i, j, k, c)`` meaning ``[e_i, e_j] += c e_k``.

        Entries for ``(j, i)`` are filled in by antisymmetry.  Giving both
        orientations is allowed only if they agree.
        """
        if dim < 1:
            raise StructureError("dimension must be positive")
        if mode not in ("exact", "float"):
            raise StructureError(f"unknown scalar mode {mode!r}")
        labels = tuple(labels) if labels is not None else tuple(f"e{i + 1}" for i in range(dim))
        if len(labels) != dim:
            raise StructureError("number of labels does not match dimension")
        exact = mode == "exact"
        C = zeros((dim, dim, dim), exact)
        seen: dict[tuple[int, int, int], object] = {}
        for entry in structure:
            i, j, k, c = entry
            i, j, k = int(i), int(j), int(k)
            if not all(0 <= x < dim for x in (i, j, k)):
                raise StructureError(f"index out of range in {entry!r}")
            c = parse_scalar(c) if exact else float(parse_scalar(c))
            if i == j:
                if c != 0:
                    raise StructureError(f"[e{i}, e{i}] must vanish, got {entry!r}")
                continue
            key, val = ((i, j, k), c) if i < j else ((j, i, k), -c)
            if key in seen and seen[key] != val:
                raise StructureError(f"conflicting constants for bracket {key[:2]} component {k}")
            seen[key] = val
        for (i, j, k), c in seen.items():
            C[i, j, k] = c
            C[j, i, k] = -c
        return cls(dim, labels, C)

    def structure_list(self) -> list[tuple[int, int, int, object]]:
        out = []
        for i, j in combinations(range(self.dim), 2):
            for k in range(self.dim):
                if self.constants[i, j, k] != 0:
                    out.append((i, j, k, self.constants[i, j, k]))
        return out

    def basis_vector(self, i: int) -> np.ndarray:
        v = zeros(self.dim, self.exact)
        v[i] = Fraction(1) if self.exact else 1.0
        return v

    def to_float(self) -> "LieAlgebra":
        return LieAlgebra(self.dim, self.labels, to_float(self.constants))


def _coerce(alg: LieAlgebra, *vs):
    out = []
    exact = alg.exact and all(is_exact(np.asarray(v)) for v in vs)
    C = alg.constants if exact else to_float(alg.constants)
    for v in vs:
        v = np.asarray(v)
        if v.shape[0] != alg.dim:
            raise DimensionError(f"vector of length {v.shape[0]} in a {alg.dim}-dim algebra")
        out.append(v if exact else to_float(v))
    return C, out


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    """[x, y] by bilinear extension of the structure constants."""
    C, (x, y) = _coerce(alg, x, y)
    return np.tensordot(np.tensordot(x, C, axes=([0], [0])), y, axes=([0], [0]))


def ad_operator(alg: LieAlgebra, x) -> np.ndarray:
    """Matrix of ``y -> [x, y]`` (column j is ``[x, e_j]``)."""
    C, (x,) = _coerce(alg, x)
    return np.tensordot(x, C, axes=([0], [0])).T.copy()


def check_jacobi(alg: LieAlgebra, tol: float = 1e-12) -> Report:
    rep = Report("jacobi")
    n = alg.dim
    basis = [alg.basis_vector(i) for i in range(n)]
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                x, y, z = basis[i], basis[j], basis[k]
                r = (bracket(alg, x, bracket(alg, y, z))
                     + bracket(alg, y, bracket(alg, z, x))
                     + bracket(alg, z, bracket(alg, x, y)))
                worst = max(worst, norm(r))
    rep.add("jacobi", worst, tol)
    return rep


def derivation_residual(alg: LieAlgebra, D) -> float:
    n = check_square(D)
    if n != alg.dim:
        raise DimensionError(f"{n}x{n} map on a {alg.dim}-dim algebra")
    if not is_exact(D):
        alg = alg.to_float()
    worst = 0.0
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            ei, ej = alg.basis_vector(i), alg.basis_vector(j)
            lhs = D @ bracket(alg, ei, ej)
            rhs = bracket(alg, D @ ei, ej) + bracket(alg, ei, D @ ej)
            worst = max(worst, norm(lhs - rhs))
    return worst


def is_derivation(alg: LieAlgebra, D, tol: float = 1e-10) -> Report:
    """Check ``D[x, y] = [Dx, y] + [x, Dy]`` on all basis pairs."""
    rep = Report("derivation")
    rep.add("derivation", derivation_residual(alg, D), tol)
    return rep


def ad_of_map(A) -> np.ndarray:
    """Operator ``B -> AB - BA`` on row-major vectorised n x n matrices."""
    n = check_square(A)
    ident = eye(n, is_exact(A))
    return np.kron(A, ident) - np.kron(ident, A.T)


def vec(B) -> np.ndarray:
    return np.asarray(B).reshape(-1)


def unvec(v, n: int) -> np.ndarray:
    return np.asarray(v).reshape(n, n)


def killing_form(alg: LieAlgebra, x, y):
    """B(x, y) = trace(ad x . ad y)."""
    return np.trace(ad_operator(alg, x) @ ad_operator(alg, y))


def killing_matrix(alg: LieAlgebra) -> np.ndarray:
    ads = [ad_operator(alg, alg.basis_vector(i)) for i in range(alg.dim)]
    exact = alg.exact
    K = zeros((alg.dim, alg.dim), exact)
    for i in range(alg.dim):
        for j in range(alg.dim):
            K[i, j] = np.trace(ads[i] @ ads[j])
    return K


def center(alg: LieAlgebra, tol: float = RANK_TOL) -> Subspace:
    """Null space of the stacked ad(e_i): vectors commuting with every basis element."""
    ads = [ad_operator(alg, alg.basis_vector(i)) for i in range(alg.dim)]
    stacked = np.concatenate(ads, axis=0)
    return Subspace(nullspace(stacked, tol))


# --------------------------------------------------------------------------
# standard algebras
# --------------------------------------------------------------------------

def abelian(n: int, mode: str = "exact") -> LieAlgebra:
    return LieAlgebra.from_structure(n, [], mode=mode)


def heisenberg(mode: str = "exact") -> LieAlgebra:
    return LieAlgebra.from_structure(3, [(0, 1, 2, 1)], labels=("e1", "e2", "e3"), mode=mode)


def sl2(mode: str = "exact") -> LieAlgebra:
    """Basis (H, E, F): [H,E] = 2E, [H,F] = -2F, [E,F] = H."""
    return LieAlgebra.from_structure(
        3, [(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)], labels=("H", "E", "F"), mode=mode)


def semidirect_algebra(mode: str = "exact") -> LieAlgebra:
    """Lie algebra of R x_rho R^2 with rho_t = exp(t * rotation): [T, v] = J v."""
    return LieAlgebra.from_structure(
        3, [(0, 1, 2, 1), (0, 2, 1, -1)], labels=("T", "X", "Y"), mode=mode)


def sl_basis(n: int) -> tuple[list[np.ndarray], list[str]]:
    """Matrix basis of sl(n): H_1..H_{n-1}, then E_ij (i<j), then E_ji in the same order."""
    if n < 2:
        raise ValueError("sl(n) needs n >= 2")
    mats, labels = [], []
    for i in range(n - 1):
        m = zeros((n, n), True)
        m[i, i], m[i + 1, i + 1] = Fraction(1), Fraction(-1)
        mats.append(m)
        labels.append(f"H{i + 1}" if n > 2 else "H")
    upper = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in upper:
        m = zeros((n, n), True)
        m[i, j] = Fraction(1)
        mats.append(m)
        labels.append(f"E{i + 1}{j + 1}" if n > 2 else "E")
    for i, j in upper:
        m = zeros((n, n), True)
        m[j, i] = Fraction(1)
        mats.append(m)
        labels.append(f"F{i + 1}{j + 1}" if n > 2 else "F")
    return mats, labels


def coordinates_in(mats: list[np.ndarray], M) -> np.ndarray:
    """Exact coordinates of matrix ``M`` in the matrix basis ``mats``."""
    B = np.stack([vec(m) for m in mats], axis=1)
    from .linalg import solve
    gram = B.T @ B
    coef = solve(gram, B.T @ vec(to_exact(M)))
    if any(v != 0 for v in vec(M) - B @ coef):
        raise ValueError("matrix is not in the span of the basis")
    return coef


def matrix_algebra(mats: list[np.ndarray], labels=None, mode: str = "exact") -> LieAlgebra:
    """Structure constants of the span of ``mats`` under the matrix commutator."""
    n = len(mats)
    structure = []
    for i in range(n):
        for j in range(i + 1, n):
            c = coordinates_in(mats, mats[i] @ mats[j] - mats[j] @ mats[i])
            structure.extend((i, j, k, c[k]) for k in range(n) if c[k] != 0)
    return LieAlgebra.from_structure(n, structure, labels=labels, mode=mode)


def sl(n: int, mode: str = "exact") -> LieAlgebra:
    mats, labels = sl_basis(n)
    return matrix_algebra(mats, labels, mode)
