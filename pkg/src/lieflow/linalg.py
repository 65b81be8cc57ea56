"""Dual-mode (exact rational / binary64) linear algebra helpers.

Matrices are plain numpy arrays.  An array with ``dtype=object`` holding
``fractions.Fraction`` entries is *exact*; a ``float64`` array is *float*.
Nothing here converts between the two silently: callers use
:func:`to_exact` / :func:`to_float` explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

RANK_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when operand shapes do not fit together."""


# --------------------------------------------------------------------------
# scalars and conversions
# --------------------------------------------------------------------------

def parse_scalar(value) -> Fraction:
    """Parse ``"p/q"``, a decimal string, an int or a Fraction exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # decimal repr, so "0.1" in a JSON float means 1/10
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot parse scalar {value!r}")


def is_exact(M) -> bool:
    return isinstance(M, np.ndarray) and M.dtype == object


def to_exact(M) -> np.ndarray:
    arr = np.asarray(M, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = parse_scalar(v)
    return out


def to_float(M) -> np.ndarray:
    arr = np.asarray(M)
    if arr.dtype == object:
        return np.vectorize(float, otypes=[float])(arr) if arr.size else arr.astype(float)
    return arr.astype(float)


def eye(n: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape)


def like(M, exact_source) -> np.ndarray:
    """Cast ``M`` to the scalar mode of ``exact_source``."""
    return to_exact(M) if is_exact(exact_source) else to_float(M)


def norm(M) -> float:
    """Frobenius / Euclidean norm, returned as a float in both modes."""
    arr = np.asarray(M)
    if arr.dtype == object:
        s = sum((v * v for v in arr.flat), Fraction(0))
        return float(s) ** 0.5
    return float(np.linalg.norm(arr))


def is_zero(M) -> bool:
    arr = np.asarray(M)
    if arr.dtype == object:
        return all(v == 0 for v in arr.flat)
    return not np.any(arr)


def check_square(M) -> int:
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr.shape[0]


def matpow(M, k: int) -> np.ndarray:
    n = check_square(M)
    out = eye(n, is_exact(M))
    for _ in range(k):
        out = out @ M
    return out


def commutator(A, B) -> np.ndarray:
    return A @ B - B @ A


# --------------------------------------------------------------------------
# exact row reduction
# --------------------------------------------------------------------------

def rref(M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over the rationals.  Returns (R, pivot columns)."""
    R = to_exact(M).copy()
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = next((i for i in range(r, rows) if R[i, c] != 0), None)
        if p is None:
            continue
        if p != r:
            R[[r, p]] = R[[p, r]]
        piv = R[r, c]
        R[r] = R[r] / piv
        for i in range(rows):
            if i != r and R[i, c] != 0:
                R[i] = R[i] - R[i, c] * R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def _exact_nullspace(M) -> np.ndarray:
    R, pivots = rref(M)
    cols = R.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = zeros((cols, len(free)), True)
    for j, f in enumerate(free):
        basis[f, j] = Fraction(1)
        for i, p in enumerate(pivots):
            basis[p, j] = -R[i, f]
    return basis


def _float_nullspace(M, tol: float) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols)
    _, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(cols)
    rank = int(np.sum(s > tol * smax))
    return vh[rank:].conj().T.copy()


def nullspace(M, tol: float = RANK_TOL) -> np.ndarray:
    """Columns spanning the kernel of ``M`` (exact or SVD with relative tol)."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionError("nullspace expects a 2-d array")
    if M.dtype == object:
        return _exact_nullspace(M)
    return _float_nullspace(M, tol)


def rank(M, tol: float = RANK_TOL) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if M.dtype == object:
        return len(rref(M)[1])
    s = np.linalg.svd(M.astype(float), compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def column_basis(M, tol: float = RANK_TOL) -> np.ndarray:
    """An independent set of columns spanning the column space of ``M``."""
    M = np.asarray(M)
    n = M.shape[0]
    if M.size == 0:
        return zeros((n, 0), M.dtype == object)
    if M.dtype == object:
        _, pivots = rref(M)
        return M[:, pivots].copy()
    u, s, _ = np.linalg.svd(M.astype(float), full_matrices=False)
    if s[0] == 0:
        return np.zeros((n, 0))
    r = int(np.sum(s > tol * s[0]))
    return u[:, :r].copy()


def inverse(M) -> np.ndarray:
    n = check_square(M)
    if is_exact(M):
        aug = np.concatenate([M, eye(n, True)], axis=1)
        R, pivots = rref(aug)
        if pivots[:n] != list(range(n)) or len(pivots) < n:
            raise np.linalg.LinAlgError("singular matrix")
        return R[:, n:].copy()
    return np.linalg.inv(M)


def solve(M, b) -> np.ndarray:
    if is_exact(M):
        return inverse(M) @ b
    return np.linalg.solve(M, b)


def residual_to_span(B, v) -> float:
    """Euclidean distance from ``v`` to the column span of ``B``.

    Exact mode solves the normal equations rationally, so a vector inside
    the span gives exactly 0.0.
    """
    B = np.asarray(B)
    v = np.asarray(v)
    if B.shape[1] == 0:
        return norm(v)
    if B.dtype == object and v.dtype == object:
        gram = B.T @ B
        coef = solve(gram, B.T @ v)
        return norm(v - B @ coef)
    Bf, vf = to_float(B), to_float(v)
    coef, *_ = np.linalg.lstsq(Bf, vf, rcond=None)
    return float(np.linalg.norm(vf - Bf @ coef))


# --------------------------------------------------------------------------
# subspaces
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """A subspace of R^n given by independent basis columns."""

    basis: np.ndarray

    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None, tol: float = RANK_TOL) -> "Subspace":
        arr = np.asarray(vectors)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.size == 0:
            if ambient_dim is None:
                raise DimensionError("empty span needs an ambient dimension")
            return cls(zeros((ambient_dim, 0), arr.dtype == object))
        return cls(column_basis(arr, tol))

    @classmethod
    def whole(cls, n: int, exact: bool = True) -> "Subspace":
        return cls(eye(n, exact))

    @classmethod
    def zero(cls, n: int, exact: bool = True) -> "Subspace":
        return cls(zeros((n, 0), exact))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def exact(self) -> bool:
        return self.basis.dtype == object

    def distance(self, v) -> float:
        return residual_to_span(self.basis, np.asarray(v))

    def contains(self, v, tol: float = 1e-10) -> bool:
        d = self.distance(v)
        return d == 0.0 if (self.exact and is_exact(np.asarray(v))) else d <= tol * max(1.0, norm(v))

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace.span(np.concatenate([self.basis, _match(other.basis, self.basis)], axis=1),
                             self.ambient_dim)

    def intersect(self, other: "Subspace", tol: float = RANK_TOL) -> "Subspace":
        a, b = self.basis, _match(other.basis, self.basis)
        if a.shape[1] == 0 or b.shape[1] == 0:
            return Subspace.zero(self.ambient_dim, self.exact)
        coeffs = nullspace(np.concatenate([a, -b], axis=1), tol)
        return Subspace.span(a @ coeffs[: a.shape[1]], self.ambient_dim, tol)

    def orthonormal(self) -> np.ndarray:
        """Float orthonormal basis (QR of the stored basis)."""
        if self.dim == 0:
            return np.zeros((self.ambient_dim, 0))
        q, _ = np.linalg.qr(to_float(self.basis))
        return q

    def projector(self) -> np.ndarray:
        q = self.orthonormal()
        return q @ q.T

    def equals(self, other: "Subspace", tol: float = RANK_TOL) -> bool:
        if self.dim != other.dim:
            return False
        joined = np.concatenate([self.basis, _match(other.basis, self.basis)], axis=1)
        return rank(joined, tol) == self.dim


def _match(M, ref) -> np.ndarray:
    if is_exact(ref) and is_exact(M):
        return M
    if is_exact(ref) or is_exact(M):
        return to_float(M)
    return M


def stack_kernel(mats: Sequence[np.ndarray], n: int, tol: float = RANK_TOL) -> Subspace:
    """Common kernel of several n-column matrices."""
    mats = [m for m in mats if m.size]
    if not mats:
        return Subspace.whole(n)
    exact = all(is_exact(m) for m in mats)
    stacked = np.concatenate([m if exact else to_float(m) for m in mats], axis=0)
    return Subspace(nullspace(stacked, tol))


# --------------------------------------------------------------------------
# polynomials over Q (coefficient lists, lowest degree first)
# --------------------------------------------------------------------------

Poly = list  # list[Fraction], index = degree


def ptrim(p: Iterable[Fraction]) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def pdeg(p: Poly) -> int:
    return len(p) - 1


def padd(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return ptrim((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def pscale(p: Poly, c) -> Poly:
    return ptrim(c * a for a in p)


def psub(p: Poly, q: Poly) -> Poly:
    return padd(p, pscale(q, Fraction(-1)))


def pmul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return ptrim(out)


def pdivmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    q = ptrim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = [Fraction(a) for a in ptrim(p)]
    if len(r) < len(q):
        return [], r
    quot = [Fraction(0)] * (len(r) - len(q) + 1)
    lead = q[-1]
    while len(r) >= len(q) and r:
        c = r[-1] / lead
        shift = len(r) - len(q)
        quot[shift] = c
        for i, b in enumerate(q):
            r[shift + i] -= c * b
        r = ptrim(r)
    return ptrim(quot), r


def pmod(p: Poly, q: Poly) -> Poly:
    return pdivmod(p, q)[1]


def pmonic(p: Poly) -> Poly:
    p = ptrim(p)
    return [a / p[-1] for a in p] if p else []


def pderiv(p: Poly) -> Poly:
    return ptrim(i * p[i] for i in range(1, len(p)))


def pgcd(p: Poly, q: Poly) -> Poly:
    a, b = ptrim(p), ptrim(q)
    while b:
        a, b = b, pmod(a, b)
    return pmonic(a)


def pgcdex(p: Poly, q: Poly) -> tuple[Poly, Poly, Poly]:
    """Return (s, t, g) with s*p + t*q = g = monic gcd(p, q)."""
    r0, r1 = ptrim(p), ptrim(q)
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while r1:
        quo, rem = pdivmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, psub(s0, pmul(quo, s1))
        t0, t1 = t1, psub(t0, pmul(quo, t1))
    lead = r0[-1]
    return pscale(s0, 1 / lead), pscale(t0, 1 / lead), pmonic(r0)


def pinvert(p: Poly, modulus: Poly) -> Poly:
    s, _, g = pgcdex(p, modulus)
    if g != [Fraction(1)]:
        raise ZeroDivisionError("polynomial not invertible modulo the given modulus")
    return pmod(s, modulus)


def pcompose_mod(p: Poly, s: Poly, modulus: Poly) -> Poly:
    """p(s(x)) mod modulus, by Horner."""
    out: Poly = []
    for a in reversed(p):
        out = pmod(padd(pmul(out, s), [a]), modulus)
    return out


def squarefree_part(p: Poly) -> Poly:
    p = pmonic(p)
    return pmonic(pdivmod(p, pgcd(p, pderiv(p)))[0])


def peval_matrix(p: Poly, M) -> np.ndarray:
    """Evaluate polynomial ``p`` at a square matrix by Horner."""
    n = check_square(M)
    exact = is_exact(M)
    out = zeros((n, n), exact)
    ident = eye(n, exact)
    for a in reversed(p):
        out = out @ M + (ident * a if exact else ident * float(a))
    return out


def minimal_polynomial(M) -> Poly:
    """Monic minimal polynomial of an exact matrix (Krylov on matrix powers)."""
    n = check_square(M)
    powers = [eye(n, True)]
    vecs: list[np.ndarray] = [powers[0].reshape(-1)]
    for k in range(1, n + 1):
        powers.append(powers[-1] @ M)
        v = powers[-1].reshape(-1)
        basis = np.stack(vecs, axis=1)
        # solve basis @ c = v exactly; consistent iff dependent
        aug = np.concatenate([basis, v.reshape(-1, 1)], axis=1)
        R, pivots = rref(aug)
        if k not in pivots:
            coeffs = [Fraction(0)] * k
            for i, p in enumerate(pivots):
                coeffs[p] = R[i, k]
            return [-c for c in coeffs] + [Fraction(1)]
        vecs.append(v)
    raise AssertionError("Cayley-Hamilton violated")  # pragma: no cover


def sturm_count(p: Poly, lo: Fraction | None = None, hi: Fraction | None = None) -> int:
    """Number of distinct real roots of ``p`` in (lo, hi]; None means +/- infinity."""
    p = ptrim(p)
    if pdeg(p) < 1:
        return 0
    seq = [p, pderiv(p)]
    while seq[-1] and pdeg(seq[-1]) > 0:
        r = pmod(seq[-2], seq[-1])
        if not r:
            break
        seq.append(pscale(r, Fraction(-1)))

    def changes(x) -> int:
        if x is None:
            return 0
        vals = [_peval(q, x) for q in seq]
        return _sign_changes(vals)

    def changes_inf(sign: int) -> int:
        vals = [q[-1] * (sign ** pdeg(q)) for q in seq if q]
        return _sign_changes(vals)

    left = changes_inf(-1) if lo is None else changes(lo)
    right = changes_inf(1) if hi is None else changes(hi)
    return left - right


def _peval(p: Poly, x):
    out = Fraction(0)
    for a in reversed(p):
        out = out * x + a
    return out


def _sign_changes(vals) -> int:
    signs = [v > 0 for v in vals if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def nilpotent_exp(M, t: Fraction) -> np.ndarray | None:
    """Exact e^{tM} for nilpotent M (finite series), or None if M is not nilpotent."""
    n = M.shape[0]
    out = matpow(M, 0)
    power = out
    fact = Fraction(1)
    for k in range(1, n + 2):
        power = power @ M
        if all(v == 0 for v in power.flat):
            return out
        fact *= k
        out = out + power * (t ** k / fact)
    return None


def expm_batch(M, times) -> np.ndarray:
    """e^{tM} for an array of times, shape (len(times), n, n).

    Uses one eigendecomposition when M is diagonalisable with a
    well-conditioned eigenbasis; falls back to scipy's expm otherwise.
    """
    from scipy.linalg import expm

    M = to_float(M)
    times = np.asarray(times, dtype=float)
    w, V = np.linalg.eig(M)
    if np.linalg.cond(V) < 1e6:
        Vi = np.linalg.inv(V)
        out = np.einsum("ij,tj,jk->tik", V, np.exp(np.multiply.outer(times, w)), Vi)
        return out.real if np.isrealobj(M) else out
    return expm(times[:, None, None] * M[None])
