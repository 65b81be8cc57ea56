"""Additive Jordan decomposition A = E + H + N.

E is elliptic (semisimple, imaginary spectrum), H hyperbolic (semisimple,
real spectrum), N nilpotent, and the three commute.  Two routes:

* exact (``dtype=object`` Fraction matrices): the semisimple part is a
  polynomial in A obtained by Newton lifting of ``x`` against the
  squarefree part of the minimal polynomial, so S + N = A holds exactly.
  The E/H split stays exact whenever every irreducible factor of the
  minimal polynomial is real-rooted, imaginary-rooted or quadratic;
  otherwise the real-part interpolant is built from roots at 32
  significant digits and rounded to binary64.
* float: eigenvalues are clustered and S, H are assembled from spectral
  projectors (reordered Schur form plus a Sylvester solve per cluster).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import sympy
from scipy.linalg import schur, solve_sylvester

from .algebra import LieAlgebra, ad_of_map, derivation_residual
from .linalg import (
    check_square,
    eye,
    is_exact,
    matpow,
    minimal_polynomial,
    norm,
    pcompose_mod,
    padd,
    pderiv,
    pdivmod,
    pdeg,
    pgcd,
    pinvert,
    pmod,
    psub,
    pmul,
    peval_matrix,
    squarefree_part,
    sturm_count,
    to_float,
    zeros,
)
from .report import Report

EPS = np.finfo(float).eps
CLUSTER_FLOOR = 1e-8     # always merge eigenvalues closer than this (relative)
CLUSTER_NOISE = 5e-2     # never merge across a gap wider than this (relative)
CLUSTER_MIN_RATIO = 10.0  # required separation between merged and unmerged gaps
MP_DIGITS = 32


class JordanError(ValueError):
    """Decomposition could not be carried out."""


class ClusterAmbiguityError(JordanError):
    """Eigenvalue clusters cannot be separated reliably in floating point."""


class NotSemisimpleError(JordanError):
    pass


class NotDerivationError(JordanError):
    pass


@dataclass
class JordanTriple:
    E: np.ndarray
    H: np.ndarray
    N: np.ndarray
    method: str = "float"
    certificates: Report | None = None
    notes: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return all(is_exact(m) for m in (self.E, self.H, self.N))

    @property
    def semisimple(self) -> np.ndarray:
        return self.E + self.H

    def as_float(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return to_float(self.E), to_float(self.H), to_float(self.N)


# --------------------------------------------------------------------------
# eigenvalue clustering (float path)
# --------------------------------------------------------------------------

def cluster_eigenvalues(w: np.ndarray) -> list[tuple[complex, int]]:
    """Group numerically split eigenvalues into (center, multiplicity) pairs.

    Single-linkage clustering where the cut height is chosen at the widest
    relative gap between merged and unmerged distances.  A defective
    eigenvalue of multiplicity m scatters by roughly eps**(1/m), so a
    fixed absolute radius cannot work for both simple and defective
    spectra.  Distances are relative to the spectral radius (at least 1).
    Raises ClusterAmbiguityError when no cut separates the two populations
    by at least CLUSTER_MIN_RATIO.
    """
    w = np.asarray(w, dtype=complex)
    n = w.size
    if n == 0:
        return []
    scale = max(1.0, float(np.abs(w).max()))
    floor = CLUSTER_FLOOR * scale
    # Kruskal MST on the complete graph of eigenvalues
    edges = sorted((abs(w[i] - w[j]), i, j) for i in range(n) for j in range(i + 1, n))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    mst: list[tuple[float, int, int]] = []
    for d, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            mst.append((d, i, j))
    heights = [d for d, _, _ in mst]

    # always merge below the floor
    k_min = sum(1 for h in heights if h <= floor)
    best_k, best_ratio = None, 0.0
    for k in range(k_min, len(heights) + 1):
        lower = heights[k - 1] if k > 0 else 0.0
        if lower > CLUSTER_NOISE * scale:
            break
        lower = max(lower, floor)
        upper = heights[k] if k < len(heights) else np.inf
        ratio = upper / lower
        if ratio > best_ratio:
            best_k, best_ratio = k, ratio
    if best_k is None or best_ratio < CLUSTER_MIN_RATIO:
        raise ClusterAmbiguityError(
            f"eigenvalue clusters ambiguous: merge heights {heights}, best separation ratio {best_ratio:.3g}")

    parent = list(range(n))
    for d, i, j in mst[:best_k]:
        parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        c = complex(np.mean(w[members]))
        out.append((c, len(members)))
    return _symmetrize(out, floor)


def _symmetrize(clusters, floor):
    """Snap near-real centers to the real axis and pair conjugates exactly."""
    out = []
    for c, m in clusters:
        if abs(c.imag) <= floor:
            c = complex(c.real, 0.0)
        out.append((c, m))
    fixed = []
    used = set()
    for idx, (c, m) in enumerate(out):
        if idx in used:
            continue
        if c.imag == 0:
            fixed.append((c, m))
            continue
        partner = min(
            (j for j in range(len(out)) if j != idx and j not in used),
            key=lambda j: abs(out[j][0] - c.conjugate()), default=None)
        if partner is None or out[partner][1] != m:
            raise ClusterAmbiguityError("conjugate eigenvalue clusters do not pair up")
        mid = (c + out[partner][0].conjugate()) / 2
        used.update({idx, partner})
        fixed.extend([(mid, m), (mid.conjugate(), m)])
    return sorted(fixed, key=lambda cm: (cm[0].real, cm[0].imag))


def _real_poly(centers) -> np.ndarray:
    """Monic real polynomial with the given (conjugate-closed) roots, lowest degree first."""
    coeffs = np.poly(np.array(centers, dtype=complex))[::-1]
    return coeffs.real.copy()


def _float_peval(coeffs, M) -> np.ndarray:
    n = M.shape[0]
    out = np.zeros((n, n))
    for a in coeffs[::-1]:
        out = out @ M + a * np.eye(n)
    return out


def _scale(A) -> float:
    return max(1.0, norm(A))


# --------------------------------------------------------------------------
# semisimple + nilpotent
# --------------------------------------------------------------------------

def _exact_split(A):
    mu = minimal_polynomial(A)
    q = squarefree_part(mu)
    dq = pderiv(q)
    s = [Fraction(0), Fraction(1)]
    for _ in range(64):
        num = pcompose_mod(q, s, mu)
        if not num:
            break
        den = pcompose_mod(dq, s, mu)
        s = pmod(psub(s, pmul(num, pinvert(den, mu))), mu)
    else:  # pragma: no cover - Newton lifting terminates after log2(n) steps
        raise JordanError("Newton lifting did not terminate")
    S = peval_matrix(s, A)
    return S, A - S


def _spectral_projectors(A, clusters) -> list[np.ndarray]:
    """Complex spectral projectors onto each cluster's generalized eigenspace.

    Each cluster is moved to the top of a reordered complex Schur form and
    decoupled from the rest by a Sylvester solve, which stays accurate for
    defective and badly scaled spectra where polynomials in A do not.
    """
    n = A.shape[0]
    centers = np.array([c for c, _ in clusters])
    Ac = A.astype(complex)
    out = []
    for i, (c, m) in enumerate(clusters):
        if len(clusters) == 1:
            out.append(np.eye(n, dtype=complex))
            break
        T, Z, k = schur(Ac, output="complex",
                        sort=lambda x, i=i: int(np.argmin(np.abs(centers - x))) == i)
        if k != m:
            raise ClusterAmbiguityError(f"cluster at {c:.6g} has {k} Schur eigenvalues, expected {m}")
        Y = solve_sylvester(T[:k, :k], -T[k:, k:], -T[:k, k:])
        P = np.zeros((n, n), dtype=complex)
        P[:k, :k] = np.eye(k)
        P[:k, k:] = -Y
        out.append(Z @ P @ Z.conj().T)
    return out


def _float_parts(A, clusters):
    """(S, H) from spectral projectors; eigenvalues are cluster means of tr(A P)."""
    S = np.zeros(A.shape, dtype=complex)
    H = np.zeros(A.shape, dtype=complex)
    for (c, m), P in zip(clusters, _spectral_projectors(A, clusters)):
        lam = np.trace(A @ P) / m
        if c.imag == 0:
            lam = lam.real
        S += lam * P
        H += lam.real * P
    return S.real, H.real


def _float_split(A):
    n = A.shape[0]
    scale = _scale(A)
    clusters = cluster_eigenvalues(np.linalg.eigvals(A))
    # distinct eigenvalues: A is already semisimple
    S = A.copy() if all(m == 1 for _, m in clusters) else _float_parts(A, clusters)[0]
    N = A - S
    nil = np.linalg.norm(np.linalg.matrix_power(N, n)) / scale ** n
    if nil > 1e3 * np.sqrt(EPS):
        raise ClusterAmbiguityError(f"nilpotent part not nilpotent (residual {nil:.3g}); clusters {clusters}")
    return S, N, clusters


def semisimple_nilpotent_split(A):
    """Return (S, N) with S semisimple, N nilpotent, SN = NS and S + N = A."""
    check_square(A)
    if is_exact(A):
        return _exact_split(A)
    S, N, _ = _float_split(np.asarray(A, dtype=float))
    return S, N


# --------------------------------------------------------------------------
# elliptic + hyperbolic
# --------------------------------------------------------------------------

def _is_purely_imaginary_rooted(q) -> bool:
    """All roots of squarefree rational ``q`` lie on the imaginary axis."""
    e = 0
    if q[0] == 0:
        e = 1
        q = q[1:]
    if any(q[i] != 0 for i in range(1, len(q), 2)):
        return False
    g = q[0::2]  # q(x) = g(x^2)
    if pdeg(g) < 1:
        return True
    return sturm_count(g, None, Fraction(0)) == pdeg(g) and g[0] != 0 and e in (0, 1)


def _mp_real_part_interpolant(q, digits: int):
    """Coefficients c_k (float, via mp) of h with h(r) = Re r on the roots of q."""
    with mpmath.workdps(digits):
        coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(q)]
        roots = mpmath.polyroots(coeffs, maxsteps=500, extraprec=4 * digits)
        k = len(roots)
        V = mpmath.matrix(k, k)
        rhs = mpmath.matrix(k, 1)
        for i, r in enumerate(roots):
            for j in range(k):
                V[i, j] = r ** j
            rhs[i] = mpmath.re(r)
        c = mpmath.lu_solve(V, rhs)
        return [mpmath.re(c[j]) for j in range(k)], [complex(r) for r in roots]


def _rational_factors(q) -> list[list[Fraction]]:
    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(q)], x, domain="QQ")
    return [[Fraction(int(c.p), int(c.q)) for c in reversed(f.all_coeffs())]
            for f, _ in poly.factor_list()[1]]


def _factor_real_part(f):
    """Polynomial h with h(r) = Re r on the roots of irreducible f, if rational; else None."""
    if sturm_count(f) == pdeg(f):
        return [Fraction(0), Fraction(1)]
    if _is_purely_imaginary_rooted(f):
        return []
    if pdeg(f) == 2:
        return [-f[1] / (2 * f[2])]
    return None


def _exact_real_part_poly(mu):
    """h with h(S) = H via CRT over the rational factors of squarefree mu, or None."""
    h: list = []
    for f in _rational_factors(mu):
        hf = _factor_real_part(f)
        if hf is None:
            return None
        rest, rem = pdivmod(mu, f)
        assert not rem
        idem = pmod(pmul(rest, pinvert(pmod(rest, f), f)), mu)
        h = padd(h, pmod(pmul(hf, idem), mu))
    return h


def _exact_eh_split(S):
    n = S.shape[0]
    mu = minimal_polynomial(S)
    if pgcd(mu, pderiv(mu)) != [Fraction(1)]:
        raise NotSemisimpleError("minimal polynomial is not squarefree")
    if sturm_count(mu) == pdeg(mu):
        return zeros((n, n), True), S.copy(), "exact", {}
    if _is_purely_imaginary_rooted(mu):
        return S.copy(), zeros((n, n), True), "exact", {}
    h = _exact_real_part_poly(mu)
    if h is not None:
        H = peval_matrix(h, S) if h else zeros((n, n), True)
        return S - H, H, "exact", {"factored": True}
    coeffs, roots = _mp_real_part_interpolant(mu, MP_DIGITS)
    coeffs_hi, roots_hi = _mp_real_part_interpolant(mu, 2 * MP_DIGITS)
    err = max(min(abs(r - s) for s in roots_hi) for r in roots) if roots else 0.0
    with mpmath.workdps(MP_DIGITS):
        Smp = mpmath.matrix([[mpmath.mpf(v.numerator) / v.denominator for v in row] for row in S])
        Hmp = mpmath.zeros(n, n)
        for c in reversed(coeffs):
            Hmp = Hmp * Smp + c * mpmath.eye(n)
        H = np.array([[float(Hmp[i, j]) for j in range(n)] for i in range(n)])
    E = to_float(S) - H
    margin = min((abs(r.real) for r in roots_hi if abs(r.real) > 10 * max(err, 1e-30)), default=np.inf)
    notes = {"roots": roots_hi, "root_error_bound": err, "re_sign_margin": margin,
             "re_sign_certified": all(abs(r.real) > 10 * err or abs(r.real) < 1e-25 for r in roots_hi)}
    return E, H, "exact+mp", notes


def _float_eh_split(S, clusters=None):
    scale = _scale(S)
    if clusters is None:
        clusters = cluster_eigenvalues(np.linalg.eigvals(S))
    centers = [c for c, _ in clusters]
    semis = np.linalg.norm(_float_peval(_real_poly(centers), S)) / scale ** len(centers)
    if semis > 1e3 * np.sqrt(EPS):
        raise NotSemisimpleError(f"input is not semisimple (residual {semis:.3g})")
    if all(c.imag == 0 for c in centers):
        return np.zeros_like(S), S.copy()
    if all(c.real == 0 for c in centers):
        return S.copy(), np.zeros_like(S)
    _, H = _float_parts(S, clusters)
    return S - H, H


def elliptic_hyperbolic_split(S):
    """Split a semisimple map into commuting elliptic and hyperbolic parts."""
    check_square(S)
    if is_exact(S):
        E, H, _, _ = _exact_eh_split(S)
        return E, H
    return _float_eh_split(np.asarray(S, dtype=float))


# --------------------------------------------------------------------------
# full decomposition and verification
# --------------------------------------------------------------------------

def jordan_decompose(A, tol: float = 1e-10) -> JordanTriple:
    """Additive Jordan decomposition with a populated verification report."""
    check_square(A)
    if is_exact(A):
        S, N = _exact_split(A)
        E, H, method, notes = _exact_eh_split(S)
        if method != "exact":
            N = to_float(N)
    else:
        A = np.asarray(A, dtype=float)
        S, N, clusters = _float_split(A)
        E, H = _float_eh_split(S, clusters)
        method, notes = "float", {"clusters": clusters}
    triple = JordanTriple(E, H, N, method=method, notes=notes)
    triple.certificates = verify_jordan(A, triple, tol)
    return triple


def _exact_classification(X, kind: str) -> float:
    if all(v == 0 for v in X.flat):
        return 0.0
    mu = minimal_polynomial(X)
    if pgcd(mu, pderiv(mu)) != [Fraction(1)]:
        return 1.0
    if kind == "hyperbolic":
        return 0.0 if sturm_count(mu) == pdeg(mu) else 1.0
    return 0.0 if _is_purely_imaginary_rooted(mu) else 1.0


def _float_classification(X, kind: str, scale: float) -> float:
    X = to_float(X)
    if not np.any(X):
        return 0.0
    w = np.linalg.eigvals(X)
    try:
        clusters = cluster_eigenvalues(w)
    except ClusterAmbiguityError:
        return np.inf
    centers = [c for c, _ in clusters]
    semis = np.linalg.norm(_float_peval(_real_poly(centers), X)) / scale ** len(centers)
    part = np.abs(w.imag) if kind == "hyperbolic" else np.abs(w.real)
    return max(semis, float(part.max()) / scale)


def verify_jordan(A, t: JordanTriple, tol: float = 1e-10) -> Report:
    """Six residuals: sum, three commutators, nilpotency, spectral classes of E and H.

    Residuals are relative to ``max(1, |A|)`` raised to the degree of the
    expression.  Exact triples of exact inputs are checked exactly.
    """
    n = check_square(A)
    rep = Report("verify_jordan")
    exact = is_exact(A) and t.exact
    if exact:
        A_, E, H, N = A, t.E, t.H, t.N
    else:
        A_, E, H, N = (to_float(m) for m in (A, t.E, t.H, t.N))
    s = _scale(A_)
    rep.add("sum", norm(E + H + N - A_) / s, tol)
    rep.add("commute_EH", norm(E @ H - H @ E) / s ** 2, tol)
    rep.add("commute_EN", norm(E @ N - N @ E) / s ** 2, tol)
    rep.add("commute_HN", norm(H @ N - N @ H) / s ** 2, tol)
    rep.add("nilpotent_N", norm(matpow(N, n)) / s ** n, tol)
    if exact:
        rep.add("elliptic_E", _exact_classification(E, "elliptic"), tol)
        rep.add("hyperbolic_H", _exact_classification(H, "hyperbolic"), tol)
    else:
        rep.add("elliptic_E", _float_classification(E, "elliptic", s), tol)
        rep.add("hyperbolic_H", _float_classification(H, "hyperbolic", s), tol)
    return rep


def derivation_parts(alg: LieAlgebra, D, tol: float = 1e-10) -> JordanTriple:
    """Jordan parts of a derivation, each certified to be a derivation again."""
    r = derivation_residual(alg, D)
    if r > tol:
        raise NotDerivationError(f"input is not a derivation (residual {r:.3g})")
    t = jordan_decompose(D, tol)
    for name, part in (("E", t.E), ("H", t.H), ("N", t.N)):
        t.certificates.add(f"derivation_{name}", derivation_residual(alg, part), tol)
    return t


def ad_jordan_consistency(A, tol: float = 1e-10) -> Report:
    """jordan(ad A) must equal (ad E, ad H, ad N) for the parts of A."""
    n = check_square(A)
    t = jordan_decompose(A, tol)
    big = jordan_decompose(ad_of_map(A), tol)
    rep = Report("ad_jordan_consistency")
    s = _scale(A)
    for name, part, ad_part in (("E", t.E, big.E), ("H", t.H, big.H), ("N", t.N, big.N)):
        expected = ad_of_map(part)
        if is_exact(expected) and is_exact(ad_part):
            diff = norm(expected - ad_part)
        else:
            diff = norm(to_float(expected) - to_float(ad_part))
        rep.add(f"ad_{name}", diff / s, tol)
    rep.data["dim"] = n
    return rep


def exp_factorization_residual(A, t: JordanTriple) -> float:
    """|e^A - e^E e^H e^N| / |e^A|, a consequence of the parts commuting."""
    from scipy.linalg import expm

    A = to_float(A)
    E, H, N = t.as_float()
    lhs = expm(A)
    return float(np.linalg.norm(lhs - expm(E) @ expm(H) @ expm(N)) / max(1.0, np.linalg.norm(lhs)))
