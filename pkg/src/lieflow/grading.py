"""Eigenspace gradings of hyperbolic parts, recurrent subspaces and probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .algebra import LieAlgebra, bracket
from .jordan import (
    ClusterAmbiguityError,
    JordanError,
    JordanTriple,
    _exact_classification,
    _float_classification,
    cluster_eigenvalues,
    jordan_decompose,
)
from .linalg import (
    RANK_TOL,
    Subspace,
    check_square,
    expm_batch,
    eye,
    is_exact,
    minimal_polynomial,
    norm,
    nullspace,
    pderiv,
    pgcd,
    stack_kernel,
    sturm_count,
    pdeg,
    to_float,
    _peval,
)
from .report import Report


class NotHyperbolicError(JordanError):
    pass


class NotEllipticError(JordanError):
    pass


@dataclass
class Grading:
    """Eigenspaces of a hyperbolic map and the induced splitting V+ + V0 + V-."""

    eigenvalues: list
    spaces: dict
    plus: Subspace
    zero: Subspace
    minus: Subspace

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.spaces.values())

    @property
    def ambient_dim(self) -> int:
        return self.plus.ambient_dim

    def dims(self) -> tuple[int, int, int]:
        return self.plus.dim, self.zero.dim, self.minus.dim

    def find(self, value, tol: float = 1e-9):
        """The stored eigenvalue equal to ``value`` (within tol in float mode), or None."""
        for lam in self.eigenvalues:
            if isinstance(lam, Fraction) and isinstance(value, Fraction):
                if lam == value:
                    return lam
            elif abs(float(lam) - float(value)) <= tol * max(1.0, abs(float(value))):
                return lam
        return None


def _concat(spaces: list[Subspace], n: int, exact: bool) -> Subspace:
    if not spaces:
        return Subspace.zero(n, exact)
    return Subspace(np.concatenate([s.basis for s in spaces], axis=1))


def _rational_roots(mu) -> list[Fraction] | None:
    """All roots of a real-rooted squarefree rational polynomial if they are rational."""
    coeffs = np.array([float(c) for c in reversed(mu)])
    roots = []
    for r in np.roots(coeffs) if len(coeffs) > 1 else []:
        cand = Fraction(float(r.real)).limit_denominator(10 ** 6)
        if _peval(mu, cand) != 0:
            return None
        roots.append(cand)
    if len(set(roots)) != pdeg(mu):
        return None
    return sorted(set(roots))


def _build(eigs, spaces, n, exact) -> Grading:
    total = sum(s.dim for s in spaces.values())
    if total != n:
        raise NotHyperbolicError(f"eigenspace dimensions sum to {total}, expected {n}")
    plus = _concat([spaces[l] for l in eigs if l > 0], n, exact)
    minus = _concat([spaces[l] for l in eigs if l < 0], n, exact)
    zero = next((spaces[l] for l in eigs if l == 0), Subspace.zero(n, exact))
    return Grading(list(eigs), spaces, plus, zero, minus)


def hyperbolic_grading(H, tol: float = 1e-10) -> Grading:
    """Eigenvalues and eigenspaces of a hyperbolic (real semisimple) map."""
    n = check_square(H)
    if is_exact(H):
        mu = minimal_polynomial(H)
        if pgcd(mu, pderiv(mu)) != [Fraction(1)] or sturm_count(mu) != pdeg(mu):
            raise NotHyperbolicError("map is not real semisimple")
        roots = _rational_roots(mu)
        if roots is not None:
            spaces = {lam: Subspace(nullspace(H - eye(n, True) * lam)) for lam in roots}
            return _build(roots, spaces, n, True)
        H = to_float(H)
    H = np.asarray(H, dtype=float)
    scale = max(1.0, float(np.linalg.norm(H)))
    if _float_classification(H, "hyperbolic", scale) > max(tol, 1e-8):
        raise NotHyperbolicError("map is not real semisimple")
    clusters = cluster_eigenvalues(np.linalg.eigvals(H))
    eigs = sorted(c.real for c, _ in clusters)
    eigs = [0.0 if abs(l) <= tol * scale else l for l in eigs]
    spaces = {}
    for lam, (c, m) in zip(eigs, sorted(clusters, key=lambda cm: cm[0].real)):
        K = nullspace(H - lam * np.eye(n), 1e-8)
        if K.shape[1] != m:
            raise NotHyperbolicError(f"eigenspace of {lam} has dim {K.shape[1]}, multiplicity {m}")
        spaces[lam] = Subspace(K)
    return _build(eigs, spaces, n, False)


def grading_of(A, tol: float = 1e-10) -> tuple[JordanTriple, Grading]:
    t = jordan_decompose(A, tol)
    return t, hyperbolic_grading(t.H, tol)


def check_bracket_grading(alg: LieAlgebra, g: Grading, tol: float = 1e-10) -> Report:
    """[g_l, g_m] lies in g_{l+m}, or vanishes when l+m is not an eigenvalue."""
    rep = Report("bracket_grading")
    exact = alg.exact and g.exact
    if not exact:
        alg = alg.to_float()
    worst = 0.0
    for lam in g.eigenvalues:
        for mu in g.eigenvalues:
            target = g.find(lam + mu)
            Bl, Bm = g.spaces[lam].basis, g.spaces[mu].basis
            for i in range(Bl.shape[1]):
                for j in range(Bm.shape[1]):
                    u, w = Bl[:, i], Bm[:, j]
                    if not exact:
                        u, w = to_float(u), to_float(w)
                    z = bracket(alg, u, w)
                    r = g.spaces[target].distance(z) if target is not None else norm(z)
                    worst = max(worst, r)
    rep.add("bracket_grading", worst, tol)
    return rep


def _lower_central_series(alg: LieAlgebra, S: Subspace, tol: float) -> tuple[float, list[int]]:
    """Closure residual of S and the dimensions of its lower central series."""
    basis = [S.basis[:, i] for i in range(S.dim)]
    closure = 0.0
    for i, x in enumerate(basis):
        for y in basis[i + 1:]:
            closure = max(closure, S.distance(bracket(alg, x, y)))
    dims = [S.dim]
    current = basis
    for _ in range(alg.dim + 1):
        if not current:
            break
        new = [bracket(alg, x, c) for x in basis for c in current]
        if not new:
            break
        nxt = Subspace.span(np.stack(new, axis=1), alg.dim, tol)
        current = [nxt.basis[:, i] for i in range(nxt.dim)]
        dims.append(nxt.dim)
        if nxt.dim == 0:
            break
    return closure, dims


def check_nilpotent_subalgebras(alg: LieAlgebra, g: Grading, tol: float = 1e-10) -> Report:
    """g+ and g- are subalgebras whose lower central series reaches 0."""
    rep = Report("nilpotent_subalgebras")
    if not (alg.exact and g.exact):
        alg = alg.to_float()
    for name, S in (("plus", g.plus), ("minus", g.minus)):
        if not (alg.exact and S.exact):
            S = Subspace(to_float(S.basis))
        closure, dims = _lower_central_series(alg, S, tol)
        rep.add(f"{name}_closed", closure, tol)
        rep.add(f"{name}_nilpotent", 0.0 if dims[-1] == 0 else 1.0, tol,
                note="lower central series dims " + ",".join(map(str, dims)))
        rep.data[f"{name}_series"] = dims
    return rep


def recurrent_subspace(A, tol: float = RANK_TOL) -> Subspace:
    """ker H intersected with ker N for the Jordan parts of A."""
    n = check_square(A)
    t = jordan_decompose(A)
    if t.exact:
        return stack_kernel([t.H, t.N], n)
    return stack_kernel([to_float(t.H), to_float(t.N)], n, tol)


# --------------------------------------------------------------------------
# norms and probes
# --------------------------------------------------------------------------

def elliptic_invariant_inner_product(E, tol: float = 1e-8) -> np.ndarray:
    """SPD Gram matrix G with E^T G + G E = 0, so e^{tE} is G-orthogonal."""
    n = check_square(E)
    if is_exact(E):
        if _exact_classification(E, "elliptic") != 0.0:
            raise NotEllipticError("map is not elliptic")
    elif _float_classification(E, "elliptic", max(1.0, norm(E))) > tol:
        raise NotEllipticError("map is not elliptic")
    Ef = to_float(E)
    if not np.any(Ef):
        return np.eye(n)
    _, V = np.linalg.eig(Ef)
    W = np.linalg.inv(V)
    G = (W.conj().T @ W).real
    G = (G + G.T) / 2
    # normalise so that an orthogonal E gives the identity
    return G / np.exp(np.mean(np.log(np.linalg.eigvalsh(G))))


def g_norm(G, v) -> np.ndarray:
    """G-norm of a vector or of the rows of a 2-d array."""
    v = np.asarray(v, dtype=float)
    return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", v, G, v), 0.0))


def elliptic_frequencies(E) -> list[float]:
    w = np.linalg.eigvals(to_float(E))
    pos = sorted(x for x in np.abs(w.imag) if x > 1e-9)
    out: list[float] = []
    for x in pos:
        if not out or abs(x - out[-1]) > 1e-9 * x:
            out.append(x)
    return out


def return_times(freqs: list[float], t_min: float, t_max: float) -> np.ndarray:
    """Multiples of every elliptic period, plus common periods of commensurate frequencies."""
    times = []
    for w in freqs:
        period = 2 * math.pi / w
        k0 = max(1, math.ceil(t_min / period))
        times.extend(period * k for k in range(k0, int(t_max / period) + 1))
    if len(freqs) > 1:
        base = freqs[0]
        denoms = []
        for w in freqs[1:]:
            r = Fraction(w / base).limit_denominator(64)
            if abs(float(r) - w / base) > 1e-10 * (w / base):
                denoms = None
                break
            denoms.append(r.denominator)
        if denoms is not None:
            common = 2 * math.pi * math.lcm(*denoms) / base
            k0 = max(1, math.ceil(t_min / common))
            times.extend(common * k for k in range(k0, int(t_max / common) + 1))
    return np.array(sorted(times))


@dataclass
class ProbeResult:
    verdict: str  # "Recurrent" | "Escaping" | "Inconclusive"
    min_distance: float
    t_best: float
    max_norm: float
    details: dict = field(default_factory=dict)

    @property
    def recurrent(self) -> bool:
        return self.verdict == "Recurrent"


def probe_orbit(evaluate, distance, size, x, eps, t_min, t_max, freqs,
                escape_factor=1e6, samples=2000) -> ProbeResult:
    """Generic forward-recurrence probe.

    ``evaluate(times)`` returns the orbit points at an array of times,
    ``distance(points)`` their distances to the start point and ``size``
    their magnitudes (for the escape test).
    """
    grid = np.linspace(t_min, t_max, samples)
    special = return_times(freqs, t_min, t_max)
    times = np.unique(np.concatenate([grid, special]))
    pts = evaluate(times)
    dist = distance(pts)
    sizes = size(pts)
    x_size = float(size(np.asarray(x)[None])[0])
    i = int(np.argmin(dist))
    best_t, best_d = float(times[i]), float(dist[i])
    if best_d >= eps:
        # local refinement around the best few candidates
        h = (t_max - t_min) / (samples - 1)
        # a sub-grid dip below eps needs the distance to vary that much nearby
        slope = np.abs(np.diff(dist, prepend=dist[0], append=dist[-1]))
        reach = 4 * np.maximum(slope[:-1], slope[1:])
        for j in np.argsort(dist)[:5]:
            if dist[j] - reach[j] > eps:
                continue
            lo, hi = max(t_min, times[j] - h), min(t_max, times[j] + h)
            if hi <= lo:
                continue
            res = minimize_scalar(lambda s: float(distance(evaluate(np.array([s])))[0]),
                                  bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
            if res.fun < best_d:
                best_t, best_d = float(res.x), float(res.fun)
    max_norm = float(np.max(sizes))
    bound = escape_factor * max(x_size, 1e-12)
    if best_d < eps:
        verdict = "Recurrent"
    elif max_norm > bound:
        verdict = "Escaping"
    else:
        verdict = "Inconclusive"
    return ProbeResult(verdict, best_d, best_t, max_norm,
                       {"escape_bound": bound, "samples": int(times.size)})


def recurrence_probe_linear(A, x, eps: float = 1e-6, t_max: float = 100.0,
                            t_min_return: float = 1.0, escape_factor: float = 1e6,
                            samples: int = 2000) -> ProbeResult:
    """Search for near-returns of e^{tA}x to x on t in [t_min_return, t_max].

    Distances use the elliptic-invariant norm.  Only a return within eps is
    evidence; failure to find one is Escaping or Inconclusive, never a proof.
    """
    if not (eps > 0 and t_max > t_min_return > 0):
        raise ValueError("need eps > 0 and t_max > t_min_return > 0")
    Af = to_float(A)
    x = np.asarray(to_float(x), dtype=float)
    t = jordan_decompose(Af)
    G = elliptic_invariant_inner_product(t.E)

    def evaluate(times):
        return expm_batch(Af, times) @ x

    return probe_orbit(evaluate, lambda p: g_norm(G, p - x), lambda p: g_norm(G, p),
                       x, eps, t_min_return, t_max, elliptic_frequencies(t.E),
                       escape_factor, samples)


def check_growth_bounds(A, g: Grading, t0: float, samples, tol: float = 0.0) -> Report:
    """Uniform expansion on V+ and contraction on V- at rate half the smallest |eigenvalue|."""
    rep = Report("growth_bounds")
    Af = to_float(A)
    nonzero = [abs(float(l)) for l in g.eigenvalues if l != 0]
    rate = 0.5 * min(nonzero) if nonzero else 0.0
    rep.data["rate"] = rate
    rep.data["t0"] = t0
    # restrict to the invariant subspaces first: e^{sA} Q would amplify rounding
    # error in Q along V+ by e^{s lambda_max}
    Qp, Qm = to_float(g.plus.orthonormal()), to_float(g.minus.orthonormal())
    Rp, Rm = Qp.T @ Af @ Qp, Qm.T @ Af @ Qm
    worst_p = worst_m = 0.0
    for s in samples:
        if s < t0:
            continue
        if Qp.shape[1]:
            smin = np.linalg.svd(expm(s * Rp), compute_uv=False).min()
            worst_p = max(worst_p, (math.exp(s * rate) - smin) / math.exp(s * rate))
        if Qm.shape[1]:
            smax = np.linalg.svd(expm(s * Rm), compute_uv=False).max()
            worst_m = max(worst_m, (smax - math.exp(-s * rate)) / math.exp(-s * rate))
    rep.add("expanding_plus", max(worst_p, 0.0), tol, note=f"rate={rate:.6g}")
    rep.add("contracting_minus", max(worst_m, 0.0), tol, note=f"rate={rate:.6g}")
    return rep


def orbit_boundedness_equivalence(A, x, t_max: float = 100.0, bound: float = 1e6,
                                  samples: int = 2000) -> Report:
    """Bounded orbit of e^{tA} iff bounded orbit of e^{t(H+N)}, both in the G-norm."""
    Af = to_float(A)
    x = np.asarray(to_float(x), dtype=float)
    t = jordan_decompose(Af)
    E, H, N = t.as_float()
    G = elliptic_invariant_inner_product(E)
    times = np.linspace(0.0, t_max, samples)[:, None, None]
    full = g_norm(G, expm(times * Af[None]) @ x)
    reduced = g_norm(G, expm(times * (H + N)[None]) @ x)
    sup_full, sup_red = float(full.max()), float(reduced.max())
    rep = Report("orbit_boundedness")
    agree = (sup_full <= bound) == (sup_red <= bound)
    rep.add("agree", 0.0 if agree else 1.0, 0.0)
    rep.data.update({"sup_full": sup_full, "sup_hn": sup_red,
                     "bounded_full": sup_full <= bound, "bounded_hn": sup_red <= bound})
    return rep
