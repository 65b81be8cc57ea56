"""Lie groups with global charts and the flows of their linear vector fields.

Models: Euclidean space, the Heisenberg group in exponential coordinates,
the semidirect product R x_rho R^2 with rho_t = e^{tJ}, and the 2-torus
with an integer automorphism (discrete time only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

from .algebra import (
    LieAlgebra,
    abelian,
    ad_operator,
    bracket,
    derivation_residual,
    heisenberg,
    semidirect_algebra,
)
from .grading import elliptic_invariant_inner_product, elliptic_frequencies, g_norm, probe_orbit
from .jordan import JordanTriple, NotDerivationError, derivation_parts, jordan_decompose
from .linalg import (
    DimensionError,
    Subspace,
    check_square,
    expm_batch,
    is_exact,
    nilpotent_exp,
    nullspace,
    parse_scalar,
    to_exact,
    to_float,
    zeros,
)
from .report import Report

J = np.array([[0.0, -1.0], [1.0, 0.0]])
J_INV = -J


class ModelError(ValueError):
    """Operation not supported by the model, or elements from different models."""


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupModel:
    """Base class; subclasses fix the chart and the multiplication law."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def algebra(self) -> LieAlgebra:
        raise NotImplementedError

    def identity(self, exact: bool = False) -> np.ndarray:
        return zeros(self.dim, exact)

    def element(self, coords) -> "GroupElement":
        return GroupElement(self, self._coords(coords))

    def _coords(self, coords) -> np.ndarray:
        arr = np.asarray(coords)
        if arr.dtype != object:
            arr = arr.astype(float)
        if arr.shape != (self.dim,):
            raise DimensionError(f"{self.name} elements have {self.dim} coordinates")
        return arr

    @property
    def name(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class EuclideanAbelian(GroupModel):
    n: int = 2

    @property
    def dim(self) -> int:
        return self.n

    @property
    def algebra(self) -> LieAlgebra:
        return abelian(self.n)

    def multiply(self, g, h):
        return g + h

    def inverse(self, g):
        return -g

    def log_quotient(self, g, h):
        """Chart coordinates of log(g^-1 h); works row-wise on arrays."""
        return h - g

    def adjoint(self, g) -> np.ndarray:
        return np.eye(self.n)


@dataclass(frozen=True)
class HeisenbergExp(GroupModel):
    """Exponential coordinates: x * y = x + y + [x, y] / 2."""

    @property
    def dim(self) -> int:
        return 3

    @property
    def algebra(self) -> LieAlgebra:
        return heisenberg()

    def multiply(self, g, h):
        out = g + h
        out[2] = out[2] + (g[0] * h[1] - g[1] * h[0]) / 2
        return out

    def inverse(self, g):
        return -g

    def log_quotient(self, g, h):
        d = h - g
        d[..., 2] = d[..., 2] - (g[..., 0] * h[..., 1] - g[..., 1] * h[..., 0]) / 2
        return d

    def adjoint(self, g) -> np.ndarray:
        """Ad(exp x) = I + ad x for a 2-step nilpotent algebra."""
        return np.eye(3) + to_float(ad_operator(self.algebra, g))


@dataclass(frozen=True)
class SemidirectRxR2(GroupModel):
    """R x_rho R^2: (t1, v1)(t2, v2) = (t1 + t2, v1 + rho_{t1} v2).

    The linear vector field has derivation D = [[0, 0], [xi, A]] in the
    basis (T, X, Y), with A = [[lambda, -mu], [mu, lambda]].
    """

    lam: object = Fraction(1)
    mu: object = Fraction(1)
    xi: tuple = (Fraction(1), Fraction(0))

    def __post_init__(self):
        object.__setattr__(self, "lam", parse_scalar(self.lam))
        object.__setattr__(self, "mu", parse_scalar(self.mu))
        if len(self.xi) != 2:
            raise DimensionError("xi must have two components")
        object.__setattr__(self, "xi", tuple(parse_scalar(x) for x in self.xi))

    @property
    def dim(self) -> int:
        return 3

    @property
    def algebra(self) -> LieAlgebra:
        return semidirect_algebra()

    @property
    def A(self) -> np.ndarray:
        return np.array([[self.lam, -self.mu], [self.mu, self.lam]], dtype=object)

    @property
    def invertible(self) -> bool:
        return self.lam * self.lam + self.mu * self.mu != 0

    def derivation(self) -> np.ndarray:
        D = zeros((3, 3), True)
        D[1:, 0] = list(self.xi)
        D[1:, 1:] = self.A
        return D

    @classmethod
    def from_derivation(cls, D) -> "SemidirectRxR2":
        """Read (lambda, mu, xi) off a derivation; rejects other shapes."""
        D = to_exact(D) if is_exact(D) else np.asarray(D, dtype=float)
        if check_square(D) != 3:
            raise DimensionError("semidirect derivations are 3x3")
        A = D[1:, 1:]
        ok = (all(v == 0 for v in D[0]) and A[0, 0] == A[1, 1] and A[0, 1] == -A[1, 0])
        if not ok:
            raise NotDerivationError("not a derivation of the semidirect algebra")
        return cls(A[0, 0], A[1, 0], (D[1, 0], D[2, 0]))

    def multiply(self, g, h):
        t1, v1 = float(g[0]), np.asarray(g[1:], dtype=float)
        return np.concatenate([[t1 + float(h[0])], v1 + rho(t1) @ np.asarray(h[1:], dtype=float)])

    def inverse(self, g):
        t = float(g[0])
        return np.concatenate([[-t], -rho(-t) @ np.asarray(g[1:], dtype=float)])

    def log_quotient(self, g, h):
        """(t, w) with g^-1 h = (t, w); not a Lie algebra log, used only for distances."""
        h = np.asarray(h, dtype=float)
        dt = h[..., 0] - float(g[0])
        w = (h[..., 1:] - np.asarray(g[1:], dtype=float)) @ rho(-float(g[0])).T
        return np.concatenate([dt[..., None], w], axis=-1)

    def adjoint(self, g) -> np.ndarray:
        t, v = float(g[0]), np.asarray(g[1:], dtype=float)
        Ad = np.zeros((3, 3))
        Ad[0, 0] = 1.0
        Ad[1:, 0] = -J @ v
        Ad[1:, 1:] = rho(t)
        return Ad


@dataclass(frozen=True)
class Torus2(GroupModel):
    M: tuple = ((1, 1), (1, 2))

    def __post_init__(self):
        M = np.array(self.M, dtype=object)
        if M.shape != (2, 2) or any(Fraction(v).denominator != 1 for v in M.flat):
            raise ModelError("Torus2 needs a 2x2 integer matrix")
        M = M.astype(int)
        if abs(round(np.linalg.det(M))) != 1:
            raise ModelError("Torus2 matrix must have determinant +-1")
        object.__setattr__(self, "M", tuple(tuple(int(v) for v in row) for row in M))

    @property
    def dim(self) -> int:
        return 2

    @property
    def algebra(self) -> LieAlgebra:
        return abelian(2)

    def _coords(self, coords) -> np.ndarray:
        arr = super()._coords(coords)
        return mod1(arr)

    def multiply(self, g, h):
        return mod1(g + h)

    def inverse(self, g):
        return mod1(-g)


@dataclass(frozen=True)
class GroupElement:
    model: GroupModel
    coords: np.ndarray = field(compare=False)

    def __eq__(self, other):
        return (isinstance(other, GroupElement) and self.model == other.model
                and np.array_equal(self.coords, other.coords))

    __hash__ = None


def mod1(arr) -> np.ndarray:
    if is_exact(arr):
        return np.array([Fraction(v) - math.floor(Fraction(v)) for v in arr], dtype=object)
    return np.mod(np.asarray(arr, dtype=float), 1.0)


def rho(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def lambda_map(t: float) -> np.ndarray:
    """Lambda_t = (rho_t - I) J^-1."""
    return (rho(t) - np.eye(2)) @ J_INV


# --------------------------------------------------------------------------
# group law and flows
# --------------------------------------------------------------------------

def _same_model(g: GroupElement, h: GroupElement) -> GroupModel:
    if g.model != h.model:
        raise ModelError(f"elements of {g.model} and {h.model} cannot be multiplied")
    return g.model


def group_multiply(m: GroupModel, g: GroupElement, h: GroupElement) -> GroupElement:
    if _same_model(g, h) != m:
        raise ModelError("elements do not belong to this model")
    return GroupElement(m, m.multiply(g.coords, h.coords))


def group_inverse(m: GroupModel, g: GroupElement) -> GroupElement:
    if g.model != m:
        raise ModelError("element does not belong to this model")
    return GroupElement(m, m.inverse(g.coords))


def _require_derivation(m: GroupModel, D, tol: float = 1e-10):
    if derivation_residual(m.algebra, D) > tol * max(1.0, float(np.linalg.norm(to_float(D)))):
        raise NotDerivationError(f"D is not a derivation of the {m.name} algebra")


def _exp_coords_flow(D, t, x) -> np.ndarray:
    if is_exact(D) and is_exact(x) and isinstance(t, (int, Fraction)):
        E = nilpotent_exp(D, Fraction(t))
        if E is not None:
            return E @ x
    if t == 0:
        return x.copy()
    return expm(float(t) * to_float(D)) @ to_float(x)


def linear_flow(m: GroupModel, D, t, g: GroupElement) -> GroupElement:
    """phi_t(exp Y) = exp(e^{tD} Y), i.e. e^{tD} on exponential coordinates."""
    if not isinstance(m, (EuclideanAbelian, HeisenbergExp)):
        raise ModelError(f"linear_flow is defined on exponential charts, not {m.name}")
    if g.model != m:
        raise ModelError("element does not belong to this model")
    _require_derivation(m, D)
    return GroupElement(m, _exp_coords_flow(D, t, g.coords))


def semidirect_vector_field(m: SemidirectRxR2, g) -> np.ndarray:
    """X(t, v) = (0, A v + Lambda_t xi)."""
    g = _raw(g)
    t, v = float(g[0]), np.asarray(g[1:], dtype=float)
    A, xi = to_float(m.A), to_float(np.array(m.xi, dtype=object))
    return np.concatenate([[0.0], A @ v + lambda_map(t) @ xi])


def _raw(g) -> np.ndarray:
    return g.coords if isinstance(g, GroupElement) else np.asarray(g)


def _semidirect_flow_batch(A, xi, times, g) -> np.ndarray:
    """Rows (t, e^{sA} v + int_0^s e^{rA} dr Lambda_t xi) for each s in ``times``.

    Uses the augmented exponential, so A need not be invertible.
    """
    t, v = float(g[0]), np.asarray(g[1:], dtype=float)
    aug = np.zeros((3, 3))
    aug[:2, :2] = A
    aug[:2, 2] = lambda_map(t) @ xi
    times = np.asarray(times, dtype=float)
    w = expm_batch(aug, times) @ np.concatenate([v, [1.0]])
    return np.concatenate([np.full((times.size, 1), t), w[:, :2]], axis=1)


def semidirect_flow(m: SemidirectRxR2, s, g) -> GroupElement:
    """(t, e^{sA} v + (e^{sA} - I) A^-1 Lambda_t xi)."""
    if not m.invertible:
        raise ModelError("semidirect flow formula needs lambda^2 + mu^2 != 0")
    g = _raw(g)
    t, v = float(g[0]), np.asarray(g[1:], dtype=float)
    A, xi = to_float(m.A), to_float(np.array(m.xi, dtype=object))
    eA = expm(float(s) * A)
    w = eA @ v + (eA - np.eye(2)) @ np.linalg.solve(A, lambda_map(t) @ xi)
    return GroupElement(m, np.concatenate([[t], w]))


def fixed_set_semidirect(m: SemidirectRxR2, t_grid) -> list[tuple[float, np.ndarray]]:
    """v(t) = -A^-1 Lambda_t xi on each grid time."""
    if not m.invertible:
        raise ModelError("fixed set formula needs lambda^2 + mu^2 != 0")
    A, xi = to_float(m.A), to_float(np.array(m.xi, dtype=object))
    return [(float(t), -np.linalg.solve(A, lambda_map(float(t)) @ xi)) for t in t_grid]


def flow_batch(m: GroupModel, D, times, g) -> np.ndarray:
    """Orbit points of the linear flow of D from g, one row per time (float)."""
    g = to_float(_raw(g))
    times = np.asarray(times, dtype=float)
    if isinstance(m, (EuclideanAbelian, HeisenbergExp)):
        return expm_batch(D, times) @ g
    if isinstance(m, SemidirectRxR2):
        Df = to_float(D)
        return _semidirect_flow_batch(Df[1:, 1:], Df[1:, 0], times, g)
    raise ModelError(f"no continuous flow on {m.name}")


def flow(m: GroupModel, D, t, g) -> np.ndarray:
    return flow_batch(m, D, [t], g)[0]


def vector_field(m: GroupModel, D, g) -> np.ndarray:
    """Linear vector field of D at g (float)."""
    g = to_float(_raw(g))
    Df = to_float(D)
    if isinstance(m, (EuclideanAbelian, HeisenbergExp)):
        return Df @ g
    if isinstance(m, SemidirectRxR2):
        return np.concatenate([[0.0], Df[1:, 1:] @ g[1:] + lambda_map(g[0]) @ Df[1:, 0]])
    raise ModelError(f"no vector field on {m.name}")


# --------------------------------------------------------------------------
# fixed and recurrent sets
# --------------------------------------------------------------------------

@dataclass
class AffineZeroSet:
    """{p + k : k in kernel}; ``point`` is None when the system is inconsistent."""

    point: np.ndarray | None
    kernel: Subspace


def _affine_zero_set(mats, rhs, n: int, tol: float = 1e-10) -> AffineZeroSet:
    """Common solutions of M_i x + c_i = 0."""
    exact = all(is_exact(M) for M in mats) and all(is_exact(c) for c in rhs)
    if not mats:
        return AffineZeroSet(zeros(n, exact), Subspace.whole(n, exact))
    M = np.concatenate(mats, axis=0)
    c = np.concatenate(rhs)
    if not exact:
        M, c = to_float(M), to_float(c)
    K = Subspace(nullspace(M, tol))
    if exact:
        from .linalg import rref
        aug = np.concatenate([M, -c[:, None]], axis=1)
        R, piv = rref(aug)
        if n in piv:
            return AffineZeroSet(None, K)
        x = zeros(n, True)
        for row, col in enumerate(piv):
            x[col] = R[row, n]
        return AffineZeroSet(x, K)
    if not np.any(c):
        return AffineZeroSet(np.zeros(n), K)
    x, *_ = np.linalg.lstsq(M, -c, rcond=None)
    scale = max(1.0, float(np.linalg.norm(M)), float(np.linalg.norm(c)))
    if np.linalg.norm(M @ x + c) > tol * scale:
        return AffineZeroSet(None, K)
    return AffineZeroSet(x, K)


def _fiber_system(part, t: float):
    """Semidirect part field v -> A' v + Lambda_t xi' as (A', Lambda_t xi')."""
    if is_exact(part) and not np.any(part[1:, 0] != 0):
        return part[1:, 1:], zeros(2, True)
    P = to_float(part)
    return P[1:, 1:], lambda_map(t) @ P[1:, 0]


def candidate_set(m: GroupModel, parts: JordanTriple, t: float = 0.0,
                  include=("H", "N"), tol: float = 1e-10) -> AffineZeroSet:
    """Common zero set of the selected part fields.

    For exponential charts the fields are linear (x -> D' x).  For the
    semidirect model the set is fibred over t; this returns the fibre at t
    as a subset of R^2.
    """
    chosen = [getattr(parts, k) for k in include]
    if isinstance(m, (EuclideanAbelian, HeisenbergExp)):
        return _affine_zero_set(chosen, [zeros(m.dim, is_exact(P)) for P in chosen], m.dim, tol)
    if isinstance(m, SemidirectRxR2):
        systems = [_fiber_system(P, t) for P in chosen]
        return _affine_zero_set([s[0] for s in systems], [s[1] for s in systems], 2, tol)
    raise ModelError(f"no continuous flow on {m.name}")


def _probe_metric(m: GroupModel, G: np.ndarray):
    """Distance to x under the model's probe metric, vectorised over rows."""
    if isinstance(m, SemidirectRxR2):
        def dist(x, pts):
            q = m.log_quotient(x, pts)
            return np.maximum(np.abs(q[:, 0]), g_norm(G, q[:, 1:]))

        def size(pts):
            pts = np.atleast_2d(pts)
            return np.maximum(np.abs(pts[:, 0]), g_norm(G, pts[:, 1:]))
    else:
        def dist(x, pts):
            return g_norm(G, m.log_quotient(x, pts))

        def size(pts):
            return g_norm(G, np.atleast_2d(pts))
    return dist, size


def probe_model_point(m: GroupModel, D, x, G, freqs, eps: float = 1e-6, t_max: float = 100.0,
                      t_min_return: float = 1.0, samples: int = 2000):
    x = np.asarray(to_float(x), dtype=float)
    dist, size = _probe_metric(m, G)
    return probe_orbit(lambda ts: flow_batch(m, D, ts, x), lambda p: dist(x, p), size,
                       x, eps, t_min_return, t_max, freqs, samples=samples)


def _elliptic_metric(m: GroupModel, parts: JordanTriple):
    E = to_float(parts.E)
    if isinstance(m, SemidirectRxR2):
        E = E[1:, 1:]
    return elliptic_invariant_inner_product(E), elliptic_frequencies(to_float(parts.E))


def _complement(K: Subspace, n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of K."""
    if K.dim == 0:
        return np.eye(n)
    Q = K.orthonormal()
    return nullspace(Q.T.astype(float))


def recurrent_set_certificate(m: GroupModel, D=None, n_samples: int = 100, eps: float = 1e-6,
                              t_max: float = 100.0, offset=(0.1, 1.0), seed: int = 0,
                              tol: float = 1e-10, samples: int = 2000) -> Report:
    """Probe both directions of R(phi) = fix(phi^H) & fix(phi^N).

    (a) sampled candidate points must probe Recurrent; (b) points pushed
    off the candidate set by a vector of norm in ``offset`` orthogonal to
    its directions must not.
    """
    if isinstance(m, Torus2):
        raise ModelError("the recurrent-set certificate needs a continuous-time flow")
    if D is None:
        if not isinstance(m, SemidirectRxR2):
            raise ModelError(f"{m.name} needs an explicit derivation")
        D = m.derivation()
    if isinstance(m, SemidirectRxR2):
        SemidirectRxR2.from_derivation(D)
    _require_derivation(m, D)
    parts = derivation_parts(m.algebra, D)
    G, freqs = _elliptic_metric(m, parts)
    rng = np.random.default_rng(seed)
    n = m.dim
    rep = Report("recurrent")

    def candidate_point():
        """A random point of the candidate set and the directions it spans there."""
        if isinstance(m, SemidirectRxR2):
            t = float(rng.uniform(-math.pi, math.pi))
            Z = candidate_set(m, parts, t, tol=tol)
            if Z.point is None:
                raise ModelError("candidate set is empty")
            fiber = to_float(Z.kernel.basis)
            x = np.concatenate([[t], to_float(Z.point) + fiber @ rng.uniform(-2, 2, fiber.shape[1])])
            # the t direction is tangent to the candidate set as well
            tangent = np.zeros((3, 1 + fiber.shape[1]))
            tangent[0, 0] = 1.0
            tangent[1:, 1:] = fiber
            return x, Subspace(tangent)
        Z = candidate_set(m, parts, tol=tol)
        if Z.point is None:
            raise ModelError("candidate set is empty")
        K = to_float(Z.kernel.basis)
        return to_float(Z.point) + K @ rng.uniform(-2, 2, K.shape[1]), Subspace(K)

    fails_a, fails_b, n_b = [], [], 0
    min_off = np.inf
    for i in range(n_samples):
        x, K = candidate_point()
        res = probe_model_point(m, D, x, G, freqs, eps, t_max, samples=samples)
        if not res.recurrent:
            fails_a.append((x.tolist(), res.verdict, res.min_distance))
        C = _complement(K, n)
        if C.shape[1] == 0:
            continue
        u = C @ rng.normal(size=C.shape[1])
        u *= rng.uniform(*offset) / np.linalg.norm(u)
        min_off = min(min_off, float(np.linalg.norm(u)))
        y = x + u
        n_b += 1
        res = probe_model_point(m, D, y, G, freqs, eps, t_max, samples=samples)
        if res.recurrent:
            fails_b.append((y.tolist(), res.min_distance, res.t_best))

    Z0 = candidate_set(m, parts, 0.0, tol=tol)
    rep.data.update(_describe_candidates(m, parts, Z0))
    rep.data.update({"candidate_samples": n_samples, "offset_samples": n_b,
                     "min_offset_norm": None if n_b == 0 else min_off,
                     "candidate_failures": fails_a[:5], "offset_failures": fails_b[:5]})
    rep.add("candidates_recurrent", len(fails_a) / n_samples, 0.0,
            note=f"{n_samples - len(fails_a)}/{n_samples} returned within eps={eps:g}")
    if n_b == 0:
        rep.add("offset_nonrecurrent", 0.0, 0.0, note="vacuous: candidate set is the whole group")
    else:
        rep.add("offset_nonrecurrent", len(fails_b) / n_b, 0.0,
                note=f"{n_b - len(fails_b)}/{n_b} stayed away from their start")
    return rep


def _describe_candidates(m: GroupModel, parts: JordanTriple, Z: AffineZeroSet) -> dict:
    if isinstance(m, SemidirectRxR2):
        xi_h = parts.H[1:, 0]
        xi_n = parts.N[1:, 0]
        homogeneous = not np.any(xi_h != 0) and not np.any(xi_n != 0)
        out = {"fiber_kernel_dim": Z.kernel.dim,
               "xi_H": [str(v) for v in xi_h], "xi_N": [str(v) for v in xi_n],
               "homogeneous": bool(homogeneous)}
        if homogeneous and Z.kernel.dim == 0:
            out["candidate_set"] = "R x {0}"
        elif homogeneous and Z.kernel.dim == 2:
            out["candidate_set"] = "R x R^2"
        else:
            out["candidate_set"] = "{(t, v) : A_H v + Lambda_t xi_H = 0, A_N v + Lambda_t xi_N = 0}"
        return out
    basis = to_float(Z.kernel.basis)
    return {"candidate_dim": Z.kernel.dim, "candidate_basis": basis.T.tolist()}


def fix_intersection_certificate(m: GroupModel, D=None, t_grid=None, tol: float = 1e-10) -> Report:
    """fix(phi) equals fix(phi^E) & fix(phi^H) & fix(phi^N), compared as zero sets."""
    if D is None:
        if not isinstance(m, SemidirectRxR2):
            raise ModelError(f"{m.name} needs an explicit derivation")
        D = m.derivation()
    _require_derivation(m, D)
    parts = derivation_parts(m.algebra, D)
    whole = JordanTriple(D, D, D, parts.method)
    grid = [0.0] if not isinstance(m, SemidirectRxR2) else (
        list(t_grid) if t_grid is not None else list(np.linspace(-math.pi, math.pi, 25)))
    rep = Report("fix_intersection")
    worst = 0.0
    mismatch = 0
    for t in grid:
        full = candidate_set(m, whole, t, include=("E",), tol=tol)
        inter = candidate_set(m, parts, t, include=("E", "H", "N"), tol=tol)
        if (full.point is None) != (inter.point is None):
            mismatch += 1
            continue
        if not full.kernel.equals(inter.kernel, tol):
            mismatch += 1
            continue
        if full.point is None:
            continue
        # each affine set must contain the other's base point
        for Z, p in ((full, inter.point), (inter, full.point)):
            pt = to_float(p)
            for part in ((D,) if Z is full else (parts.E, parts.H, parts.N)):
                x = np.concatenate([[t], pt]) if isinstance(m, SemidirectRxR2) else pt
                worst = max(worst, float(np.linalg.norm(vector_field(m, part, x))))
    rep.add("zero_sets_agree", float(mismatch), 0.0, note=f"{len(grid)} grid times")
    rep.add("cross_residual", worst, tol)
    rep.data["grid"] = [float(t) for t in grid]
    return rep


def ad_conjugation_identity(m: GroupModel, D=None, samples: int = 100, t_range=(-2.0, 2.0),
                            seed: int = 0, tol: float = 1e-8) -> Report:
    """max |Ad(phi_t g) - e^{tD} Ad(g) e^{-tD}| (that is, e^{t ad D} Ad(g))."""
    if isinstance(m, Torus2):
        raise ModelError("no adjoint representation for the discrete torus model")
    if D is None:
        if not isinstance(m, SemidirectRxR2):
            raise ModelError(f"{m.name} needs an explicit derivation")
        D = m.derivation()
    _require_derivation(m, D)
    Df = to_float(D)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        g = rng.normal(size=m.dim)
        t = float(rng.uniform(*t_range))
        lhs = m.adjoint(flow(m, D, t, g))
        eD = expm(t * Df)
        rhs = eD @ m.adjoint(g) @ np.linalg.inv(eD)
        worst = max(worst, float(np.abs(lhs - rhs).max()) / max(1.0, float(np.abs(rhs).max())))
    rep = Report("ad_conjugation")
    rep.add("ad_conjugation", worst, tol, note=f"{samples} samples")
    return rep


def automorphism_check(m: GroupModel, D=None, samples: int = 100, t_range=(-2.0, 2.0),
                       seed: int = 0, tol: float = 1e-9) -> Report:
    """phi_t(gh) = phi_t(g) phi_t(h) and phi_{t+s} = phi_t o phi_s on random samples."""
    if D is None:
        if not isinstance(m, SemidirectRxR2):
            raise ModelError(f"{m.name} needs an explicit derivation")
        D = m.derivation()
    _require_derivation(m, D)
    rng = np.random.default_rng(seed)
    hom = fl = 0.0
    for _ in range(samples):
        g, h = rng.normal(size=m.dim), rng.normal(size=m.dim)
        t, s = rng.uniform(*t_range, size=2)
        lhs = flow(m, D, t, m.multiply(g, h))
        rhs = m.multiply(flow(m, D, t, g), flow(m, D, t, h))
        hom = max(hom, float(np.linalg.norm(lhs - rhs)) / max(1.0, float(np.linalg.norm(rhs))))
        a = flow(m, D, t + s, g)
        b = flow(m, D, t, flow(m, D, s, g))
        fl = max(fl, float(np.linalg.norm(a - b)) / max(1.0, float(np.linalg.norm(a))))
    rep = Report("automorphism")
    rep.add("homomorphism", hom, tol)
    rep.add("flow_property", fl, tol)
    return rep


# --------------------------------------------------------------------------
# torus: discrete time
# --------------------------------------------------------------------------

def catmap_iterate(m: Torus2, p, n: int) -> GroupElement:
    """M^n p mod 1 (exact for rational p)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    M = np.array(m.M, dtype=object)
    x = m._coords(p if not isinstance(p, GroupElement) else p.coords)
    if not is_exact(x):
        M = M.astype(float)
    for _ in range(n):
        x = mod1(M @ x)
    return GroupElement(m, x)


def _exact_denominator_points(q: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    a, b = a.ravel(), b.ravel()
    keep = np.gcd(np.gcd(a, b), q) == 1
    return a[keep], b[keep]


def catmap_periods(m: Torus2, q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact periods of all points with exact denominator q (integer arithmetic mod q)."""
    (m11, m12), (m21, m22) = m.M
    a0, b0 = _exact_denominator_points(q)
    a, b = a0.copy(), b0.copy()
    period = np.zeros(a.size, dtype=np.int64)
    for k in range(1, q * q + 1):
        a, b = (m11 * a + m12 * b) % q, (m21 * a + m22 * b) % q
        back = (period == 0) & (a == a0) & (b == b0)
        period[back] = k
        if period.all():
            break
    return a0, b0, period


def catmap_discrete_counterexample(m: Torus2 | None = None, q_max: int = 50) -> Report:
    """Every rational point is periodic; only [0, 0] is fixed."""
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    m = m or Torus2()
    total = periodic = 0
    fixed: list[tuple[Fraction, Fraction]] = []
    longest = (1, (Fraction(0), Fraction(0)))
    periods_by_q = {}
    for q in range(1, q_max + 1):
        a, b, per = catmap_periods(m, q)
        total += a.size
        periodic += int(np.count_nonzero(per))
        for i in np.flatnonzero(per == 1):
            fixed.append((Fraction(int(a[i]), q), Fraction(int(b[i]), q)))
        if per.size and per.max() > longest[0]:
            i = int(per.argmax())
            longest = (int(per[i]), (Fraction(int(a[i]), q), Fraction(int(b[i]), q)))
        periods_by_q[q] = sorted(set(int(p) for p in per))
    rep = Report("catmap")
    rep.add("all_periodic", float(total - periodic), 0.0, note=f"{periodic}/{total} points")
    only_origin = fixed == [(Fraction(0), Fraction(0))]
    rep.add("only_fixed_point_origin", 0.0 if only_origin else float(len(fixed)), 0.0,
            note="fixed points: " + ", ".join(f"[{x},{y}]" for x, y in fixed[:10]))
    rep.data.update({"q_max": q_max, "points": total, "periodic": periodic,
                     "fixed_points": [[str(x), str(y)] for x, y in fixed],
                     "longest_period": longest[0],
                     "longest_period_point": [str(v) for v in longest[1]],
                     "periods_by_q": {str(q): v for q, v in periods_by_q.items() if q <= 10}})
    return rep


def catmap_generator() -> np.ndarray:
    """D = P diag(ln((3 + sqrt5)/2), ln((3 - sqrt5)/2)) P^-1 with e^D = [[1, 1], [1, 2]]."""
    r5 = math.sqrt(5.0)
    P = np.array([[2.0, 2.0], [1.0 + r5, 1.0 - r5]])
    L = np.diag([math.log((3 + r5) / 2), math.log((3 - r5) / 2)])
    return P @ L @ np.linalg.inv(P)


def catmap_generator_check(tol: float = 1e-12) -> Report:
    D = catmap_generator()
    M = np.array([[1.0, 1.0], [1.0, 2.0]])
    t = jordan_decompose(D)
    E, H, N = t.as_float()
    rep = Report("catmap_generator")
    rep.add("exp_equals_M", float(np.abs(expm(D) - M).max()), tol)
    rep.add("trace_zero", abs(float(np.trace(D))), tol)
    rep.add("elliptic_zero", float(np.abs(E).max()), tol)
    rep.add("nilpotent_zero", float(np.abs(N).max()), tol)
    rep.add("hyperbolic_is_D", float(np.abs(H - D).max()), tol)
    rep.data["D"] = D.tolist()
    return rep


def semidirect_ode_check(m: SemidirectRxR2, samples: int = 20, s_max: float = 10.0,
                         seed: int = 0, tol: float = 1e-8) -> Report:
    """Closed-form flow against adaptive RK45 integration of the vector field."""
    from scipy.integrate import solve_ivp

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        g = np.concatenate([[rng.uniform(-math.pi, math.pi)], rng.normal(size=2)])
        s = float(rng.uniform(-s_max, s_max))
        sol = solve_ivp(lambda _, y: semidirect_vector_field(m, y), (0.0, s), g,
                        method="RK45", rtol=1e-12, atol=1e-12)
        ref = sol.y[:, -1]
        closed = semidirect_flow(m, s, g).coords
        worst = max(worst, float(np.linalg.norm(closed - ref)) / max(1.0, float(np.linalg.norm(ref))))
    rep = Report("semidirect_ode")
    rep.add("ode_oracle", worst, tol, note=f"{samples} samples, |s| <= {s_max:g}")
    return rep
