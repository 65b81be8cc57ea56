"""Isometric linear flows: skew derivations, Cartan data, automorphic isometries."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import expm

from .algebra import (
    LieAlgebra,
    ad_operator,
    bracket,
    coordinates_in,
    derivation_residual,
    killing_matrix,
    matrix_algebra,
    sl_basis,
)
from .jordan import NotDerivationError
from .group_models import EuclideanAbelian, GroupModel, HeisenbergExp, ModelError
from .linalg import (
    RANK_TOL,
    Subspace,
    eye,
    is_exact,
    norm,
    nullspace,
    rank,
    to_float,
    zeros,
)
from .report import Report


class DegenerateKillingError(ValueError):
    """The Killing form is degenerate, so the algebra is not semisimple."""


class NotAdmissibleError(ValueError):
    pass


@dataclass
class CartanData:
    theta: np.ndarray
    l: Subspace
    p: Subspace
    inner: np.ndarray
    checks: Report = field(default_factory=lambda: Report("cartan"))


def require_semisimple(alg: LieAlgebra, tol: float = 1e-10) -> np.ndarray:
    """Killing matrix, after checking it is nondegenerate."""
    K = killing_matrix(alg)
    if is_exact(K):
        if rank(K) < alg.dim:
            raise DegenerateKillingError("Killing form is degenerate")
    else:
        s = np.linalg.svd(K, compute_uv=False)
        if s[-1] <= tol * max(1.0, s[0]):
            raise DegenerateKillingError(f"Killing form is degenerate (smallest singular value {s[-1]:.3g})")
    return K


def inner_from_theta(alg: LieAlgebra, theta) -> np.ndarray:
    """Gram matrix of <Y, Z> = -B(Y, theta Z)."""
    K = require_semisimple(alg)
    return -(K @ theta)


def cartan_data(alg: LieAlgebra, theta) -> CartanData:
    """Eigenspaces of theta and the inner product, with the checks that theta must pass."""
    d = alg.dim
    ident = eye(d, is_exact(theta))
    l = Subspace(nullspace(theta - ident))
    p = Subspace(nullspace(theta + ident))
    inner = inner_from_theta(alg, theta)
    rep = Report("cartan")
    rep.add("involution", norm(theta @ theta - ident), 1e-12)
    rep.add("automorphism", automorphism_residual(alg, theta), 1e-12)
    rep.add("direct_sum", float(d - l.dim - p.dim), 0.0)
    rep.add("inner_symmetric", norm(inner - inner.T), 1e-12)
    eig = np.linalg.eigvalsh(to_float(inner + inner.T) / 2)
    rep.add("inner_positive", max(0.0, -float(eig.min())), 0.0, passed=bool(eig.min() > 0),
            note=f"min eigenvalue {eig.min():.6g}")
    return CartanData(theta, l, p, inner, rep)


def cartan_data_sl(n: int) -> tuple[LieAlgebra, CartanData]:
    """sl(n, R) with theta(X) = -X^T."""
    if n < 2:
        raise ValueError("sl(n) needs n >= 2")
    mats, labels = sl_basis(n)
    alg = matrix_algebra(mats, labels)
    theta = zeros((alg.dim, alg.dim), True)
    for j, m in enumerate(mats):
        theta[:, j] = coordinates_in(mats, -m.T)
    return alg, cartan_data(alg, theta)


def automorphism_residual(alg: LieAlgebra, phi) -> float:
    """max |phi[x, y] - [phi x, phi y]| on basis pairs."""
    worst = 0.0
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            x, y = alg.basis_vector(i), alg.basis_vector(j)
            r = phi @ bracket(alg, x, y) - bracket(alg, phi @ x, phi @ y)
            worst = max(worst, norm(r))
    return worst


def _span_brackets(alg: LieAlgebra, A: Subspace, B: Subspace, tol: float) -> Subspace:
    vecs = [bracket(alg, a, b) for a in A.basis.T for b in B.basis.T]
    return A + Subspace.span(np.stack(vecs, axis=1), alg.dim, tol) if vecs else A


def bracket_generating_check(alg: LieAlgebra, delta: Subspace, tol: float = RANK_TOL) -> Report:
    """Grow Delta, Delta + [Delta, Delta], ... until stable."""
    current = delta
    dims = [current.dim]
    steps = 0
    while True:
        nxt = _span_brackets(alg, current, delta, tol)
        if nxt.dim == current.dim:
            break
        current = nxt
        steps += 1
        dims.append(current.dim)
    rep = Report("bracket_generating")
    rep.add("bracket_generating", float(alg.dim - current.dim), 0.0,
            note=f"stable at dim {current.dim} after {steps} steps")
    rep.data.update({"steps": steps, "dims": dims, "stable_dim": current.dim})
    return rep


def _inner_form(inner, x, y):
    return x @ inner @ y


def skew_on_delta(D, delta: Subspace, inner, tol: float = 1e-10) -> Report:
    """Delta is D-invariant and <Dx, y> + <x, Dy> = 0 on Delta."""
    exact = is_exact(D) and delta.exact and is_exact(inner)
    if not exact:
        D, inner = to_float(D), to_float(inner)
        delta = Subspace(to_float(delta.basis))
    B = delta.basis
    inv = max((delta.distance(D @ b) for b in B.T), default=0.0)
    skew = 0.0
    scale = max(1.0, norm(D)) * max(1.0, norm(inner))
    for i in range(B.shape[1]):
        for j in range(i, B.shape[1]):
            x, y = B[:, i], B[:, j]
            r = _inner_form(inner, D @ x, y) + _inner_form(inner, x, D @ y)
            skew = max(skew, abs(float(r)) * (1.0 if exact else 1.0 / scale))
    rep = Report("skew_on_delta")
    rep.add("invariant", float(inv), tol)
    rep.add("skew", skew, tol)
    return rep


def killing_adjoint_identity(alg: LieAlgebra, cartan: CartanData, D=None, samples: int = 100,
                             seed: int = 0, tol: float = 1e-10) -> Report:
    """<DY, Z> = -<Y, theta D theta Z> for D = -ad(X), on random X, Y, Z.

    If ``D`` is given it is used for every sample instead of a random -ad(X).
    """
    require_semisimple(alg)
    rng = np.random.default_rng(seed)
    G = to_float(cartan.inner)
    T = to_float(cartan.theta)
    af = alg.to_float()
    worst = 0.0
    for _ in range(samples):
        Dk = to_float(D) if D is not None else -ad_operator(af, rng.normal(size=alg.dim))
        Y, Z = rng.normal(size=alg.dim), rng.normal(size=alg.dim)
        lhs = (Dk @ Y) @ G @ Z
        rhs = -(Y @ G @ (T @ Dk @ T @ Z))
        scale = max(1.0, np.linalg.norm(Dk) * np.linalg.norm(G) * np.linalg.norm(Y) * np.linalg.norm(Z))
        worst = max(worst, abs(lhs - rhs) / scale)
    rep = Report("killing_adjoint")
    rep.add("killing_adjoint", float(worst), tol, note=f"{samples} samples")
    return rep


def theta_commutation_propagation(alg: LieAlgebra, theta, D, delta: Subspace,
                                  tol: float = 1e-10) -> Report:
    """Commutation of D and theta on Delta, then on each bracket level it generates."""
    exact = is_exact(D) and is_exact(theta) and delta.exact and alg.exact
    if not exact:
        alg, D, theta = alg.to_float(), to_float(D), to_float(theta)
        delta = Subspace(to_float(delta.basis))
    C = D @ theta - theta @ D

    def residual(S: Subspace) -> float:
        return max((norm(C @ b) for b in S.basis.T), default=0.0)

    levels = [residual(delta)]
    current = delta
    while True:
        nxt = _span_brackets(alg, current, delta, RANK_TOL)
        if nxt.dim == current.dim:
            break
        current = nxt
        levels.append(residual(current))
    rep = Report("theta_propagation")
    rep.add("commutes_on_delta", levels[0], tol)
    rep.add("commutes_on_generated", levels[-1], tol,
            note=f"generated dim {current.dim} of {alg.dim}")
    implication = levels[0] > tol or all(r <= tol * (1 + k) for k, r in enumerate(levels))
    rep.data.update({"level_residuals": levels, "implication_holds": bool(implication),
                     "generated_dim": current.dim})
    return rep


def normalizer(alg: LieAlgebra, delta: Subspace, tol: float = RANK_TOL) -> Subspace:
    """{X : [X, Delta] in Delta} as the kernel of Q ad(d_j) stacked over a Delta basis.

    Q has rows spanning the annihilator of Delta, so Q v = 0 iff v is in Delta.
    """
    exact = alg.exact and delta.exact
    if not exact:
        alg = alg.to_float()
        delta = Subspace(to_float(delta.basis))
    n = alg.dim
    if delta.dim == 0 or delta.dim == n:
        return Subspace.whole(n, exact)
    Q = nullspace(delta.basis.T, tol).T
    blocks = [Q @ ad_operator(alg, d) for d in delta.basis.T]
    return Subspace(nullspace(np.concatenate(blocks, axis=0), tol))


def normalizer_residual(alg: LieAlgebra, delta: Subspace, nrm: Subspace) -> float:
    return max((delta.distance(bracket(alg, x, d)) for x in nrm.basis.T for d in delta.basis.T),
               default=0.0)


def automorphic_isometry_algebra(alg: LieAlgebra, cartan: CartanData, delta: Subspace,
                                 tol: float = RANK_TOL) -> Subspace:
    """l & n: generators X whose derivation -ad(X) is an automorphic isometry."""
    require_semisimple(alg)
    return cartan.l.intersect(normalizer(alg, delta, tol), tol)


def automorphic_isometry_certificate(alg: LieAlgebra, cartan: CartanData, delta: Subspace,
                                     samples: int = 20, seed: int = 0,
                                     tol: float = 1e-10) -> tuple[Subspace, Report]:
    """l & n with cross-checks: its elements are skew on Delta, random outsiders are not."""
    rep = Report("automorphic_isometry")
    bg = bracket_generating_check(alg, delta)
    if not bg.passed:
        rep.data["warning"] = "distribution is not bracket generating"
    res = automorphic_isometry_algebra(alg, cartan, delta)
    worst = 0.0
    for X in res.basis.T:
        r = skew_on_delta(-ad_operator(alg, X), delta, cartan.inner, tol)
        worst = max(worst, r.max_residual())
    rep.add("members_skew", worst, tol, note=f"dim {res.dim}")
    rng = np.random.default_rng(seed)
    af = alg.to_float()
    misses = 0
    Pf = res.projector() if res.dim else np.zeros((alg.dim, alg.dim))
    Pf = to_float(Pf)
    tried = 0
    for _ in range(samples):
        X = rng.normal(size=alg.dim)
        out = X - Pf @ X
        if np.linalg.norm(out) < 0.1:
            continue
        tried += 1
        r = skew_on_delta(-ad_operator(af, X), Subspace(to_float(delta.basis)), to_float(cartan.inner), tol)
        if r.passed:
            misses += 1
    rep.add("outsiders_not_skew", float(misses), 0.0, note=f"{tried} samples outside")
    rep.data.update({"dim": res.dim, "basis": [[str(v) for v in b] for b in res.basis.T],
                     "bracket_generating": bg.passed})
    return res, rep


# --------------------------------------------------------------------------
# arc length on groups with exponential charts
# --------------------------------------------------------------------------

@dataclass
class SampledCurve:
    """Points c(s_i) and tangents c'(s_i) in exponential coordinates."""

    s: np.ndarray
    points: np.ndarray
    tangents: np.ndarray


def circle_curve(n: int = 10_000, s_max: float = 2 * np.pi, dim: int = 3) -> SampledCurve:
    """c(s) = (cos s, sin s, s/2): its left-trivialised velocity is horizontal."""
    s = np.linspace(0.0, s_max, n)
    pts = np.zeros((n, dim))
    tan = np.zeros((n, dim))
    pts[:, 0], pts[:, 1] = np.cos(s), np.sin(s)
    tan[:, 0], tan[:, 1] = -np.sin(s), np.cos(s)
    if dim >= 3:
        pts[:, 2], tan[:, 2] = s / 2, 0.5
    return SampledCurve(s, pts, tan)


def body_velocity(m: GroupModel, points, tangents) -> np.ndarray:
    """Left-trivialised velocity c^-1 c' in exponential coordinates."""
    if isinstance(m, EuclideanAbelian):
        return np.asarray(tangents, dtype=float)
    if isinstance(m, HeisenbergExp):
        out = np.array(tangents, dtype=float)
        out[:, 2] -= (points[:, 0] * tangents[:, 1] - points[:, 1] * tangents[:, 0]) / 2
        return out
    raise ModelError(f"arc length needs an exponential chart, not {m.name}")


def curve_length(m: GroupModel, curve: SampledCurve, inner, delta: Subspace | None = None,
                 admissible_tol: float = 1e-8) -> float:
    body = body_velocity(m, curve.points, curve.tangents)
    G = to_float(inner)
    if delta is not None and delta.dim < m.dim:
        d = Subspace(to_float(delta.basis))
        P = d.projector()
        off = np.linalg.norm(body - body @ P.T, axis=1)
        bad = off > admissible_tol * np.maximum(1.0, np.linalg.norm(body, axis=1))
        if np.any(bad):
            raise NotAdmissibleError(f"curve leaves the distribution (max offset {off.max():.3g})")
    speed = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", body, G, body), 0.0))
    return float(trapezoid(speed, curve.s))


def arc_length_preservation(m: GroupModel, D, inner, curve: SampledCurve, t: float,
                            delta: Subspace | None = None, tol: float = 1e-6) -> Report:
    """Relative change of left-invariant length of the curve under phi_t."""
    if not isinstance(m, (EuclideanAbelian, HeisenbergExp)):
        raise ModelError(f"arc length needs an exponential chart, not {m.name}")
    if derivation_residual(m.algebra, D) > 1e-10:
        raise NotDerivationError("D is not a derivation")
    eD = expm(float(t) * to_float(D))
    image = SampledCurve(curve.s, curve.points @ eD.T, curve.tangents @ eD.T)
    L0 = curve_length(m, curve, inner, delta)
    L1 = curve_length(m, image, inner, None)
    drift = abs(L1 - L0) / max(L0, 1e-300)
    rep = Report("arc_length")
    rep.add("arc_length", drift, tol, note=f"t={t:g} length {L0:.12g} -> {L1:.12g}")
    rep.data.update({"t": float(t), "length_before": L0, "length_after": L1, "relative_drift": drift})
    return rep
