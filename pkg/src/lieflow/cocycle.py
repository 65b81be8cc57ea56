"""Cocycles over linear flows: gamma_{t+s} = gamma_t + e^{tA} gamma_s.

Only the differentiable family ``gamma_t = int_0^t e^{sA} b ds`` is
generated; it is exactly the solution set of ``gamma' = A gamma + b``,
``gamma_0 = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .grading import hyperbolic_grading
from .jordan import JordanError, jordan_decompose
from .linalg import (DimensionError, check_square, expm_batch, is_exact, nilpotent_exp, norm, solve,
                     to_float, zeros)
from .report import Report


class EllipticPartError(ValueError):
    """The boundedness lemma needs a generator without elliptic part."""


@dataclass(frozen=True)
class CocycleSpec:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        n = check_square(self.A)
        if np.asarray(self.b).shape != (n,):
            raise DimensionError("b must have the dimension of A")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def augmented(self) -> np.ndarray:
        n = self.dim
        exact = is_exact(self.A) and is_exact(self.b)
        aug = zeros((n + 1, n + 1), exact)
        aug[:n, :n] = self.A if exact else to_float(self.A)
        aug[:n, n] = self.b if exact else to_float(self.b)
        return aug


def cocycle_eval(c: CocycleSpec, t) -> np.ndarray:
    """gamma_t from the top-right column of exp(t [[A, b], [0, 0]]).

    Exact when A, b and t are rational and A is nilpotent; float otherwise.
    """
    aug = c.augmented()
    n = c.dim
    if is_exact(aug) and isinstance(t, (int, Fraction)):
        E = nilpotent_exp(aug, Fraction(t))
        if E is not None:
            return E[:n, n]
    return expm(float(t) * to_float(aug))[:n, n]


def _expm_many(c: CocycleSpec, times) -> np.ndarray:
    """Last column of e^{t aug}, as e^{tS} e^{tN} from the Jordan split of aug."""
    aug = c.augmented()
    n = c.dim
    try:
        t = jordan_decompose(aug)
    except JordanError:
        return expm(times[:, None, None] * to_float(aug)[None])[:, :n, n]
    S, N = to_float(t.E + t.H), to_float(t.N)
    # e^{tN} applied to the last basis vector: a finite series
    col = np.zeros((len(times), n + 1))
    term = np.zeros(n + 1)
    term[n] = 1.0
    coef = np.ones(len(times))
    for k in range(n + 1):
        col += coef[:, None] * term
        term = N @ term
        if not term.any():
            break
        coef = coef * times / (k + 1)
    return np.einsum("tij,tj->ti", expm_batch(S, times), col)[:, :n]


def graded_pieces(c: CocycleSpec) -> list[tuple[object, np.ndarray | None, CocycleSpec]]:
    """Split b over the eigenspaces of the hyperbolic part of A.

    Each eigenspace is A-invariant and A restricted to it has a single real
    part in its spectrum, so its exponential is accurate relative to its own
    size.  Returns (eigenvalue, basis, restricted spec) triples; a single
    piece carries basis None.
    """
    try:
        g = hyperbolic_grading(jordan_decompose(c.A).H)
    except JordanError:
        return [(None, None, c)]
    if len(g.eigenvalues) <= 1:
        return [(g.eigenvalues[0] if g.eigenvalues else None, None, c)]
    exact = is_exact(c.A) and is_exact(c.b) and g.exact
    A = c.A if exact else to_float(c.A)
    bases = [g.spaces[lam].basis if exact else to_float(g.spaces[lam].basis) for lam in g.eigenvalues]
    coef = solve(np.concatenate(bases, axis=1), c.b if exact else to_float(c.b))
    out, pos = [], 0
    for lam, basis in zip(g.eigenvalues, bases):
        k = basis.shape[1]
        # A basis = basis R
        R = solve(basis.T @ basis, basis.T @ A @ basis)
        out.append((lam, basis, CocycleSpec(R, coef[pos:pos + k])))
        pos += k
    return out


def cocycle_eval_many(c: CocycleSpec, times, pieces=None) -> np.ndarray:
    """gamma at an array of times, summed over :func:`graded_pieces`."""
    times = np.asarray(times, dtype=float)
    pieces = graded_pieces(c) if pieces is None else pieces
    out = np.zeros((len(times), c.dim))
    for _, basis, sub in pieces:
        part = _expm_many(sub, times)
        out += part if basis is None else part @ to_float(basis).T
    return out


def propagate(c: CocycleSpec, times, v) -> np.ndarray:
    """e^{tA} v for an array of times."""
    times = np.asarray(times, dtype=float)
    return expm(times[:, None, None] * to_float(c.A)[None]) @ to_float(v)


def check_cocycle_identity(c: CocycleSpec, pairs, tol: float = 1e-10,
                           evaluator: Callable | None = None) -> Report:
    """max |gamma_{t+s} - gamma_t - e^{tA} gamma_s| over the size of its terms.

    The last term is sized as |e^{tA}| |gamma_s|, its forward-error scale.

    ``evaluator(c, t)`` overrides :func:`cocycle_eval` (fault injection).
    """
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    t, s = pairs[:, 0], pairs[:, 1]
    if evaluator is None:
        pieces = graded_pieces(c)
        g_ts, g_t, g_s = (cocycle_eval_many(c, x, pieces) for x in (t + s, t, s))
    else:
        g_ts, g_t, g_s = (np.array([to_float(evaluator(c, x)) for x in xs]) for xs in (t + s, t, s))
    eA = expm(t[:, None, None] * to_float(c.A)[None])
    prop = np.einsum("kij,kj->ki", eA, g_s)
    size = lambda v: np.linalg.norm(v, axis=1)
    # e^{tA} gamma_s carries the rounding of gamma_s amplified by |e^{tA}|
    scale = np.maximum.reduce([np.ones(len(t)), size(g_ts), size(g_t),
                               np.linalg.norm(eA, 2, axis=(1, 2)) * size(g_s)])
    worst = float((size(g_ts - g_t - prop) / scale).max()) if len(t) else 0.0
    rep = Report("cocycle_identity")
    rep.add("cocycle_identity", worst, tol, note=f"{len(t)} pairs")
    return rep


GROWTH_RATIO = 1.5


def _bounded(values: np.ndarray, bound: float) -> bool:
    if not np.all(np.isfinite(values)) or values.max() > bound:
        return False
    if len(values) < 2 or values[-1] <= 1e-300:
        return True
    return bool(values[-1] <= GROWTH_RATIO * max(values[-2], 1e-300))


def _split_paths(c: CocycleSpec, times) -> tuple[np.ndarray, np.ndarray]:
    """gamma_t split as (V- part, V+0 part); gamma is linear in b."""
    pieces = graded_pieces(c)
    minus = [p for p in pieces if p[0] is not None and p[0] < 0]
    rest = [p for p in pieces if not (p[0] is not None and p[0] < 0)]
    times = np.asarray(times, dtype=float)
    return cocycle_eval_many(c, times, minus), cocycle_eval_many(c, times, rest)


def lemma_gamma_harness(c: CocycleSpec, t_max: float = 100.0, bound: float = 1e3,
                        tol: float = 1e-9, samples: int = 2001) -> Report:
    """Check the implication: bounded along t_k = 2^k  =>  gamma in V-  =>  bounded on [0, t_max].

    Facts are reported separately in ``data``; the check ``lemma`` fails only
    if the premise holds and a conclusion does not.  The horizon is finite,
    so a sequence counts as bounded when it stays below ``bound`` and its
    last doubling step grows by at most ``GROWTH_RATIO`` (polynomial growth
    t^p doubles by 2^p, so A = 0 is caught even when t_max * |b| < bound).
    """
    t = jordan_decompose(c.A)
    E = to_float(t.E)
    if np.linalg.norm(E) > 1e-9 * max(1.0, norm(c.A)):
        raise EllipticPartError("generator has a nonzero elliptic part")
    g = hyperbolic_grading(t.H)
    seq = np.array([2.0 ** k for k in range(0, int(np.floor(np.log2(t_max))) + 1)])
    grid = np.linspace(0.0, t_max, samples)
    with np.errstate(over="ignore", invalid="ignore"):
        m_seq, p_seq = _split_paths(c, seq)
        m_path, p_path = _split_paths(c, grid)
        along = np.linalg.norm(m_seq + p_seq, axis=1)
        sizes = np.linalg.norm(m_path + p_path, axis=1)
    # distance to V-: the V- part lies in V- by construction, so only the
    # V+0 part can leave it
    probe = p_path[:: max(1, samples // 200)]
    if np.all(np.isfinite(probe)):
        dist = max((g.minus.distance(p + q) for p, q in zip(probe, m_path[:: max(1, samples // 200)])),
                   default=0.0)
    else:
        dist = np.inf
    bounded_seq = _bounded(along, bound)
    in_minus = dist <= tol
    bounded_all = bool(np.all(np.isfinite(sizes)) and sizes.max() <= bound)

    rep = Report("lemma_gamma")
    rep.data.update({
        "bounded_along_sequence": bounded_seq,
        "sequence_sup": float(along.max()),
        "distance_to_minus": float(dist),
        "in_minus": in_minus,
        "bounded_forward": bounded_all,
        "forward_sup": float(sizes.max()),
        "horizon": t_max,
    })
    holds = (not bounded_seq) or (in_minus and bounded_all)
    rep.add("lemma", 0.0 if holds else 1.0, 0.0,
            note=f"seq_bounded={bounded_seq} dist_minus={dist:.3e} forward_bounded={bounded_all}")
    return rep
