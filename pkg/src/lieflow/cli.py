"""Command-line front end.

Every command reads one input document (``--input``), runs the matching
checks and prints a report.  Exit status: 0 all checks pass, 1 some check
failed, 2 the input could not be used.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Callable

import numpy as np

from . import cocycle as cc
from . import grading as gr
from . import group_models as gm
from . import isometry as iso
from .algebra import StructureError
from .io import Document, DocumentError, bundled_names, load_document, matrix_doc
from .jordan import JordanError, NotDerivationError, derivation_parts, jordan_decompose
from .linalg import DimensionError, Subspace, to_float
from .report import Report

INPUT_ERRORS = (DocumentError, DimensionError, StructureError, gm.ModelError, NotDerivationError)


class UsageError(ValueError):
    pass


def _generator(doc: Document):
    """The map a command acts on: a bare matrix or the document's derivation."""
    if doc.derivation is not None:
        return doc.derivation
    if doc.matrix is not None:
        return doc.matrix
    raise UsageError("document has no matrix or derivation")


def _parts_data(t) -> dict:
    return {name: matrix_doc(M)["entries"] for name, M in zip("EHN", (t.E, t.H, t.N))}


def cmd_jordan(doc: Document, args) -> Report:
    A = _generator(doc)
    if doc.algebra is not None and doc.derivation is not None:
        t = derivation_parts(doc.algebra, A, args.tol)
    else:
        t = jordan_decompose(A, args.tol)
    rep = Report("jordan")
    rep.extend(t.certificates)
    rep.data.update({"method": t.method, "parts": _parts_data(t)})
    return rep


def cmd_grade(doc: Document, args) -> Report:
    A = _generator(doc)
    t = jordan_decompose(A, args.tol)
    g = gr.hyperbolic_grading(t.H, args.tol)
    n = A.shape[0]
    rep = Report("grade")
    rep.add("dims_sum", float(abs(sum(g.dims()) - n)), 0.0, note=f"dims (+,0,-) = {g.dims()}")
    if doc.algebra is not None and doc.derivation is not None:
        rep.extend(gr.check_bracket_grading(doc.algebra, g, args.tol))
        rep.extend(gr.check_nilpotent_subalgebras(doc.algebra, g, args.tol))
    else:
        nonzero = [abs(float(v)) for v in g.eigenvalues if v != 0]
        if nonzero:
            t0 = 20.0 / min(nonzero)
            rep.extend(gr.check_growth_bounds(A, g, t0, np.linspace(t0, 2 * t0, 25)))
    rep.data.update({"eigenvalues": [str(v) for v in g.eigenvalues], "dims": list(g.dims())})
    return rep


def _model_and_derivation(doc: Document):
    if doc.model is not None:
        if isinstance(doc.model, gm.Torus2):
            raise UsageError("the torus model has discrete time only; use the catmap command")
        if doc.derivation is None:
            raise UsageError("model document needs a 'derivation'")
        return doc.model, doc.derivation
    if doc.matrix is not None:
        return gm.EuclideanAbelian(doc.matrix.shape[0]), doc.matrix
    raise UsageError("recurrence needs a model document or a matrix")


def cmd_recurrent(doc: Document, args) -> Report:
    m, D = _model_and_derivation(doc)
    rep = Report("recurrent")
    cert = gm.recurrent_set_certificate(m, D, n_samples=args.samples, eps=args.eps, t_max=args.tmax,
                                        tol=args.tol)
    rep.extend(cert)
    rep.extend(gm.fix_intersection_certificate(m, D, tol=args.tol), "fix_")
    rep.data.update(cert.data)
    return rep


def cmd_flow(doc: Document, args) -> Report:
    m, D = _model_and_derivation(doc)
    rep = Report("flow")
    rep.extend(gm.automorphism_check(m, D, samples=args.samples))
    rep.extend(gm.ad_conjugation_identity(m, D, samples=args.samples))
    if isinstance(m, gm.SemidirectRxR2):
        if not (m.lam * m.lam + m.mu * m.mu):
            raise gm.ModelError("semidirect formulas need lambda^2 + mu^2 != 0")
        rep.extend(gm.semidirect_ode_check(m, samples=10))
        pts = gm.fixed_set_semidirect(m, np.linspace(-np.pi, np.pi, 25))
        worst = max(float(np.linalg.norm(gm.semidirect_vector_field(m, np.concatenate([[t], v]))))
                    for t, v in pts)
        rep.add("fixed_set_residual", worst, 1e-12)
    return rep


def cmd_cocycle(doc: Document, args) -> Report:
    if doc.cocycle is None:
        raise UsageError("cocycle command needs a document with 'A' and 'b'")
    c = doc.cocycle
    rng = np.random.default_rng(0)
    pairs = rng.uniform(-20, 20, size=(args.samples * 10, 2))
    rep = Report("cocycle")
    rep.extend(cc.check_cocycle_identity(c, [tuple(p) for p in pairs], args.tol))
    try:
        lemma = cc.lemma_gamma_harness(c, t_max=args.tmax)
    except cc.EllipticPartError:
        rep.data["lemma"] = "skipped: A has an elliptic part"
    else:
        rep.extend(lemma)
        rep.data.update(lemma.data)
    return rep


def cmd_catmap(doc: Document | None, args) -> Report:
    m = doc.model if doc is not None and doc.model is not None else gm.Torus2()
    if not isinstance(m, gm.Torus2):
        raise UsageError("catmap command needs a torus2 model document")
    rep = Report("catmap")
    scan = gm.catmap_discrete_counterexample(m, args.qmax)
    rep.extend(scan)
    rep.data.update(scan.data)
    if m.M == ((1, 1), (1, 2)):
        rep.extend(gm.catmap_generator_check(), "generator_")
    return rep


def cmd_isometry(doc: Document, args) -> Report:
    rep = Report("isometry")
    if doc.model is not None:
        # the elliptic part is always isometric for its invariant inner product
        m, D = _model_and_derivation(doc)
        if not isinstance(m, (gm.HeisenbergExp, gm.EuclideanAbelian)):
            raise UsageError("arc-length checks need an exponential chart (heisenberg or abelian)")
        t = derivation_parts(m.algebra, D, args.tol)
        G = gr.elliptic_invariant_inner_product(t.E)
        whole = Subspace.whole(m.dim)
        rep.extend(iso.skew_on_delta(to_float(t.E), whole, G, args.tol), "E_")
        curve = iso.circle_curve(10_000, dim=m.dim)
        drifts = {}
        for s in (0.5, 1.0, 3.0):
            rep.extend(iso.arc_length_preservation(m, to_float(t.E), G, curve, s), f"E_t={s:g}_")
            drifts[str(s)] = iso.arc_length_preservation(m, D, G, curve, s).data["relative_drift"]
        full = iso.skew_on_delta(D, whole, G, args.tol)
        rep.data.update({"derivation_skew": full.passed, "derivation_length_drift": drifts})
        return rep
    alg = doc.algebra
    if alg is None or doc.theta is None:
        raise UsageError("isometry needs an algebra document with 'theta' (and optional 'delta')")
    cartan = iso.cartan_data(alg, doc.theta)
    rep.extend(cartan.checks, "theta_")
    rep.extend(iso.killing_adjoint_identity(alg, cartan, samples=args.samples))
    delta = doc.delta if doc.delta is not None else Subspace.whole(alg.dim, alg.exact)
    rep.extend(iso.bracket_generating_check(alg, delta))
    res, cert = iso.automorphic_isometry_certificate(alg, cartan, delta)
    rep.extend(cert)
    rep.data.update({"automorphic_isometry_dim": res.dim, "basis": cert.data["basis"]})
    if doc.derivation is not None:
        rep.extend(iso.skew_on_delta(doc.derivation, delta, cartan.inner, args.tol), "derivation_")
        rep.extend(iso.theta_commutation_propagation(alg, doc.theta, doc.derivation, delta, args.tol))
    return rep


COMMANDS: dict[str, Callable] = {
    "jordan": cmd_jordan,
    "grade": cmd_grade,
    "recurrent": cmd_recurrent,
    "flow": cmd_flow,
    "cocycle": cmd_cocycle,
    "catmap": cmd_catmap,
    "isometry": cmd_isometry,
}


def applicable(doc: Document) -> list[str]:
    """Commands that make sense for a document, in a fixed order."""
    if doc.kind == "matrix":
        return ["jordan", "grade"]
    if doc.kind == "cocycle":
        return ["jordan", "cocycle"]
    if doc.kind == "algebra":
        out = ["jordan", "grade"] if doc.derivation is not None else []
        return out + (["isometry"] if doc.theta is not None else [])
    if isinstance(doc.model, gm.Torus2):
        return ["catmap"]
    out = ["jordan", "grade", "recurrent", "flow"]
    if isinstance(doc.model, (gm.HeisenbergExp, gm.EuclideanAbelian)):
        out.append("isometry")
    return out


def cmd_verify(doc: Document, args) -> Report:
    rep = Report("verify")
    for name in applicable(doc):
        sub = COMMANDS[name](doc, args)
        rep.extend(sub, f"{name}.")
    return rep


COMMANDS["verify"] = cmd_verify


def _run(command: str, doc: Document | None, args) -> Report:
    start = time.perf_counter()
    rep = COMMANDS[command](doc, args)
    rep.command = command
    rep.input_digest = doc.digest if doc is not None else ""
    rep.wall_time = time.perf_counter() - start
    return rep


def _emit(rep: Report, doc: Document | None, fmt: str, out) -> None:
    if fmt == "json":
        d = rep.to_dict()
        if doc is not None:
            d["source"] = doc.source
        out.write(json.dumps(d, indent=2) + "\n")
        return
    if doc is not None:
        out.write(f"# input {doc.source} sha256={doc.digest}\n")
    parts = rep.data.get("parts")
    if parts:
        for name, rows in parts.items():
            out.write(f"{name} =\n")
            for row in rows:
                out.write("  [" + ", ".join(row) + "]\n")
    out.write(rep.to_text() + "\n")
    out.write(f"# wall_time {rep.wall_time:.3f}s\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lieflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ["jordan", "grade", "recurrent", "flow", "cocycle", "catmap", "isometry", "verify"]:
        s = sub.add_parser(name)
        s.add_argument("--input", help="document path, or the name of a bundled model")
        s.add_argument("--mode", choices=["exact", "float"], help="override the document's scalar mode")
        s.add_argument("--tol", type=float, default=1e-10)
        s.add_argument("--tmax", type=float, default=100.0)
        s.add_argument("--eps", type=float, default=1e-6)
        s.add_argument("--format", choices=["text", "json"], default="text")
        s.add_argument("--samples", type=int, default=100, help="random samples per check")
        s.add_argument("--qmax", type=int, default=50, help="largest denominator for catmap")
    sub.choices["verify"].description = "run every applicable check; without --input, on all bundled models"
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "verify" and not args.input:
            docs = [load_document(name, args.mode) for name in bundled_names()]
        elif args.input:
            docs = [load_document(args.input, args.mode)]
        elif args.command == "catmap":
            docs = [None]
        else:
            raise UsageError("--input is required")
        reports = []
        for doc in docs:
            reports.append((_run(args.command, doc, args), doc))
    except INPUT_ERRORS + (UsageError,) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except JordanError as exc:
        rep = Report(args.command)
        rep.add("decomposition", float("inf"), args.tol, note=str(exc))
        reports = [(rep, None)]
    for rep, doc in reports:
        _emit(rep, doc, args.format, out)
    return 0 if all(r.passed for r, _ in reports) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
