"""Command-line front end.

    intertwining verify [--dim 12 --q 0.5 --seed 42 ...]
    intertwining model {oscillator,quon,pseudoboson} [...]
    intertwining partner --theta1 A.json --x X.json [...]

Exit codes: 0 when every check passes, 1 when at least one fails, 2 for
bad input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import instances as ins
from . import intertwine as it
from . import linalg as la
from . import models as md
from . import riesz as rz
from .errors import CommutatorTooLarge, DegenerateNu, IntertwiningError, MatrixFormatError
from .linalg import Tolerances

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
MODEL_NAMES = ("oscillator", "quon", "pseudoboson")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    dim: int = 12
    q: float = 0.5
    seed: int = 42
    tol: Tolerances = Tolerances()
    format: str = "json"
    out: str | None = None
    model: str | None = None
    theta1_path: str | None = None
    x_path: str | None = None
    export: str | None = None

    def validate(self):
        if self.dim < md.MIN_DIM:
            raise ConfigError(f"--dim must be >= {md.MIN_DIM}")
        if not (0.0 <= self.q <= 1.0):
            raise ConfigError("--q must lie in [0, 1]")
        if self.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if self.tol.guard >= self.dim:
            raise ConfigError("--guard must be smaller than --dim")
        if self.subcommand == "model" and self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODEL_NAMES)}")
        if self.subcommand in ("verify", "model") and self.dim > md.MAX_PSEUDOBOSON_DIM:
            raise ConfigError(f"--dim is capped at {md.MAX_PSEUDOBOSON_DIM}")


# -- report assembly -------------------------------------------------------

class Report:
    """Ordered report; each check is recorded once with its value, threshold and verdict."""

    def __init__(self, model, parameters):
        self.data = {"model": model, "parameters": parameters}
        self.checks = {}

    def __setitem__(self, key, value):
        self.data[key] = value

    def check(self, name, value, threshold):
        if name in self.checks:
            raise KeyError(f"check {name!r} recorded twice")
        value = float(value)
        self.checks[name] = {"value": value, "threshold": float(threshold), "passed": bool(value <= threshold)}

    def flag(self, name, ok):
        """Boolean check: recorded as 0 (holds) or 1 (fails) against a zero threshold."""
        self.check(name, 0.0 if ok else 1.0, 0.0)

    def add(self, prefix, report, threshold=None):
        thr = report.threshold if threshold is None else threshold
        for key, value in report.residuals.items():
            self.check(f"{prefix}.{key}", value, thr)

    def skip(self, prefix, reason):
        self.data.setdefault("skipped", []).append(f"{prefix}: {reason}")

    def error(self, prefix, exc):
        self.flag(f"{prefix}.error", False)
        self.data.setdefault("errors", {})[prefix] = f"{type(exc).__name__}: {exc}"

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values())

    def failures(self):
        return [k for k, c in self.checks.items() if not c["passed"]]

    def as_dict(self):
        out = dict(self.data)
        out["checks"] = self.checks
        out["failed"] = self.failures()
        out["verdict"] = "pass" if self.passed else "fail"
        return out


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj, indent=2) -> str:
    """JSON with every float written to 17 significant digits (non-finite -> null)."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None:
            return "null"
        if o is True:
            return "true"
        if o is False:
            return "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return format(o, ".17g") if math.isfinite(o) else "null"
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (list, dict)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = (pad + json.dumps(k) + ": " + enc(v, level + 1) for k, v in o.items())
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(_plain(obj), 0) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "value", "threshold", "verdict"])
    for name, c in report["checks"].items():
        w.writerow([name, format(c["value"], ".17g"), format(c["threshold"], ".17g"),
                    "pass" if c["passed"] else "fail"])
    return buf.getvalue()


def write_atomic(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(cfg: RunConfig, report: dict):
    text = dumps(report) if cfg.format == "json" else to_csv(report)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)


def _params(cfg):
    t = cfg.tol
    return {
        "dim": cfg.dim, "q": cfg.q, "seed": cfg.seed, "guard": t.guard,
        "rank_tol": t.rank_tol, "commute_tol": t.commute_tol, "residual_tol": t.residual_tol,
    }


# -- shared sections -------------------------------------------------------

def partner_section(rep: Report, prefix: str, theta1, x, tol: Tolerances, fam1=None):
    """Build the pair for (theta1, x) and record intertwining, spectrum and hermiticity checks."""
    pair = it.build_partners(theta1, x, tol)
    fam1 = it.eigenfamily(theta1, tol) if fam1 is None else fam1
    fam2 = it.map_eigenfamily(x, fam1, tol)
    inclusion = it.spectral_inclusion_check(pair, fam2, tol)
    rep.check(f"{prefix}.commutator_n1_theta1", pair.diagnostics["commutator_n1_theta1"], tol.commute_tol)
    rep.add(f"{prefix}", it.verify_intertwining(pair, tol))
    rep.add(f"{prefix}", inclusion)
    if la.is_invertible(pair.n2, tol):
        sa = it.selfadjointness_equivalence(pair, tol)
        rep.flag(f"{prefix}.selfadjointness_equivalence", sa.passed)
    comp = it.completeness_check(fam2, pair.dim, tol, n2=pair.n2)
    rep.flag(f"{prefix}.completeness_matches_n2", comp.consistent)
    rep[prefix] = {
        "mode": pair.mode,
        "eigenvalues_theta1": np.sort_complex(np.linalg.eigvals(pair.theta1)),
        "eigenvalues_theta2": np.sort_complex(np.linalg.eigvals(pair.theta2)),
        "matched_pairs": [[n, e, s] for n, e, s in inclusion.details["pairs"]],
        "nu": fam2.nu,
        "I2": list(fam2.indices),
        "dropped": list(fam2.dropped),
        "f2_rank": comp.rank,
        "n2_invertible": comp.n2_invertible,
        "theta2": la.matrix_to_dict(pair.theta2),
    }
    return pair, fam2


def _ladder_section(rep, name, sys_, tol, directions):
    fam1 = sys_.family()
    rep.add(f"{name}.invariants", md.ladder_invariants(sys_, tol))
    kr = it.kernel_equivalence_check(sys_.raise_, fam1, tol)
    rep.flag(f"{name}.kernel_equivalence", kr.consistent)
    rep[f"{name}.kernel_sets"] = {"ker_xdag": kr.ker_xdag, "ker_n1": kr.ker_n1, "ker_x_phi2": kr.ker_x_phi2}
    k = tol.block(sys_.dim)
    for direction in directions:
        prefix = f"{name}.{direction}"
        exp = md.ladder_partner_expectations(sys_, direction, tol)
        rep.add(prefix, exp)
        x = sys_.raise_ if direction == md.RAISE else sys_.lower
        pair, fam2 = partner_section(rep, f"{prefix}.partner", sys_.h1, x, tol, fam1=fam1)
        rep.add(f"{prefix}.transport", it.transport_check(pair, fam2, tol, block=k))
        if direction == md.RAISE:
            try:
                rep.add(f"{prefix}.corollary", it.corollary_n2_decomposition(fam2, pair.n2, tol, block=k))
            except DegenerateNu as exc:
                rep.skip(f"{prefix}.corollary", exc)
            except IntertwiningError as exc:
                rep.error(f"{prefix}.corollary", exc)
            try:
                rep.add(f"{prefix}.commutation", it.verify_commutation_suite(pair, tol, block=k))
            except IntertwiningError as exc:
                rep.error(f"{prefix}.commutation", exc)


def _pseudoboson_section(rep, d, rng, tol):
    t = ins.random_invertible(d, rng, max_cond=10.0)
    pb = md.make_pseudoboson(t, tol)
    rep.add("pseudoboson", md.pseudoboson_verify(pb, tol))
    s_inv = la.inverse(pb.s, tol)
    n1 = s_inv @ s_inv
    hyp = la.relative(la.commutator(pb.theta1, n1), la.opnorm(pb.theta1) * la.opnorm(n1))
    # a generic S must break the no-go hypothesis, otherwise the model is trivial
    rep.flag("pseudoboson.nogo_hypothesis_broken", hyp > tol.commute_tol)
    try:
        _, eps = rz.riesz_from_pseudohermitian(pb.theta1, la.sqrt_positive(pb.s, tol), tol)
        k = tol.block(d)
        rep.check("pseudoboson.recovered_spectrum",
                  float(np.max(np.abs(np.sort(eps)[:k] - np.arange(k)))) / d, tol.residual_tol)
    except IntertwiningError as exc:
        rep.error("pseudoboson.recovered_spectrum", exc)
    # x = S breaks [N1, theta1] = 0, so only x theta2 = theta1 x is expected to hold
    pair = it.build_partners(pb.theta1, pb.s, tol, allow_noncommuting=True)
    rep.check("pseudoboson.s_intertwines", it.verify_intertwining(pair, tol).residuals["intertwine_left"],
              tol.residual_tol)
    rep["pseudoboson"] = {
        "frame_bounds": list(pb.basis.bounds),
        "condition_number": pb.basis.condition_number,
        "eigenvalues_theta1": np.sort(np.real(np.linalg.eigvals(pb.theta1))),
        "nogo_hypothesis_defect": hyp,
    }
    return pb


def run_verify(cfg: RunConfig):
    tol = cfg.tol
    d = cfg.dim
    rng = ins.make_rng(cfg.seed)
    rep = Report("verify", _params(cfg))
    rep["generator"] = ins.GENERATOR_NAME

    _ladder_section(rep, "oscillator", md.make_oscillator(d), tol, (md.RAISE, md.LOWER))
    quon = md.make_quon(d, cfg.q)
    directions = (md.RAISE, md.LOWER) if cfg.q > tol.rank_tol else (md.RAISE,)
    if len(directions) == 1:
        rep.skip("quon.lower", "q = 0 makes (h1 - 1)/q undefined")
    _ladder_section(rep, "quon", quon, tol, directions)

    sections = [
        ("pseudoboson", lambda: _pseudoboson_section(rep, d, rng, tol)),
        ("riesz", lambda: _riesz_section(rep, d, rng, tol)),
        ("kernels", lambda: _kernel_section(rep, d, rng, tol)),
        ("hermiticity", lambda: _hermiticity_section(rep, d, rng, tol)),
        ("nogo", lambda: _nogo_section(rep, d, rng, tol)),
    ]
    for name, fn in sections:
        try:
            fn()
        except IntertwiningError as exc:
            rep.error(name, exc)
    return rep


def _riesz_section(rep, d, rng, tol):
    basis = rz.build_riesz(ins.random_invertible(d, rng, 50.0), tol)
    dual = rz.dual_basis(basis, tol)
    rep.add("riesz.resolution", rz.resolution_identity_check(basis, dual, tol))
    rep.add("riesz.frame", rz.frame_inequality_check(basis, 200, tol, rng))
    s_inv = basis.frame_inverse(tol)
    for label, x in (("inverse_frame", s_inv), ("identity", np.eye(d)), ("twice_inverse_frame", 2 * s_inv)):
        bc = rz.biorthogonal_criterion(basis, x, tol)
        rep.flag(f"riesz.biorthogonal_criterion.{label}", bc.equivalent)
    bc = rz.biorthogonal_criterion(basis, s_inv, tol)
    rep.flag("riesz.biorthogonal_criterion.inverse_frame_holds", bc.x_is_inverse_frame and bc.transported_biorthogonal)
    back = dual.as_riesz(tol).dual(tol)
    rep.check("riesz.dual_involution", la.relative(back.vectors - basis.vectors, la.opnorm(basis.vectors)), tol.residual_tol)
    rep["riesz"] = {"frame_bounds": list(basis.bounds), "condition_number": basis.condition_number}


def _kernel_section(rep, d, rng, tol):
    inst = ins.prescribed_kernel_instance(d, rng)
    kr = it.kernel_equivalence_check(inst.x, inst.family, tol)
    rep.flag("kernels.kernel_sets_coincide", kr.consistent)
    rep.flag("kernels.kernel_matches_prescription", kr.ker_xdag == inst.kernel)
    rep["kernels"] = {"prescribed": inst.kernel, "ker_xdag": kr.ker_xdag}


def _hermiticity_section(rep, d, rng, tol):
    for label, herm in (("hermitian", True), ("nonhermitian", False)):
        inst = ins.commuting_instance(d, rng, hermitian=herm)
        pair = it.build_partners(inst.theta1, inst.x, tol)
        sa = it.selfadjointness_equivalence(pair, tol)
        rep.flag(f"hermiticity.{label}.verdicts_agree", sa.passed)
        rep.add(f"hermiticity.{label}.commutation", it.verify_commutation_suite(pair, tol))
        fam1 = it.with_nu(inst.x, it.eigenfamily(inst.theta1, tol), tol)
        fam2 = it.map_eigenfamily(inst.x, fam1, tol)
        rep.add(f"hermiticity.{label}", it.spectral_inclusion_check(pair, fam2, tol))
        rep.add(f"hermiticity.{label}.transport", it.transport_check(pair, fam2, tol))
        rep.add(f"hermiticity.{label}.normality", it.normality_check(pair, fam1, tol))
        beta, _ = it.theta2_beta(inst.theta1, inst.x, tol)
        rep.check(f"hermiticity.{label}.alpha_equals_beta",
                  la.relative(pair.theta2 - beta, la.opnorm(pair.theta2)), tol.residual_tol)


def _nogo_section(rep, d, rng, tol):
    inst = ins.nogo_instance(d, rng)
    rep.add("nogo", rz.nogo_check(rz.build_riesz(inst.t, tol), inst.theta1, tol))


# -- model -----------------------------------------------------------------

def run_model(cfg: RunConfig):
    tol = cfg.tol
    d = cfg.dim
    params = _params(cfg)
    rep = Report(cfg.model, params)
    exports = {}
    if cfg.model in ("oscillator", "quon"):
        sys_ = md.make_oscillator(d) if cfg.model == "oscillator" else md.make_quon(d, cfg.q)
        eps = np.linalg.eigvalsh(sys_.h1)
        n = np.arange(d)
        closed = n.astype(float) if sys_.q == 1.0 else (1 - sys_.q**n) / (1 - sys_.q)
        rep["eigenvalues_h1"] = eps
        rep["closed_form_eps"] = closed
        rep.check("h1_spectrum_closed_form", float(np.max(np.abs(eps - closed))) / max(1.0, closed.max()),
                  tol.residual_tol)
        fam1 = sys_.family()
        nu = it.nu_values(sys_.raise_, fam1)
        rep["nu_raise"] = nu
        kr = it.kernel_equivalence_check(sys_.raise_, fam1, tol)
        rep["kernel_sets"] = {"ker_xdag": kr.ker_xdag, "ker_n1": kr.ker_n1, "ker_x_phi2": kr.ker_x_phi2}
        rep.flag("kernel_equivalence", kr.consistent)
        partner_section(rep, "partner", sys_.h1, sys_.raise_, tol)
        rep.add("closed_form.raise", md.ladder_partner_expectations(sys_, md.RAISE, tol))
        if sys_.q > tol.rank_tol:
            rep.add("closed_form.lower", md.ladder_partner_expectations(sys_, md.LOWER, tol))
        exports = {"h1": sys_.h1, "raise": sys_.raise_, "lower": sys_.lower}
    else:
        rng = ins.make_rng(cfg.seed)
        rep["generator"] = ins.GENERATOR_NAME
        t = ins.random_invertible(d, rng, max_cond=10.0)
        pb = md.make_pseudoboson(t, tol)
        rep.add("pseudoboson", md.pseudoboson_verify(pb, tol))
        rep["frame_bounds"] = list(pb.basis.bounds)
        rep["condition_number"] = pb.basis.condition_number
        rep["eigenvalues_theta1"] = np.sort_complex(np.linalg.eigvals(pb.theta1))
        rep["eigenvalues_theta2"] = np.sort_complex(np.linalg.eigvals(pb.theta2))
        cert = rz.pseudo_hermiticity_check(pb.theta1, la.inverse(pb.s, tol), tol)
        rep["certificate"] = cert.to_dict(pb.basis)
        exports = pb.matrices()
    if cfg.export:
        out = Path(cfg.export)
        out.mkdir(parents=True, exist_ok=True)
        for name, m in exports.items():
            write_atomic(out / f"{name}.json", dumps(la.matrix_to_dict(m)))
    return rep


# -- partner ---------------------------------------------------------------

def _load_matrix(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return la.matrix_from_json(text)


def run_partner(cfg: RunConfig):
    tol = cfg.tol
    theta1 = _load_matrix(cfg.theta1_path)
    x = _load_matrix(cfg.x_path)
    if theta1.shape != x.shape:
        raise ConfigError(f"theta1 is {theta1.shape[0]}-dimensional but x is {x.shape[0]}-dimensional")
    params = _params(cfg)
    params["dim"] = theta1.shape[0]
    params["theta1"] = str(cfg.theta1_path)
    params["x"] = str(cfg.x_path)
    rep = Report("partner", params)
    try:
        partner_section(rep, "partner", theta1, x, tol)
    except CommutatorTooLarge as exc:
        rep.check("partner.commutator_n1_theta1", exc.defect, tol.commute_tol)
        rep.data.setdefault("errors", {})["partner"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
    except IntertwiningError as exc:
        rep.error("partner", exc)
    return rep


# -- argument parsing ------------------------------------------------------

def _common(p):
    p.add_argument("--dim", type=int, default=12, help="truncation dimension d (default 12)")
    p.add_argument("--q", type=float, default=0.5, help="quon deformation parameter in [0, 1] (default 0.5)")
    p.add_argument("--seed", type=int, default=42, help="seed of the Philox generator (default 42)")
    p.add_argument("--tol-rank", type=float, default=Tolerances.rank_tol)
    p.add_argument("--tol-residual", type=float, default=Tolerances.residual_tol)
    p.add_argument("--tol-commute", type=float, default=Tolerances.commute_tol)
    p.add_argument("--guard", type=int, default=Tolerances.guard)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH", default=None, help="write the report here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="intertwining", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("verify", help="run the full invariant suite")
    _common(p)
    p = sub.add_parser("model", help="report on one of the built-in models")
    p.add_argument("name", help="oscillator, quon or pseudoboson")
    p.add_argument("--export", metavar="DIR", default=None, help="also write the model matrices as JSON")
    _common(p)
    p = sub.add_parser("partner", help="build the partner of user-supplied matrices")
    p.add_argument("--theta1", required=True, metavar="FILE")
    p.add_argument("--x", required=True, metavar="FILE")
    _common(p)
    return parser


def config_from_args(args) -> RunConfig:
    try:
        tol = Tolerances(args.tol_rank, args.tol_commute, args.tol_residual, args.guard)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        subcommand=args.subcommand,
        dim=args.dim,
        q=args.q,
        seed=args.seed,
        tol=tol,
        format=args.format,
        out=args.out,
        model=getattr(args, "name", None),
        theta1_path=getattr(args, "theta1", None),
        x_path=getattr(args, "x", None),
        export=getattr(args, "export", None),
    )


RUNNERS = {"verify": run_verify, "model": run_model, "partner": run_partner}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        cfg = config_from_args(args)
        if cfg.subcommand != "partner":
            cfg.validate()
        else:
            if cfg.tol.guard <= 0:
                raise ConfigError("--guard must be positive")
        rep = RUNNERS[cfg.subcommand](cfg)
    except (ConfigError, MatrixFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    result = rep.as_dict()
    emit(cfg, result)
    if not rep.passed:
        print("failed checks: " + ", ".join(rep.failures()), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
