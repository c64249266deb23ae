"""Command-line front end: parse a system document, run the pipeline, write a JSON report.

Documents are TOML::

    [system]
    name = "heisenberg"
    phase = ["x1", "x2", "x3"]
    families = ["h1", "h2"]        # optional, one per [[char_field]]
    jet_order = 1                  # optional

    [ext_vars]
    u = "exp(-Y)"

    [drift]
    x3 = "x1"

    [[char_field]]
    x1 = "1"

    [constraints]
    T = ["x3 - x1*x2"]
    regularize = { "p_X^2" = "p_X" }

Alternatives to [drift]/[[char_field]]: a [pfaffian] section (``theta`` rows
and ``rhs``, or ``equations`` with ``unknowns`` chains) or a [hamiltonian]
section (``H`` and ``poisson = [[xi, xj, coeff], ...]``, primaries from
[constraints]).  ``verify`` also reads [[generator]] and [weak_poisson].
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .algebra import ExtVar, VarRegistry, poly_literal, to_literal
from .errors import ConsistencyError, GaugeNFError, ParseError, RegularityError, StageOverflow
from .gauge import GaugeGenerator, check_prop2, gauge_distribution, verify_symmetry
from .geometry import PolyVector, VectorField
from .involutive import (
    Observable,
    check_involution,
    involutive_form,
    observable_catalog,
    verify_weak_poisson,
)
from .oracle import (
    SplineSampler,
    constraint_drift_check,
    corrupt_generator,
    gauge_residual_scaling,
    integrate,
    observable_causality_check,
    project_to_surface,
)
from .reduction import PfaffianSpec, SystemSpec, depress, from_hamiltonian, pfaffian_to_primary
from .stabilization import abnormal_branch, branch_points, minor_polynomial, stabilize

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_FAIL, EXIT_CONSISTENCY, EXIT_REGULARITY = 0, 1, 2, 3
COMMANDS = ("analyze", "gauge", "verify", "simulate", "branch")


@dataclass
class RunConfig:
    input: str
    command: str = "analyze"
    max_stage: int | None = None
    branch: str | None = None
    numeric: bool = False
    seed: int = 0
    h: float = 1e-3
    horizon: float = 1.0
    report: str | None = None
    text: str | None = None  # document contents, when already read

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.max_stage is not None and self.max_stage <= 0:
            raise ValueError("max_stage must be positive")
        if self.h <= 0 or self.horizon <= 0:
            raise ValueError("step size and horizon must be positive")

    def read(self):
        if self.text is None:
            if self.input == "-":
                self.text = sys.stdin.read()
            else:
                with open(self.input, encoding="utf-8") as fh:
                    self.text = fh.read()
        return self.text


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


@dataclass
class Document:
    spec: object  # SystemSpec or PfaffianSpec
    name: str = ""
    regularize: dict | None = None
    poisson: PolyVector | None = None
    generators: list = field(default_factory=list)  # raw [[generator]] tables
    weak_poisson: list | None = None
    numeric: dict = field(default_factory=dict)
    text: str = ""


class _Locator:
    """Maps errors inside a literal back to the document position."""

    def __init__(self, text):
        self.lines = text.splitlines()

    def fail(self, exc, literal):
        col_in = getattr(exc, "column", None) or 1
        msg = str(exc).split(" (line ")[0]
        for i, line in enumerate(self.lines):
            for quote in ('"', "'"):
                j = line.find(quote + literal + quote)
                if j >= 0:
                    raise ParseError(msg, i + 1, j + 1 + col_in) from None
        raise ParseError(msg) from None


def _toml(text):
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        if m:
            line, col = int(m.group(1)), int(m.group(2))
        else:  # reported at end of document
            lines = text.splitlines() or [""]
            line, col = len(lines), len(lines[-1]) + 1
        raise ParseError("syntax error: " + str(exc).split(" (at ")[0], line, col) from None


def _strings(value, what):
    if isinstance(value, str):
        return [value]
    if not isinstance(value, list) or not all(isinstance(v, (str, int)) for v in value):
        raise ParseError(f"{what} must be a list of polynomial literals")
    return [str(v) for v in value]


def _ext_vars(doc):
    out = []
    for name, val in doc.get("ext_vars", {}).items():
        m = re.fullmatch(r"\s*exp\((.*)\)\s*", str(val))
        if not m:
            raise ParseError(f"ext var {name!r} must read exp(<poly>), got {val!r}")
        out.append(ExtVar(name, m.group(1)))
    return out


def parse_document(text):
    doc = _toml(text)
    loc = _Locator(text)
    system = doc.get("system", {})
    name = str(system.get("name", ""))
    ext = _ext_vars(doc)
    cons_sec = doc.get("constraints", {})
    T_lits = _strings(cons_sec.get("T", []), "[constraints] T")
    reg_lits = dict(cons_sec.get("regularize", {}))

    def poly(reg, lit):
        try:
            return reg.parse_poly(str(lit))
        except ParseError as exc:
            loc.fail(exc, str(lit))

    def ratfunc(reg, lit):
        try:
            return reg.parse(str(lit))
        except ParseError as exc:
            loc.fail(exc, str(lit))

    if "pfaffian" in doc and "equations" in doc["pfaffian"]:
        pf = doc["pfaffian"]
        unknowns = {k: list(v) for k, v in pf.get("unknowns", {}).items()}
        if not unknowns:
            raise ParseError("[pfaffian] equations need an 'unknowns' table of derivative chains")
        eqs = _strings(pf["equations"], "[pfaffian] equations")
        probe = VarRegistry([v for c in unknowns.values() for v in c], ext=ext)
        for e in eqs:
            poly(probe, e)
        spec = depress(eqs, unknowns, ext=ext)
        return _finish(doc, spec, name, reg_lits, poly, None, text)

    phase = system.get("phase")
    if not phase:
        raise ParseError("[system] phase must list the phase variables")
    try:
        base = VarRegistry(phase, ext=ext)
    except (ValueError, ParseError) as exc:
        raise ParseError(f"[system]: {exc}") from None

    if "pfaffian" in doc:
        pf = doc["pfaffian"]
        rows, rhs = pf.get("theta", []), _strings(pf.get("rhs", []), "[pfaffian] rhs")
        if len(rows) != len(rhs):
            raise ParseError(f"dimension mismatch: {len(rows)} Pfaffian rows, {len(rhs)} right-hand sides")
        for k, row in enumerate(rows):
            if len(row) != base.n:
                raise ParseError(f"dimension mismatch: Pfaffian row {k + 1} has {len(row)} entries, "
                                 f"expected {base.n}")
        theta = tuple(tuple(ratfunc(base, e) for e in row) for row in rows)
        spec = PfaffianSpec(base, theta, tuple(ratfunc(base, e) for e in rhs),
                            tuple(poly(base, t) for t in T_lits))
        return _finish(doc, spec, name, reg_lits, poly, None, text)

    if "hamiltonian" in doc:
        ham = doc["hamiltonian"]
        if "H" not in ham:
            raise ParseError("[hamiltonian] needs H")
        entries = []
        for k, ent in enumerate(ham.get("poisson", [])):
            if len(ent) != 3:
                raise ParseError(f"poisson entry {k + 1} must be [xi, xj, coefficient]")
            xi, xj, c = ent
            for x in (xi, xj):
                if x not in base.phase:
                    raise ParseError(f"unknown variable {x!r} in poisson entry {k + 1}")
            entries.append((base.index(xi), base.index(xj), ratfunc(base, c)))
        P = PolyVector.bivector(base, entries)
        fams = system.get("families")
        spec = from_hamiltonian(P, poly(base, ham["H"]), [poly(base, t) for t in T_lits],
                                families=tuple(fams) if fams else None, name=name)
        P = PolyVector(spec.reg, 2, {K: spec.reg.lift(c) for K, c in P.comps})
        return _finish(doc, spec, name, reg_lits, poly, P, text)

    chars = doc.get("char_field", [])
    fams = system.get("families")
    if fams is None:
        from .reduction import default_families
        fams = default_families(len(chars), set(phase) | {e.name for e in ext}) if chars else []
    if len(fams) != len(chars):
        raise ParseError(f"dimension mismatch: {len(fams)} families for {len(chars)} characteristic fields")
    reg = VarRegistry(phase, tuple(fams), ext, int(system.get("jet_order", 1 if chars else 0)))

    def vfield(table, where):
        for x in table:
            if x not in reg.phase:
                raise ParseError(f"unknown variable {x!r} in {where}")
        return VectorField(reg, tuple(ratfunc(reg, table[x]) if x in table else reg.zero() for x in reg.phase))

    drift = vfield(doc.get("drift", {}), "[drift]")
    Z = [vfield(c, f"[[char_field]] {k + 1}") for k, c in enumerate(chars)]
    spec = SystemSpec(reg, drift, Z, tuple(poly(reg, t) for t in T_lits), tuple(fams), name=name)
    return _finish(doc, spec, name, reg_lits, poly, None, text)


def _finish(doc, spec, name, reg_lits, poly, P, text):
    regularize = {poly(spec.reg, k): poly(spec.reg, v) for k, v in reg_lits.items()} or None
    weak = doc.get("weak_poisson", {}).get("poisson")
    return Document(spec, name, regularize, P, list(doc.get("generator", [])), weak,
                    dict(doc.get("numeric", {})), text)


def parse_system(text):
    """PfaffianSpec or SystemSpec described by a document."""
    return parse_document(text).spec


def to_primary(spec, name=""):
    if isinstance(spec, PfaffianSpec):
        return pfaffian_to_primary(spec, name=name)
    return spec


# ---------------------------------------------------------------------------
# emitting
# ---------------------------------------------------------------------------


def _q(s):
    return json.dumps(s, ensure_ascii=False)


def emit_document(spec, regularize=None):
    """Document text for a SystemSpec (used for round trips)."""
    reg = spec.reg
    out = ["[system]", f"name = {_q(spec.name)}",
           "phase = [" + ", ".join(_q(x) for x in reg.phase) + "]",
           "families = [" + ", ".join(_q(f) for f in spec.families) + "]",
           f"jet_order = {reg.jet_order}", ""]
    if reg.ext:
        out += ["[ext_vars]"] + [f"{e.name} = {_q('exp(' + e.exponent + ')')}" for e in reg.ext] + [""]
    out += ["[drift]"] + [f"{x} = {_q(v)}" for x, v in spec.drift.as_dict().items()] + [""]
    for z in spec.char_fields:
        out += ["[[char_field]]"] + [f"{x} = {_q(v)}" for x, v in z.as_dict().items()] + [""]
    out += ["[constraints]", "T = [" + ", ".join(_q(poly_literal(t)) for t in spec.constraints) + "]"]
    if regularize:
        pairs = ", ".join(f"{_q(poly_literal(k))} = {_q(poly_literal(v))}" for k, v in regularize.items())
        out.append("regularize = { " + pairs + " }")
    return "\n".join(out) + "\n"


def emit_generators(gens, families):
    """[[generator]] tables for ``verify``."""
    out = []
    for g in gens:
        out += ["[[generator]]", f"param = {_q(g.param)}", f"order = {g.order}"]
        dx = ", ".join("{ " + ", ".join(f"{x} = {_q(v)}" for x, v in A.as_dict().items()) + " }" for A in g.delta_x)
        out.append(f"delta_x = [{dx}]")
        rows = ", ".join("[" + ", ".join(_q(to_literal(b)) for b in B) + "]" for B in g.delta_lam)
        out += [f"delta_lam = [{rows}]", ""]
    return "\n".join(out)


def emit_weak_poisson(P):
    reg = P.reg
    entries = ", ".join(f"[{_q(reg.phase[i])}, {_q(reg.phase[j])}, {_q(to_literal(c))}]" for (i, j), c in P.comps)
    return f"[weak_poisson]\npoisson = [{entries}]\n"


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _num(x):
    x = float(x)
    if not np.isfinite(x):
        return str(x)
    return float(f"{x:.10g}")


def _spec_summary(spec):
    return {
        "name": spec.name,
        "phase": list(spec.reg.phase),
        "families": list(spec.families),
        "drift": spec.drift.as_dict(),
        "char_fields": [z.as_dict() for z in spec.char_fields],
        "constraints": [poly_literal(t) for t in spec.constraints],
    }


def _classification(c):
    return {
        "tangential": [poly_literal(t) for t in c.tangential],
        "transverse": [poly_literal(t) for t in c.transverse],
        "n_tangential": len(c.tangential),
        "n_transverse": len(c.transverse),
    }


def _gauge_summary(g, c):
    gens = []
    for gen in g.generators:
        s = gen.summary()
        s["verified"] = bool(verify_symmetry(gen, c))
        s["prop2"] = bool(check_prop2(gen, c.ideal))
        gens.append(s)
    return {
        "dim": g.dim,
        "basis": [b.as_dict() for b in g.basis],
        "growth": list(g.growth),
        "depth": g.depth,
        "indices": list(g.indices),
        "prop3": bool(g.prop3),
        "generators": gens,
    }


def _involutive_summary(c, g, P=None):
    flags = []
    inv = involutive_form(c, g, flags)
    rep = check_involution(inv)
    out = {
        "form": _spec_summary(inv),
        "involution": {"ok": rep.ok, "failure": rep.failure},
        "jet_flags": flags,
        "observables": observable_catalog(c, g),
    }
    if P is not None:
        out["weak_poisson"] = verify_weak_poisson(P, inv).summary()
    return out, inv


def _initial_state(spec, cfg, numeric):
    if "x0" in numeric:
        x0 = np.array([float(v) for v in numeric["x0"]])
    else:
        x0 = np.random.default_rng(cfg.seed).uniform(-0.5, 0.5, spec.n)
    return project_to_surface(x0, list(spec.constraints), spec.reg)


def _numeric_checks(c, g, cfg, numeric, observables=()):
    spec = c.spec
    x0 = _initial_state(spec, cfg, numeric)
    m = len(spec.families)
    tr = integrate(spec, SplineSampler(m, seed=cfg.seed, horizon=cfg.horizon), x0, cfg.horizon, cfg.h)
    out = {
        "seed": cfg.seed, "h": cfg.h, "horizon": cfg.horizon,
        "x0": [_num(v) for v in x0],
        "x_final": [_num(v) for v in tr.x[-1]],
        "constraint_drift": _num(constraint_drift_check(tr)),
        "generators": [], "observables": [],
    }
    stride = max(1, len(tr.t) // 200)
    for gen in (g.generators if g is not None else []):
        r = gauge_residual_scaling(gen, tr, spec=spec, stride=stride)
        q = gauge_residual_scaling(corrupt_generator(gen), tr, spec=spec, stride=stride)
        out["generators"].append({
            "parameter": gen.param, "ratio": _num(r.ratio), "residual": _num(r.r_full), "passed": r.passed(),
            "corrupted_ratio": _num(q.ratio), "corrupted_rejected": not q.passed(),
        })
    if m:
        samplers = [SplineSampler(m, seed=cfg.seed, horizon=cfg.horizon),
                    SplineSampler(m, seed=cfg.seed + 1, horizon=cfg.horizon)]
        for lit in observables:
            dev = observable_causality_check(Observable.parse(spec.reg, lit), spec, samplers, x0, cfg.horizon, cfg.h)
            out["observables"].append({"observable": lit, "deviation": _num(dev), "passed": dev < 1e-6})
    return out


def _parse_branch(text):
    """'k' (minor of stage k) or 'k:r1,r2:c1,c2' (explicit rows/cols of stage k's matrix)."""
    parts = text.split(":")
    try:
        stage = int(parts[0])
        if len(parts) == 1:
            return stage, None, None
        if len(parts) == 3:
            return stage, [int(i) for i in parts[1].split(",")], [int(i) for i in parts[2].split(",")]
    except ValueError:
        pass
    raise ParseError(f"--branch expects 'stage' or 'stage:rows:cols', got {text!r}")


def _branch_locus(c, directive):
    stage, rows, cols = _parse_branch(directive)
    if not 0 <= stage < len(c.stages):
        raise ParseError(f"--branch stage {stage} out of range (0..{len(c.stages) - 1})")
    rec = c.stages[stage]
    if rows is None:
        return branch_points(rec)
    p = minor_polynomial(rec, rows, cols)
    return [p] if p is not None else []


def _max_jet(literal, families):
    ks = [int(m.group(2)) for m in re.finditer(r"\b([A-Za-z_][A-Za-z0-9_]*)_(\d+)\b", literal) if m.group(1) in families]
    return max(ks, default=0)


def _verify_section(doc, c):
    spec = c.spec
    out = {"generators": [], "weak_poisson": None}
    for k, raw in enumerate(doc.generators):
        order = int(raw.get("order", len(raw.get("delta_x", []))))
        dx = raw.get("delta_x", [])
        dl = raw.get("delta_lam", [])
        if len(dx) != order or len(dl) != order + 1:
            raise ParseError(f"generator {k + 1}: need {order} delta_x tables and {order + 1} delta_lam rows")
        lits = [str(v) for t in dx for v in t.values()] + [str(e) for row in dl for e in row]
        reg = spec.reg.with_jet_order(max([spec.reg.jet_order] + [_max_jet(x, spec.families) for x in lits]))
        A = tuple(VectorField(reg, tuple(reg.parse(str(t[x])) if x in t else reg.zero() for x in reg.phase))
                  for t in dx)
        for row in dl:
            if len(row) != len(spec.families):
                raise ParseError(f"generator {k + 1}: delta_lam rows need {len(spec.families)} entries")
        B = tuple(tuple(reg.parse(str(e)) for e in row) for row in dl)
        gen = GaugeGenerator(order, (), (), (), A, B, param=str(raw.get("param", f"eps{k + 1}")),
                             families=spec.families)
        rep = verify_symmetry(gen, c)
        out["generators"].append({"parameter": gen.param, "ok": rep.ok, "residuals": [list(r) for r in rep.residuals]})
    if doc.weak_poisson is not None:
        reg = spec.reg
        entries = [(reg.index(a), reg.index(b), reg.parse(str(v))) for a, b, v in doc.weak_poisson]
        g = gauge_distribution(c, synthesize=False)
        inv = involutive_form(c, g)
        out["weak_poisson"] = verify_weak_poisson(PolyVector.bivector(reg, entries), inv).summary()
    ok = all(r["ok"] for r in out["generators"]) and (out["weak_poisson"] is None or out["weak_poisson"]["ok"])
    return out, ok


def run_pipeline(cfg):
    """Report dict and exit code.  Errors are reported, not raised."""
    report = {"command": cfg.command, "input": cfg.input}
    try:
        doc = parse_document(cfg.read())
        code = _run(cfg, doc, report)
    except ConsistencyError as exc:
        report["error"] = _err(exc)
        code = EXIT_CONSISTENCY
    except RegularityError as exc:
        report["error"] = _err(exc)
        code = EXIT_REGULARITY
    except (GaugeNFError, ValueError, KeyError) as exc:
        report["error"] = _err(exc)
        code = EXIT_FAIL
    report["exit_code"] = code
    return report, code


def _err(exc):
    out = {"type": type(exc).__name__, "message": str(exc)}
    for k in ("line", "column", "offending"):
        v = getattr(exc, k, None)
        if v is not None:
            out[k] = v if not isinstance(v, (list, tuple)) else [str(e) for e in v]
    return out


def _run(cfg, doc, report):
    primary = to_primary(doc.spec, doc.name)
    report["system"] = _spec_summary(primary)

    if cfg.command == "gauge":
        try:
            c = stabilize(primary, max_stage=1, regularize=doc.regularize)
        except StageOverflow:
            c = None
        if c is None or c.spec.families != primary.families:
            raise ConsistencyError("input is not a complete normal form: stabilization changed it")
        g = gauge_distribution(c)
        report["gauge"] = _gauge_summary(g, c)
        return EXIT_OK

    c = stabilize(primary, max_stage=cfg.max_stage, regularize=doc.regularize)
    if cfg.command == "branch":
        report["branch_points"] = [[poly_literal(p) for p in branch_points(rec)] for rec in c.stages]
        if cfg.branch is None:
            return EXIT_OK
        locus = _branch_locus(c, cfg.branch)
        primary = abnormal_branch(primary, locus)
        report["branch"] = {"directive": cfg.branch, "locus": [poly_literal(p) for p in locus]}
        c = stabilize(primary, max_stage=cfg.max_stage, regularize=doc.regularize)

    report["stages"] = [rec.summary() for rec in c.stages]
    report["complete_form"] = dict(_spec_summary(c.spec),
                                   multipliers={k: to_literal(v) for k, v in c.multipliers.items()})
    report["classification"] = _classification(c)
    report["certificate"] = [poly_literal(p) for p in c.certificate()]

    if cfg.command == "simulate":
        report["numeric_checks"] = _numeric_checks(c, None, cfg, doc.numeric)
        return EXIT_OK

    if cfg.command == "verify":
        report["verify"], ok = _verify_section(doc, c)
        return EXIT_OK if ok else EXIT_FAIL

    g = gauge_distribution(c)
    report["gauge"] = _gauge_summary(g, c)
    report["involutive"], _ = _involutive_summary(c, g, doc.poisson)
    if cfg.numeric:
        report["numeric_checks"] = _numeric_checks(c, g, cfg, doc.numeric, report["involutive"]["observables"])
    return EXIT_OK


def render(report):
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="gaugenf", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd, helptext in [("analyze", "full pipeline"), ("gauge", "gauge analysis of a complete normal form"),
                          ("verify", "check supplied generators or a weak Poisson structure"),
                          ("simulate", "numeric integration only"), ("branch", "abnormal branch exploration")]:
        p = sub.add_parser(cmd, help=helptext)
        p.add_argument("input", help="system document, or - for stdin")
        p.add_argument("--report", help="write the JSON report here instead of stdout")
        p.add_argument("--max-stage", type=int, default=None)
        p.add_argument("--branch", default=None, help="stage or stage:rows:cols of the minor to vanish")
        p.add_argument("--numeric", action="store_true", help="run the numeric cross-checks")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--h", type=float, default=1e-3)
        p.add_argument("--horizon", type=float, default=1.0)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.input, args.command, args.max_stage, args.branch, args.numeric or args.command == "simulate",
                        args.seed, args.h, args.horizon, args.report)
    except ValueError as exc:
        print(f"gaugenf: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        cfg.read()
    except OSError as exc:
        print(f"gaugenf: cannot read {cfg.input}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report, code = run_pipeline(cfg)
    text = render(report)
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if "error" in report:
        print(f"gaugenf: {report['error']['type']}: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
