"""Command-line front end.

Reads a JSON config describing the domain and the mapping, runs one command
and writes a JSON report.  Complex numbers are written as [re, im] pairs.

Example config::

    {
      "domain": {"p": [2, 3, 3]},
      "mapping": {"family": "Example1", "k": 2, "lam": [0.5, 0],
                  "a": [0.03, 0.03, 0.03]},
      "point": [[0.1, 0], [0.2, 0.1], [0, 0]]
    }

Exit codes: 0 pass / no violation found, 1 fail / violation found,
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import hypotheses
from .criterion import scan
from .errors import DPConvexError, InvalidDomain
from .falsifier import SearchConfig, certify_campaign, minimize_J
from .geometry import DomainSpec, minkowski
from .mappings import Component, MappingSpec, Term

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULTS = {"samples": 10_000, "seed": 42, "tol": 1e-8, "rho_floor": 0.3, "restarts": 50,
            "threads": 1, "iterations": 500}


class ConfigError(Exception):
    pass


def parse_complex(value) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 \
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"expected a number or an [re, im] pair, got {value!r}")


def complex_pairs(values) -> list:
    return [[float(c.real), float(c.imag)] for c in values]


def parse_domain(cfg: dict) -> DomainSpec:
    d = cfg.get("domain")
    if not isinstance(d, dict) or "p" not in d:
        raise ConfigError("config needs a 'domain' object with an exponent list 'p'")
    p = d["p"]
    if not isinstance(p, list):
        raise ConfigError("'domain.p' must be a list of reals")
    return DomainSpec(int(d.get("n", len(p))), tuple(p))


def parse_mapping(cfg: dict, n: int) -> MappingSpec:
    m = cfg.get("mapping")
    if not isinstance(m, dict) or "family" not in m:
        raise ConfigError("config needs a 'mapping' object with a 'family' tag")
    family = m["family"]
    components = ()
    if "components" in m:
        comps = []
        for entry in m["components"]:
            lead = entry.get("lead_lambda")
            terms = tuple(Term(parse_complex(t["coeff"]), tuple(int(e) for e in t["powers"]))
                          for t in entry.get("terms", []))
            comps.append(Component(terms, None if lead is None else parse_complex(lead)))
        components = tuple(comps)
    return MappingSpec(
        family=family, n=int(m.get("n", n)),
        a=tuple(parse_complex(v) for v in m.get("a", [])),
        a_prime=tuple(parse_complex(v) for v in m.get("a_prime", [])),
        lam=parse_complex(m.get("lam", 0)),
        k=int(m.get("k", 1)),
        components=components)


def describe_mapping(spec: MappingSpec) -> dict:
    out = {"family": spec.family, "n": spec.n, "a": complex_pairs(spec.a),
           "a_prime": complex_pairs(spec.a_prime),
           "lam": [float(spec.lam.real), float(spec.lam.imag)], "k": spec.k}
    if spec.components:
        out["components"] = [
            {"lead_lambda": None if c.lead_lambda is None
             else [float(c.lead_lambda.real), float(c.lead_lambda.imag)],
             "terms": [{"coeff": [float(t.coeff.real), float(t.coeff.imag)],
                        "powers": list(t.powers)} for t in c.terms]}
            for c in spec.components]
    return out


def witness_dict(ev) -> dict | None:
    if ev is None:
        return None
    d = ev.to_dict()
    return {"z": d["z"], "b": d["b"], "j_value": d["j_value"], "residual": d["residual"]}


def _setting(args, cfg, name):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, DEFAULTS[name])


# ---------------------------------------------------------------------------
# commands; each returns (exit code, report fields)


def cmd_rho(args, cfg, dom):
    if "point" not in cfg:
        raise ConfigError("the rho command needs a 'point' list in the config")
    z = np.array([parse_complex(v) for v in cfg["point"]], dtype=complex)
    res = minkowski(dom, z)
    return EXIT_PASS, {"verdict": "ok", "details": {"rho": res.rho, "residual": res.residual,
                                                    "point": complex_pairs(z)}}


def _checker_report(rep: hypotheses.CheckReport) -> dict:
    return {"verdict": "pass" if rep.passed else "fail",
            "margins": [m.to_dict() for m in rep.margins],
            "details": {"theorem": rep.theorem, "samples_used": rep.samples_used,
                        "notes": rep.notes}}


def cmd_check(args, cfg, dom):
    spec = parse_mapping(cfg, dom.n)
    samples, seed = _setting(args, cfg, "samples"), _setting(args, cfg, "seed")
    threads = _setting(args, cfg, "threads")
    if args.theorem == 4:
        rep = hypotheses.check_theorem4(spec, dom)
    elif args.theorem == 3:
        k = args.k if args.k is not None else cfg.get("coupling_index")
        if k is None:
            raise ConfigError("theorem 3 needs the coupling index (--k or 'coupling_index')")
        rep = hypotheses.check_theorem3(dom, spec, int(k), samples, seed, threads=threads)
    else:
        checker = {1: hypotheses.check_theorem1, 2: hypotheses.check_theorem2}[args.theorem]
        rep = checker(dom, spec, samples, seed, threads=threads)
    return (EXIT_PASS if rep.passed else EXIT_FAIL), _checker_report(rep)


def cmd_validate_example(args, cfg, dom):
    spec = parse_mapping(cfg, dom.n)
    rep = hypotheses.validate_example(args.which, hypotheses.ExampleParams.from_spec(dom, spec))
    return (EXIT_PASS if rep.passed else EXIT_FAIL), _checker_report(rep)


def _search_verdict(min_j, tol):
    return "violation" if min_j < -tol else "no violation found"


def cmd_scan(args, cfg, dom):
    spec = parse_mapping(cfg, dom.n)
    tol = _setting(args, cfg, "tol")
    rep = scan(dom, spec, samples=_setting(args, cfg, "samples"), seed=_setting(args, cfg, "seed"),
               rho_floor=_setting(args, cfg, "rho_floor"), tol=tol,
               threads=_setting(args, cfg, "threads"))
    verdict = _search_verdict(rep.min_j, tol)
    return (EXIT_FAIL if rep.violation else EXIT_PASS), {
        "verdict": verdict, "witness": witness_dict(rep.witness),
        "details": {"min_j": rep.min_j, "evaluated": rep.evaluated, "singular": rep.singular,
                    "count_below": rep.count_below, "rho_floor": rep.rho_floor,
                    "note": rep.note}}


def cmd_falsify(args, cfg, dom):
    spec = parse_mapping(cfg, dom.n)
    tol = _setting(args, cfg, "tol")
    sc = SearchConfig(restarts=_setting(args, cfg, "restarts"),
                      iterations=_setting(args, cfg, "iterations"),
                      seed=_setting(args, cfg, "seed"), threads=_setting(args, cfg, "threads"))
    res = minimize_J(dom, spec, sc)
    return (EXIT_FAIL if res.min_j < -tol else EXIT_PASS), {
        "verdict": _search_verdict(res.min_j, tol), "witness": witness_dict(res.witness),
        "details": {"min_j": res.min_j, "restarts": res.restarts,
                    "restarts_converged": res.restarts_converged,
                    "singular_hits": res.singular_hits, "evaluations": res.evaluations}}


def cmd_campaign(args, cfg, dom):
    spec = parse_mapping(cfg, dom.n)
    tol = _setting(args, cfg, "tol")
    rep = certify_campaign(dom, spec, budget=_setting(args, cfg, "samples"),
                           seed=_setting(args, cfg, "seed"), tol=tol,
                           rho_floor=_setting(args, cfg, "rho_floor"),
                           threads=_setting(args, cfg, "threads"))
    return (EXIT_FAIL if rep.verdict == "violation" else EXIT_PASS), {
        "verdict": rep.verdict, "witness": witness_dict(rep.witness),
        "details": {"min_j": rep.min_j, "scan_min_j": rep.scan.min_j,
                    "search_min_j": rep.search.min_j, "scan_samples": rep.scan.samples,
                    "search_evaluations": rep.search.evaluations,
                    "note": rep.scan.note}}


COMMANDS = {"rho": cmd_rho, "check": cmd_check, "scan": cmd_scan, "falsify": cmd_falsify,
            "validate-example": cmd_validate_example, "campaign": cmd_campaign}
# commands whose mathematics assumes every p_j >= 2
NEEDS_THEOREM_EXPONENTS = {"check", "scan", "falsify", "validate-example", "campaign"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config with domain and mapping")
    common.add_argument("--output", default=None, help="write the report here (default stdout)")
    common.add_argument("--samples", type=int, default=None,
                        help="sample count, or total budget for campaign (default 10000)")
    common.add_argument("--seed", type=int, default=None, help="base seed (default 42)")
    common.add_argument("--tol", type=float, default=None,
                        help="J below -tol counts as a violation (default 1e-8)")
    common.add_argument("--rho-floor", dest="rho_floor", type=float, default=None,
                        help="lower bound on rho for scan samples (default 0.3)")
    common.add_argument("--restarts", type=int, default=None, help="falsifier restarts (default 50)")
    common.add_argument("--iterations", type=int, default=None,
                        help="simplex iterations per restart (default 500)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default 1)")

    parser = argparse.ArgumentParser(
        prog="dpconvex", description="Numerical convexity checks for holomorphic maps on D_p^n.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rho", parents=[common], help="Minkowski functional at config 'point'")
    chk = sub.add_parser("check", parents=[common], help="sufficient-condition checker")
    chk.add_argument("theorem", type=int, choices=[1, 2, 3, 4])
    chk.add_argument("--k", type=int, default=None, help="coupling index for theorem 3")
    sub.add_parser("scan", parents=[common], help="Monte-Carlo minimum of J")
    sub.add_parser("falsify", parents=[common], help="multi-start minimisation of J")
    sub.add_parser("campaign", parents=[common], help="scan followed by targeted search")
    val = sub.add_parser("validate-example", parents=[common], help="coefficient bounds")
    val.add_argument("which", type=int, choices=[1, 2, 3, 4])
    return parser


def _command_label(args) -> str:
    if args.command == "check":
        return f"check {args.theorem}"
    if args.command == "validate-example":
        return f"validate-example {args.which}"
    return args.command


def run(argv=None) -> tuple:
    """Parse, dispatch and build the report.

    Returns (exit code, report or None, output path or None).
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_USAGE if exc.code else EXIT_PASS), None, None
    start = time.perf_counter()
    try:
        cfg = json.loads(Path(args.config).read_text())
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        dom = parse_domain(cfg)
        if args.command in NEEDS_THEOREM_EXPONENTS and min(dom.p) < 2:
            raise InvalidDomain(
                f"every exponent must satisfy p_j >= 2 for the convexity criterion and the "
                f"sufficient conditions (got p={list(dom.p)})")
        code, fields = COMMANDS[args.command](args, cfg, dom)
    except (OSError, json.JSONDecodeError, ConfigError, DPConvexError, ValueError,
            KeyError, TypeError) as exc:
        print(f"dpconvex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, None, None

    mapping = None
    if "mapping" in cfg and args.command != "rho":
        mapping = describe_mapping(parse_mapping(cfg, dom.n))
    report = {
        "command": _command_label(args),
        "domain": {"n": dom.n, "p": list(dom.p)},
        "mapping": mapping,
        "seed": _setting(args, cfg, "seed"),
        "samples": _setting(args, cfg, "samples"),
        "verdict": fields["verdict"],
        "margins": fields.get("margins", []),
        "witness": fields.get("witness"),
        "details": fields.get("details", {}),
        "timing_ms": (time.perf_counter() - start) * 1e3,
    }
    return code, report, args.output


def render(report: dict) -> str:
    """JSON text; floats use the shortest repr that round-trips exactly."""
    return json.dumps(report, indent=2) + "\n"


def main(argv=None) -> int:
    code, report, output = run(argv)
    if report is not None:
        text = render(report)
        if output:
            Path(output).write_text(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
