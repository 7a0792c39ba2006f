"""``levysup`` command line.

Exit codes: 0 on success or a passing verification, 1 on a failing
verification, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

import numpy as np

from . import bridge, supremum, transition, verify
from .config import ConfigError, RunConfig, load_config
from .entrance import conditioned_entrance, entrance_density_qstar, meander_density
from .ladder import UnavailableError, ladder_functions
from .processes import UnsupportedClassification
from .report import VerificationReport, _clean

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

VERIFY_CHECKS = ("small-x", "large-t", "bounds", "corollary", "integrability", "continuity",
                 "bound-suite", "convolution", "duality", "chapman-kolmogorov")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(flag: str):
    """Parse ``a,b,c`` or ``start:stop:num`` (inclusive linspace)."""
    def parse(text: str) -> List[float]:
        try:
            if ":" in text:
                a, b, n = text.split(":")
                return [float(v) for v in np.linspace(float(a), float(b), int(n))]
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag}: cannot parse {text!r}")
    return parse


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (str, bool)):
        return str(v)
    return repr(float(v))


# -- parser -------------------------------------------------------------
def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("process")
    g.add_argument("--spec", help="brownian | cauchy | stable | smd")
    g.add_argument("--sigma", type=float)
    g.add_argument("--mu", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--scale", type=float)
    g.add_argument("--drift-b", dest="drift_b", type=float)
    g.add_argument("--negated", action="store_true", default=None,
                   help="for smd: use b t - S_t")
    r = p.add_argument_group("run")
    r.add_argument("--config", help="INI file with [spec], [run], [tolerances]")
    r.add_argument("--seed", type=int, help="overrides [run] seed and $LEVYSUP_SEED")
    r.add_argument("--workers", type=int)
    r.add_argument("--format", dest="output_format", choices=("csv", "json"))
    r.add_argument("--n-paths", dest="n_paths", type=int, help="entrance-law paths")
    r.add_argument("--timing", action="store_true", help="include runtime_s in JSON reports")
    r.add_argument("--out", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levysup", description="Supremum laws of Levy processes.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    d = sub.add_parser("density", help="transition or supremum densities (CSV)")
    d.add_argument("which", choices=("pdf", "sup"))
    d.add_argument("--t", type=_floats("--t"), default=[1.0])
    d.add_argument("--x", type=_floats("--x"), default=None)
    d.add_argument("--oracle", action="store_true", help="add Monte Carlo oracle columns (sup)")
    d.add_argument("--oracle-n", dest="oracle_n", type=int)
    d.add_argument("--oracle-steps", dest="oracle_steps", type=int)
    _add_common(d)

    e = sub.add_parser("entrance", help="entrance-law densities (CSV)")
    e.add_argument("--t", type=float, default=1.0)
    e.add_argument("--x", type=_floats("--x"), default=None)
    e.add_argument("--density", choices=("qstar", "meander", "conditioned"), default="qstar")
    _add_common(e)

    f = sub.add_parser("fluct", help="ladder and excursion quantities (CSV)")
    f.add_argument("which", choices=("table",))
    _add_common(f)

    b = sub.add_parser("bridge", help="argmax time of the bridge (JSON)")
    b.add_argument("--t", type=float, default=1.0)
    b.add_argument("--y", type=float, default=0.0)
    b.add_argument("--N", type=int, default=100_000)
    b.add_argument("--n-steps", dest="n_steps", type=int, default=4096)
    _add_common(b)

    v = sub.add_parser("verify", help="theorem-level checks (JSON)")
    v.add_argument("check", choices=VERIFY_CHECKS)
    v.add_argument("--t", type=_floats("--t"), default=None)
    v.add_argument("--x", type=_floats("--x"), default=None)
    v.add_argument("--s", type=_floats("--s"), default=None)
    _add_common(v)

    rp = sub.add_parser("report", help="several checks in one JSON document")
    rp.add_argument("--checks", default="small-x,large-t,bounds,corollary,integrability,"
                                       "continuity")
    _add_common(rp)
    return p


# -- configuration --------------------------------------------------------
def _run_config(args) -> RunConfig:
    cfg = load_config(args.config)
    spec = dict(cfg.spec)
    if args.spec is not None:
        spec = {"kind": args.spec}
    for key in ("sigma", "mu", "alpha", "beta", "scale", "drift_b"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = str(val)
    if args.negated:
        spec["negated"] = "true"
    kw = {"spec": spec}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        kw["workers"] = args.workers
    if args.output_format is not None:
        kw["output_format"] = args.output_format
    if args.n_paths is not None:
        kw["entrance"] = replace(cfg.entrance, n_paths=args.n_paths)
    for key in ("oracle_n", "oracle_steps"):
        if getattr(args, key, None) is not None:
            kw[key] = getattr(args, key)
    return replace(cfg, **kw)


def _mc(cfg: RunConfig) -> dict:
    return {"config": cfg.entrance, "seed": cfg.resolved_seed, "workers": cfg.workers}


def _table(header: Sequence[str], rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


# -- commands -------------------------------------------------------------
def _cmd_density(args, cfg: RunConfig):
    spec = cfg.process()
    x = args.x if args.x is not None else list(np.linspace(0.1, 3.0, 30))
    if args.which == "pdf":
        rows = []
        for t in args.t:
            v, err, method = transition.pdf_with_error(spec, t, x)
            rows.extend((t, xi, vi, ei, method) for xi, vi, ei in zip(x, v, err))
        return _table(("t", "x", "value", "abs_err", "method"), rows, cfg.output_format), True
    header = ["t", "x", "f_value", "abs_err", "atom_mass", "mass_check"]
    if args.oracle:
        header += ["oracle_value", "oracle_stderr", "oracle_atom"]
    rows = []
    for t in args.t:
        res = supremum.sup_density(spec, t, x, **_mc(cfg))
        err = res.density.error()
        orc = None
        if args.oracle:
            orc = supremum.mc_sup_oracle(spec, t, cfg.oracle_n, cfg.oracle_steps,
                                         cfg.resolved_seed, np.asarray(x),
                                         workers=cfg.workers)
        for i, xi in enumerate(x):
            row = [t, xi, res.values[i], err[i], res.atom_mass, res.total_mass_check]
            if orc is not None:
                se = orc.curve.stderr
                row += [orc.curve.values[i], None if se is None else se[i],
                        orc.extra.get("atom")]
            rows.append(row)
    return _table(header, rows, cfg.output_format), True


def _cmd_entrance(args, cfg: RunConfig):
    spec = cfg.process()
    x = args.x if args.x is not None else list(np.geomspace(0.05, 5.0, 21))
    fn = {"qstar": entrance_density_qstar, "meander": meander_density,
          "conditioned": conditioned_entrance}[args.density]
    est = fn(spec, args.t, np.asarray(x), **_mc(cfg))
    c = est.curve
    se = c.stderr if c.stderr is not None else np.zeros(len(x))
    rows = [(xi, vi, si, c.method, est.n_paths, est.start_x0, est.step)
            for xi, vi, si in zip(x, c.values, se)]
    return _table(("x", "value", "stderr", "method", "n_paths", "x0", "step"), rows,
                  cfg.output_format), True


def _cmd_fluct(args, cfg: RunConfig):
    lf = ladder_functions(cfg.process())
    rows = [(q, a, v, p) for q, a, v, p in lf.table()]
    return _table(("quantity", "t_or_x", "value", "provenance"), rows, cfg.output_format), True


def _json(d: dict) -> str:
    return json.dumps(d, indent=2) + "\n"


def _cmd_bridge(args, cfg: RunConfig):
    spec = cfg.process()
    out = bridge.bridge_report(spec, args.t, args.y, args.N, args.n_steps,
                               seed=cfg.resolved_seed, workers=cfg.workers,
                               config=cfg.entrance)
    ok = out.get("ks_p") is None or out["ks_p"] >= 0.01
    return _json(_clean(out)), ok


def _check(name: str, spec, args, cfg: RunConfig) -> VerificationReport:
    mc = _mc(cfg)
    t = getattr(args, "t", None)
    x = getattr(args, "x", None)
    s = getattr(args, "s", None)
    tol = cfg.tolerances
    if name == "small-x":
        kw = {}
        if t:
            kw["t_list"] = t
        if x:
            kw["x_list"] = x
        return verify.verify_small_x(spec, tolerances=tol, **kw, **mc)
    if name == "large-t":
        kw = {}
        if t:
            kw["t_list"] = t
        if x:
            kw["x_compact"] = x
        return verify.verify_large_t(spec, tolerances=tol, **kw, **mc)
    if name == "bounds":
        return verify.verify_bounds(spec, x0=x[0] if x else 1.0, t0=t[0] if t else 1.0, **mc)
    if name == "corollary":
        kw = {"x_small_grid": x} if x else {}
        return verify.verify_corollary(spec, t=t[0] if t else 1.0, tolerances=tol, **kw, **mc)
    if name == "integrability":
        return verify.verify_integrability(spec, seed=mc["seed"], workers=mc["workers"])
    if name == "continuity":
        return verify.continuity_probe(spec, t=t[0] if t else 1.0, x0=x[0] if x else 1.0, **mc)
    if name == "bound-suite":
        return verify.bound_suite(spec, **mc)
    if name == "convolution":
        return bridge.convolution_identity_check(spec, t[0] if t else 1.0,
                                                 s or (0.25, 0.5, 0.75), **mc)
    if name == "duality":
        return verify.duality_check(spec, t=t[0] if t else 1.0, **mc)
    if name == "chapman-kolmogorov":
        st = s or (0.5,)
        return verify.chapman_kolmogorov_check(spec, s=st[0], t=t[0] if t else 0.5,
                                               ys=x or (0.5, 1.0), **mc)
    raise UsageError(f"unknown check {name!r}")


def _report_json(rep: VerificationReport, timing: bool) -> str:
    return rep.to_json(include_runtime=timing) + "\n"


def _cmd_verify(args, cfg: RunConfig):
    rep = _check(args.check, cfg.process(), args, cfg)
    return _report_json(rep, args.timing), rep.verdict


def _cmd_report(args, cfg: RunConfig):
    spec = cfg.process()
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    bad = [n for n in names if n not in VERIFY_CHECKS]
    if bad:
        raise UsageError(f"--checks: unknown check(s) {', '.join(bad)}")
    reports, skipped = [], []
    for n in names:
        try:
            reports.append(_check(n, spec, argparse.Namespace(), cfg))
        except (UnavailableError, UnsupportedClassification, ValueError) as exc:
            skipped.append({"check": n, "reason": str(exc)})
    docs = [r.to_dict() for r in reports]
    if not args.timing:
        for d in docs:
            d["runtime_s"] = None
    verdict = bool(reports) and all(r.verdict for r in reports)
    out = {"spec": spec.to_dict(), "seed": cfg.resolved_seed, "workers": cfg.workers,
           "reports": docs, "skipped": skipped, "verdict": verdict}
    return _json(out), verdict


COMMANDS = {"density": _cmd_density, "entrance": _cmd_entrance, "fluct": _cmd_fluct,
            "bridge": _cmd_bridge, "verify": _cmd_verify, "report": _cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        cfg = _run_config(args)
        text, ok = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, UnavailableError, UnsupportedClassification) as exc:
        print(f"levysup: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"levysup: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
