"""Batch experiment driver.

    abshift <experiment> --config cfg.json --out results.jsonl [--format jsonl|csv]
            [--tol 1e-10] [--seed 0]

Every output record has the same keys; values that do not apply are null.
Exit status: 0 on success, 2 for an unusable config, 3 when a numerical
tolerance could not be met (the records produced so far are still written,
with the failing ones flagged).
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import abkernel, evolution, iodo, quadrature, superosc
from .errors import DomainError, NumericalError
from .specfun import ln_gamma

FIELDS = ("experiment", "r", "phi", "t", "xi", "a", "n", "re", "im", "error", "kappa", "flags")
EXPERIMENTS = ("superosc", "kernel", "evolve", "supershift", "verify-bounds")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    physics: abkernel.PhysicsConfig
    superosc: superosc.SuperoscSpec
    n_list: list
    targets: list
    winding: abkernel.WindingTruncation
    quad: quadrature.QuadratureSpec
    M_max: object = None
    evolve_ab: tuple = (1.2, 0.5)
    grid: dict = field(default_factory=dict)
    sources: list = field(default_factory=list)
    samples: int = 200


def _series(coeffs, name):
    if not isinstance(coeffs, list) or not coeffs:
        raise ConfigError(f"{name} must be a nonempty list of coefficients")
    try:
        return superosc.EntireSeries.polynomial(
            [complex(*c) if isinstance(c, list) else complex(c) for c in coeffs])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad coefficients for {name}: {exc}") from None


def load_config(path, tol=None):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        phys = abkernel.PhysicsConfig(**raw.get("physics", {}))
        so = raw.get("superosc", {})
        n_list = so.get("n", [4, 8, 16, 24])
        n_list = [n_list] if isinstance(n_list, int) else list(n_list)
        if not n_list:
            raise ConfigError("superosc.n must not be empty")
        spec = superosc.SuperoscSpec(n_list[0], float(so.get("a", 1.3)),
                                     _series(so.get("g", [0, 1]), "g"),
                                     _series(so.get("h", [0]), "h"))
        targets = raw.get("targets", [])
        if not targets:
            raise ConfigError("no target points")
        targets = [abkernel.PolarPoint(float(p["r"]), float(p.get("phi", 0.0))) for p in targets]
        tr = dict(raw.get("truncation", {}))
        if tol is not None:
            tr["tol"] = tol
        winding = abkernel.WindingTruncation(tr.get("N"), float(tr.get("tail_tol", 1e-14)))
        quad = quadrature.QuadratureSpec(int(tr.get("n_theta", 256)), int(tr.get("n_u", 96)),
                                         tr.get("u_max"), float(tr.get("tol", 1e-10)))
        ev = raw.get("evolve", {})
        kern = raw.get("kernel", {})
        sources = kern.get("sources") or [
            {"rho": rho, "theta": 2 * math.pi * k / 8} for rho in (0.5, 1.0, 2.0, 4.0)
            for k in range(8)]
        return ExperimentConfig(
            phys, spec, n_list, targets, winding, quad, tr.get("M_max"),
            (float(ev.get("a", 1.2)), float(ev.get("b", 0.5))),
            raw.get("grid", {}), sources, int(raw.get("verify_bounds", {}).get("samples", 200)))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def record(experiment, cfg=None, target=None, a=None, n=None, value=None, error=None,
           kappa=None, flags=None):
    value = None if value is None else complex(value)
    return {
        "experiment": experiment,
        "r": None if target is None else _num(target.r),
        "phi": None if target is None else _num(target.phi),
        "t": None if cfg is None else _num(cfg.t),
        "xi": None if cfg is None else _num(cfg.xi),
        "a": _num(a),
        "n": n,
        "re": None if value is None else _num(value.real),
        "im": None if value is None else _num(value.imag),
        "error": _num(error),
        "kappa": _num(kappa),
        "flags": {k: (_num(v) if isinstance(v, (float, np.floating)) else v)
                  for k, v in (flags or {}).items()},
    }


def _failure(experiment, cfg, target, exc, n=None, a=None):
    return record(experiment, cfg, target, a=a, n=n,
                  flags={"failed": True, "message": str(exc)})


def run_superosc(ec, args):
    xs = ec.grid.get("x", [-1.0, -0.5, 0.0, 0.5, 1.0])
    ys = ec.grid.get("y", [0.0])
    sp = ec.superosc
    rows = []
    for idx, (x, y) in enumerate((x, y) for x in xs for y in ys):
        limit = superosc.y_limit(x, y, sp)
        for n in ec.n_list:
            s = superosc.SuperoscSpec(n, sp.a, sp.g, sp.h)
            v = superosc.y_n(x, y, s, tol=args.tol_report)
            flags = dict(v.flags, x=x, y=y, limit_distance=abs(v.value - limit))
            rows.append((idx, n, record("superosc", a=sp.a, n=n, value=v.value, error=v.error,
                                        kappa=v.condition_number, flags=flags)))
    return rows, False


def run_kernel(ec, args):
    cfg, rows, failed = ec.physics, [], False
    for idx, tg in enumerate(ec.targets):
        for k, src in enumerate(ec.sources):
            rho, theta = float(src["rho"]), float(src["theta"])
            try:
                F, info = abkernel.f_xi(cfg, tg.r, tg.phi, theta, rho, ec.winding, full_output=True)
            except (NumericalError, DomainError) as exc:
                rows.append((idx, k, _failure("kernel", cfg, tg, exc)))
                failed = True
                continue
            bound = abkernel.f_xi_bound(cfg, tg.r, rho)
            flags = {"rho": rho, "theta": theta, "N": info.N, "bound": bound,
                     "bound_ok": bool(abs(F) <= bound)}
            rows.append((idx, k, record("kernel", cfg, tg, value=F,
                                        error=info.tail + info.bessel_tail, flags=flags)))
    return rows, failed


def run_evolve(ec, args):
    cfg, rows, failed = ec.physics, [], False
    a, b = ec.evolve_ab
    for idx, tg in enumerate(ec.targets):
        try:
            d = quadrature.psi_direct(cfg, a, b, tg, ec.winding, ec.quad)
            s = evolution.psi_series(cfg, a, b, tg, ec.M_max, ec.winding, ec.quad)
        except (NumericalError, DomainError) as exc:
            rows.append((idx, 0, _failure("evolve", cfg, tg, exc, a=a)))
            failed = True
            continue
        diff = abs(d.value - s.value)
        agree = bool(diff <= d.error + s.error)
        for k, (method, v) in enumerate((("direct", d), ("series", s))):
            flags = {"method": method, "b": b, "difference": diff, "agree": agree,
                     "terms": v.terms_used}
            rows.append((idx, k, record("evolve", cfg, tg, a=a, value=v.value, error=v.error,
                                        kappa=v.condition_number, flags=flags)))
    return rows, failed


def run_supershift(ec, args):
    cfg, rows, failed = ec.physics, [], False
    for idx, tg in enumerate(ec.targets):
        try:
            rep = evolution.supershift_convergence_report(
                cfg, ec.superosc, tg, ec.n_list, ec.M_max, ec.winding, ec.quad, args.tol_report)
        except (NumericalError, DomainError) as exc:
            rows.append((idx, None, _failure("supershift", cfg, tg, exc, a=ec.superosc.a)))
            failed = True
            continue
        decreasing = rep.decreasing()
        for row in rep.rows:
            flags = {"estimate": row.estimate, "cancellation": row.flagged,
                     "limit_re": rep.limit.value.real, "limit_im": rep.limit.value.imag,
                     "limit_error": rep.limit.error, "decreasing": decreasing}
            rows.append((idx, row.n, record("supershift", cfg, tg, a=ec.superosc.a, n=row.n,
                                            value=row.value, error=row.error, kappa=row.kappa,
                                            flags=flags)))
    return rows, failed


def _kernel_samples(rng, count):
    # envelope: r in [0, 2], rho in [0, 4], t in [0.5, 2], xi in [-2, 2]
    for k in range(count):
        yield (float(rng.uniform(0, 2)), float(rng.uniform(0, 2 * math.pi)),
               float(rng.uniform(0, 2 * math.pi)), float(rng.uniform(0, 4)),
               float(rng.uniform(0.5, 2)), float(rng.uniform(-2, 2)), k % 2 == 1)


def run_verify_bounds(ec, args):
    rng = np.random.default_rng(args.seed)
    rows, failed = [], False
    base = ec.physics
    for k, (r, phi, theta, rho, t, xi, rotated) in enumerate(_kernel_samples(rng, ec.samples)):
        cfg = abkernel.PhysicsConfig(base.M, base.hbar, t, xi)
        tg = abkernel.PolarPoint(r, phi)
        z = rho * quadrature.ROTATION if rotated else rho
        try:
            F = abkernel.f_xi(cfg, r, phi, theta, z, ec.winding)
        except (NumericalError, DomainError) as exc:
            rows.append((0, k, _failure("verify-bounds", cfg, tg, exc)))
            failed = True
            continue
        bound = abkernel.f_xi_bound(cfg, r, rho)
        rows.append((0, k, record("verify-bounds", cfg, tg, value=F, flags={
            "rho": rho, "theta": theta, "rotated": rotated, "bound": bound,
            "bound_ok": bool(abs(F) <= bound)})))

    # Gamma/Hoelder inequality: Gamma(n/q + 1) <= (n!)^(1/q)
    k = 0
    for q in (1.0, 1.5, 2.0, 4.0):
        for n in range(61):
            lhs, rhs = ln_gamma(n / q + 1.0), ln_gamma(n + 1.0) / q
            rows.append((1, k, record("verify-bounds/gamma", n=n, flags={
                "q": q, "log_lhs": lhs, "log_rhs": rhs, "bound_ok": bool(lhs <= rhs + 1e-12)})))
            k += 1

    # operator estimate at w = 0 against its coefficient majorant
    g, h = ec.superosc.g, ec.superosc.h
    tests = {"one": superosc.EntireSeries.polynomial([1.0]),
             "exp": superosc.EntireSeries.exponential(1.5, 30),
             "cubic": superosc.EntireSeries.polynomial([0, 0, 0, 1.0])}
    k = 0
    for name, f in tests.items():
        C_f, b = iodo.coeff_decay_certificate(f)
        for m in range(7):
            for l in range(m + 1):
                idx = iodo.OperatorIndex(m, l)
                v = iodo.operator_apply_at_zero(g, h, idx, f, tol=math.inf)
                bound = iodo.step1_bound(g, h, idx, C_f, b)
                rows.append((2, k, record("verify-bounds/step1", n=m, value=v, flags={
                    "f": name, "m": m, "l": l, "bound": bound,
                    "bound_ok": bool(abs(v) <= bound * (1 + 1e-12))})))
                k += 1
    return rows, failed


RUNNERS = {"superosc": run_superosc, "kernel": run_kernel, "evolve": run_evolve,
           "supershift": run_supershift, "verify-bounds": run_verify_bounds}


def _sort_key(item):
    idx, n, rec = item
    return (rec["experiment"], idx, -1 if n is None else n)


def write_records(records, path, fmt):
    with open(path, "w", newline="") as fh:
        if fmt == "jsonl":
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=False) + "\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIELDS)
            for rec in records:
                row = [rec[k] for k in FIELDS[:-1]] + [json.dumps(rec["flags"], sort_keys=True)]
                w.writerow(["" if v is None else v for v in row])


def build_parser():
    p = argparse.ArgumentParser(prog="abshift", description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--tol", type=float, default=None,
                   help="numerical tolerance (overrides truncation.tol)")
    p.add_argument("--seed", type=int, default=0, help="seed for the bound-sweep sampler")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.tol_report = 1e-3 if args.tol is None else args.tol
    try:
        ec = load_config(args.config, args.tol)
    except (ConfigError, DomainError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    rows, failed = RUNNERS[args.experiment](ec, args)
    rows.sort(key=_sort_key)
    write_records([rec for _, _, rec in rows], args.out, args.format)
    if failed:
        print(json.dumps({"error": "numerical", "message": "some records failed; see flags"}),
              file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
