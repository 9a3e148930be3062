"""Command-line entry point: experiment orchestration and deterministic output.

Every command writes a table (CSV with a ``#``-prefixed metadata header, or a
JSON mirror) whose bytes depend only on the configuration: floats print with
17 significant digits, metadata keys are sorted, and the worker-count flag is
deliberately excluded from the output so results are reproducible across
parallelism settings.  All reductions are ordered and single-threaded.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NUMERIC_ERRORS, RoughMaxError, ValidationError
from .ergodic import cyclic_shift, ergodic_average, indicator, weighted_average
from .expsum import min_norm_sum, ratio_sweep
from .growth import GrowthFunction, Variant, make_growth
from .kernel import Normalization, build_kernel, decomposition_report
from .maximal import (
    build_scale_family,
    cz_decompose,
    default_lambda_grid,
    verify_family_hypotheses,
    weak_type_profile,
)
from .seqset import count, generate
from .signals import Signal

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


# ---------------------------------------------------------------------------
# growth spec grammar
# ---------------------------------------------------------------------------

_VARIANT_ARITY = {
    Variant.PURE_POWER: 0,
    Variant.POWER_LOG: 1,
    Variant.POWER_EXP_LOG: 2,
    Variant.POWER_ITER_LOG: 1,
}


def parse_growth_spec(text: str) -> GrowthFunction:
    """Parse ``variant:c:C_h[:A[:B|:m]]`` into a validated growth function."""
    parts = text.split(":")
    pos = [0]
    for p in parts[:-1]:
        pos.append(pos[-1] + len(p) + 1)

    def fail(i, msg):
        raise ValidationError(f"growth spec {text!r}: {msg} (at position {pos[i]})")

    try:
        variant = Variant(parts[0].lower())
    except ValueError:
        fail(0, f"unknown variant {parts[0]!r}")
    arity = _VARIANT_ARITY[variant]
    if len(parts) != 3 + arity:
        fail(0, f"{variant.value} takes {3 + arity} fields, got {len(parts)}")

    def number(i, name):
        try:
            return float(parts[i])
        except ValueError:
            fail(i, f"{name} is not a number: {parts[i]!r}")

    c = number(1, "exponent c")
    c_h = number(2, "constant C_h")
    kwargs = {}
    if variant is Variant.POWER_LOG:
        kwargs["a"] = number(3, "log exponent A")
    elif variant is Variant.POWER_EXP_LOG:
        kwargs["a"] = number(3, "coefficient A")
        kwargs["b"] = number(4, "exponent B")
    elif variant is Variant.POWER_ITER_LOG:
        try:
            kwargs["m"] = int(parts[3])
        except ValueError:
            fail(3, f"iteration depth m is not an integer: {parts[3]!r}")
    return make_growth(variant, c, c_h, **kwargs)


# ---------------------------------------------------------------------------
# deterministic table output
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (Fraction, str)):
        return str(v)
    return format(float(v), ".17g")


def write_table(path: str, meta: dict, columns: list, rows: list, fmt: str) -> None:
    if fmt == "csv":
        lines = [f"# {k}={meta[k]}" for k in sorted(meta)]
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        doc = {
            "meta": {k: str(meta[k]) for k in sorted(meta)},
            "columns": list(columns),
            "rows": [[_fmt(v) for v in row] for row in rows],
        }
        text = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def _meta(args, command: str, **extra) -> dict:
    meta = {"command": command, "version": __version__, "format": args.format}
    if getattr(args, "h", None):
        meta["h"] = args.h
    if getattr(args, "seed", None) is not None:
        meta["seed"] = args.seed
    meta.update(extra)
    return meta


def parse_meta(text: str) -> dict:
    """Read the ``# key=value`` header back out of a CSV table.

    The header records the full configuration (minus the worker count, which
    never affects output), so a command can be reconstructed and re-run from
    its own output file.
    """
    out = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        k, v = line[2:].split("=", 1)
        out[k] = v
    return out


def _parse_record(text: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ValidationError(f"parameter record entry {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_growth_table(args) -> int:
    g = parse_growth_spec(args.h)
    phi = g.inverse()
    ys = np.unique(np.concatenate([
        np.exp(np.linspace(math.log(max(phi.y0, 2.0 ** k)),
                           math.log(2.0 ** (k + 1)), 9))[:-1]
        for k in range(args.kmin, args.kmax)]))
    ys = ys[ys >= phi.y0]
    columns = ["y", "phi", "theta1", "theta2", "theta3",
               "vartheta1", "vartheta2", "vartheta3"]
    if g.c == 1.0:
        columns += ["sigma", "tau", "varrho"]
    rows = []
    for y in ys:
        u = float(phi.value(y))
        row = [y, u] + [float(phi.theta(y, i)) for i in (1, 2, 3)] \
            + [float(g.vartheta(u, i)) for i in (1, 2, 3)]
        if g.c == 1.0:
            row += [float(phi.sigma(y)), float(phi.tau(y)), float(g.varrho(u))]
        rows.append(row)
    write_table(args.out, _meta(args, "growth-table", kmin=args.kmin,
                                kmax=args.kmax), columns, rows, args.format)
    return EXIT_OK


def _cmd_seqset(args) -> int:
    g = parse_growth_spec(args.h)
    s = generate(g, args.nmax)
    phi = g.inverse()
    if args.emit:
        Path(args.emit).write_text(
            "\n".join(str(int(e)) for e in s.elements) + "\n", encoding="utf-8")
    rows = []
    k = 1
    while (1 << k) <= s.n_max:
        n = 1 << k
        cnt = count(s, n)
        phin = float(phi.value(float(n))) if n >= phi.y0 else float("nan")
        rows.append([n, cnt, phin, cnt / phin if phin > 0 else float("nan")])
        k += 1
    write_table(args.out, _meta(args, "seqset", nmax=args.nmax, p_min=s.p_min),
                ["N", "count", "phi_N", "ratio"], rows, args.format)
    return EXIT_OK


def _cmd_kernel_decomp(args) -> int:
    g = parse_growth_spec(args.h)
    s = generate(g, 4 * (1 << args.kmax))
    phi = g.inverse()
    rows = []
    for k in range(args.kmin, args.kmax + 1):
        ker = build_kernel(s, phi, 1 << k, Normalization.PHI_APPROX)
        r = decomposition_report(ker, phi)
        rows.append([k, r.scale_n, r.small_x_bound, r.gn_sup, r.en_sup,
                     r.gn_lipschitz, r.mass])
    write_table(args.out, _meta(args, "kernel-decomp", kmin=args.kmin,
                                kmax=args.kmax),
                ["k", "N", "small_x_bound", "gn_sup", "en_sup",
                 "gn_lipschitz", "mass"], rows, args.format)
    return EXIT_OK


def _cmd_expsum(args) -> int:
    g = parse_growth_spec(args.h)
    phi = g.inverse()
    params = _parse_record(args.params)
    m = int(params.get("m", 1))
    kappa = float(params.get("kappa", 1.0))
    rows = []
    if args.bound in ("single", "two"):
        for r in ratio_sweep(phi, args.bound, m, args.kmin, args.kmax, kappa):
            rows.append([int(math.log2(r.params["N"])), r.params["N"],
                         r.actual_abs, r.bound, r.ratio])
    else:
        for k in range(args.kmin, args.kmax + 1):
            n = 1 << k
            trunc = params.get("trunc", "sqrt")
            m_terms = int(math.isqrt(n)) if trunc == "sqrt" else int(trunc)
            actual, bound = min_norm_sum(phi, n, int(params.get("x", 0)),
                                         max(2, m_terms), 0, 0)
            rows.append([k, n, actual, bound, actual / bound])
    write_table(args.out, _meta(args, "expsum", bound=args.bound,
                                kmin=args.kmin, kmax=args.kmax,
                                params=args.params),
                ["k", "N", "actual_abs", "bound", "ratio"], rows, args.format)
    return EXIT_OK


def _parse_corpus(spec: str) -> Signal:
    if spec == "delta":
        return Signal.delta(0)
    parts = spec.split(":")
    if parts[0] == "random" and len(parts) == 3:
        k, seed = int(parts[1]), int(parts[2])
        rng = np.random.default_rng(seed)
        sites = rng.integers(0, 1 << 14, k)
        d = {}
        for p in sites:
            d[int(p)] = d.get(int(p), 0.0) + 1.0
        return Signal.from_dict(d)
    raise ValidationError(f"corpus spec {spec!r} is not delta or random:K:seed")


def _cmd_weaktype(args) -> int:
    g = parse_growth_spec(args.h)
    s = generate(g, 4 * (1 << args.nhi))
    phi = g.inverse()
    family = build_scale_family(s, phi, args.nlo, args.nhi)
    f = _parse_corpus(args.corpus)
    profile = weak_type_profile(family, f, default_lambda_grid(family, f))
    mf_l1 = f.l1()
    rows = [[lam, int(round(ratio * mf_l1 / lam)), ratio] for lam, ratio in profile]
    write_table(args.out, _meta(args, "weaktype", nlo=args.nlo, nhi=args.nhi,
                                corpus=args.corpus),
                ["lambda", "superlevel_count", "ratio"], rows, args.format)
    return EXIT_OK


def _read_input_signal(path: str) -> dict:
    values: dict = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.lower().startswith("x,"):
            continue
        x_str, v_str = line.split(",", 1)
        values[int(x_str)] = values.get(int(x_str), 0) + Fraction(v_str)
    return values


def _cmd_cz(args) -> int:
    values = _read_input_signal(args.input)
    lam = Fraction(args.height)
    cz = cz_decompose(values, lam)
    if args.emit_atoms:
        outdir = Path(args.emit_atoms)
        outdir.mkdir(parents=True, exist_ok=True)
        for a in sorted(cz.atoms, key=lambda a: (a.scale, a.index)):
            lines = [f"{x},{v}" for x, v in sorted(a.values.items())]
            (outdir / f"atom_{a.scale}_{a.index}.csv").write_text(
                "\n".join(lines) + "\n", encoding="utf-8")
    l1 = sum(values.values())
    recon_ok = cz.reconstruction() == {x: v for x, v in values.items() if v != 0}
    good_linf = max(cz.good.values()) if cz.good else Fraction(0)
    rows = [[lam, len(cz.atoms), l1, cz.total_cube_size(), good_linf, recon_ok]]
    write_table(args.out, _meta(args, "cz", input=args.input, height=args.height),
                ["lambda", "n_atoms", "l1", "sum_cube_sizes", "good_linf",
                 "reconstruction_exact"], rows, args.format)
    return EXIT_OK


def _parse_system(spec: str):
    parts = spec.split(":")
    if parts[0] == "shift" and len(parts) == 3:
        return cyclic_shift(int(parts[1]), int(parts[2]))
    raise ValidationError(f"system spec {spec!r} is not shift:m:step")


def _parse_observable(spec: str, size: int):
    parts = spec.split(":")
    if parts[0] == "indicator" and len(parts) == 2:
        state = int(parts[1])
        if not (0 <= state < size):
            raise ValidationError(f"indicator state {state} outside 0..{size - 1}")
        return indicator(size, state)
    raise ValidationError(f"observable spec {spec!r} is not indicator:k")


def _cmd_ergodic(args) -> int:
    g = parse_growth_spec(args.h)
    s = generate(g, 1 << args.kmax)
    phi = g.inverse()
    system = _parse_system(args.system)
    f = _parse_observable(args.f, system.size)
    rows = []
    for k in range(args.kmin, args.kmax + 1):
        n = 1 << k
        rows.append([k, n,
                     ergodic_average(system, s, f, args.x, n),
                     weighted_average(system, s, phi, f, args.x, n)])
    write_table(args.out, _meta(args, "ergodic", system=args.system, f=args.f,
                                x=args.x, kmin=args.kmin, kmax=args.kmax),
                ["k", "N", "average", "weighted_average"], rows, args.format)
    return EXIT_OK


def _cmd_verify_family(args) -> int:
    g = parse_growth_spec(args.h)
    s = generate(g, 4 * (1 << args.nhi))
    phi = g.inverse()
    family = build_scale_family(s, phi, args.nlo, args.nhi,
                                Normalization.PHI_APPROX)
    rep = verify_family_hypotheses(family, phi)
    rows = []
    for i, sc in enumerate(rep.scales):
        rows.append([int(math.log2(sc)), sc, rep.d[i], rep.big_d[i],
                     rep.residual_sup[i], rep.f0_d_product[i],
                     rep.f_sup_times_d[i], rep.lipschitz_ratio[i]])
    write_table(args.out,
                _meta(args, "verify-family", nlo=args.nlo, nhi=args.nhi,
                      eps0=_fmt(rep.eps0), eps1=_fmt(rep.eps1),
                      eps2=_fmt(rep.eps2), growth_m=_fmt(rep.growth_m)),
                ["n", "N", "d_n", "D_n", "residual_sup", "f0_d_product",
                 "f_sup_times_d", "lipschitz_ratio"], rows, args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p, with_h=True):
    if with_h:
        p.add_argument("--h", required=True, help="growth spec variant:c:C_h[:A[:B|:m]]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1,
                   help="accepted for interface compatibility; execution is "
                        "sequential and output never depends on it")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="roughmax",
        description="numerical experiments on maximal averages along "
                    "floor-of-smooth-growth integer sequences")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("growth-table", help="correction-function table over a dyadic grid")
    _add_common(p)
    p.add_argument("--kmin", type=int, default=4)
    p.add_argument("--kmax", type=int, default=24)
    p.set_defaults(func=_cmd_growth_table)

    p = sub.add_parser("seqset", help="generate the integer set and its counting table")
    _add_common(p)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--emit", help="also write one element per line to this path")
    p.set_defaults(func=_cmd_seqset)

    p = sub.add_parser("kernel-decomp", help="autocorrelation decomposition sweep")
    _add_common(p)
    p.add_argument("--kmin", type=int, default=12)
    p.add_argument("--kmax", type=int, default=20)
    p.set_defaults(func=_cmd_kernel_decomp)

    p = sub.add_parser("expsum", help="phase-sum ratio sweeps")
    _add_common(p)
    p.add_argument("--bound", choices=("single", "two", "minnorm"), required=True)
    p.add_argument("--kmin", type=int, default=12)
    p.add_argument("--kmax", type=int, default=20)
    p.add_argument("--params", default="", help="record like m=1,kappa=1.0")
    p.set_defaults(func=_cmd_expsum)

    p = sub.add_parser("weaktype", help="superlevel-set ratio profile")
    _add_common(p)
    p.add_argument("--nlo", type=int, default=8)
    p.add_argument("--nhi", type=int, default=14)
    p.add_argument("--corpus", default="delta", help="delta or random:K:seed")
    p.set_defaults(func=_cmd_weaktype)

    p = sub.add_parser("cz", help="stopping-time decomposition of a CSV signal")
    _add_common(p, with_h=False)
    p.add_argument("--input", required=True, help="CSV of x,value rows")
    p.add_argument("--height", required=True, help="decomposition height (exact rational)")
    p.add_argument("--emit-atoms", dest="emit_atoms", help="directory for per-atom CSVs")
    p.set_defaults(func=_cmd_cz)

    p = sub.add_parser("ergodic", help="averages along the set on a finite system")
    _add_common(p)
    p.add_argument("--system", required=True, help="shift:m:step")
    p.add_argument("--f", required=True, help="indicator:k")
    p.add_argument("--x", type=int, default=0)
    p.add_argument("--kmin", type=int, default=10)
    p.add_argument("--kmax", type=int, default=20)
    p.set_defaults(func=_cmd_ergodic)

    p = sub.add_parser("verify-family", help="kernel-family hypothesis measurements")
    _add_common(p)
    p.add_argument("--nlo", type=int, default=12)
    p.add_argument("--nhi", type=int, default=20)
    p.set_defaults(func=_cmd_verify_family)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.workers < 1:
        raise ValidationError(f"--workers {args.workers} must be >= 1")
    return args.func(args)


def main(argv=None) -> int:
    try:
        return run(argv)
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RoughMaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
