"""Command line front end: coefficient tables, bases and verification suites.

Exit codes: 0 success, 1 usage error or failed verification, 2 a strict run
hit an unconverged sum.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

from . import arith, bases, kloosterman, poincare, specfun
from .bases import _json_str, _num
from .poincare import NotConverged, TruncationPolicy, Weight

EXIT_OK, EXIT_USAGE, EXIT_UNCONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    policy: TruncationPolicy
    fmt: str
    out: str | None
    threads: int
    reproducible: bool


def _int_range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range {text}")
        return list(range(lo, hi + 1))
    return [int(x) for x in text.split(",")]


def _add_policy(p: argparse.ArgumentParser, c_max: int = 4096, tol: float = 1e-8):
    p.add_argument("--c-max", type=int, default=c_max, help="largest modulus multiplier summed")
    p.add_argument("--c-start", type=int, default=64)
    p.add_argument("--tol", type=float, default=tol, help="absolute tolerance on each value")
    p.add_argument("--rtol", type=float, default=0.0)
    p.add_argument("--stability-factor", type=int, default=2)
    p.add_argument("--strict", action="store_true", help="fail with exit code 2 on any unconverged value")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--reproducible", action="store_true", help="omit the timestamp field")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maass-poincare", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeff", help="Fourier coefficients of one Poincare series")
    p.add_argument("--plus", action="store_true", help="plus-space projection (needs 4 | N, odd 2k)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--twice-k", type=int, required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--n", type=_int_range, required=True, help="A..B or a comma list")
    p.add_argument("--derivative", action="store_true", help="d/ds at s = 3/4 (weight 3/2, plus space)")
    p.add_argument("--step", type=float, default=1e-3)
    _add_policy(p)

    p = sub.add_parser("basis", help="f_d, g_D or the mock g_D as a q-series")
    p.add_argument("kind", choices=("f", "g", "gmock", "theta"))
    p.add_argument("--d", type=int)
    p.add_argument("--D", type=int)
    p.add_argument("--nmax", type=int, default=12)
    p.add_argument("--route", choices=("formula", "expansion"), default="formula")
    p.add_argument("--step", type=float, default=1e-3)
    _add_policy(p, c_max=8192, tol=1e-2)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite")
    p.add_argument("--grid", choices=("small", "full"), default="small")
    _add_policy(p, c_max=8192, tol=1e-2)

    p = sub.add_parser("kloosterman", help="one generalized Kloosterman sum")
    p.add_argument("--twice-k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    return parser


def _config(args) -> RunConfig:
    threads = args.threads
    env = os.environ.get("MAASS_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError:
            raise UsageError(f"MAASS_THREADS must be an integer, got {env!r}")
    if threads < 1:
        raise UsageError("thread count must be at least 1")
    try:
        policy = TruncationPolicy(
            c_max=args.c_max,
            tol=args.tol,
            stability_factor=args.stability_factor,
            c_start=min(args.c_start, args.c_max),
            rtol=args.rtol,
            strict=args.strict,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    return RunConfig(args.command, policy, args.format, args.out, threads, args.reproducible)


def _emit(text: str, cfg_out: str | None):
    if cfg_out:
        with open(cfg_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _stamp(reproducible: bool) -> list[str]:
    if reproducible:
        return []
    import datetime as dt

    return [f'  "generated_at": {_json_str(dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"))}']


def cmd_coeff(args, cfg: RunConfig) -> int:
    weight = Weight(args.twice_k)
    ns = args.n
    skipped = []
    if args.plus:
        if not weight.half_integral or args.N % 4:
            raise UsageError("--plus needs an odd --twice-k and 4 | N")
        skipped = [n for n in ns if not arith.in_plus_class(n, weight.twice_k)]
        ns = [n for n in ns if arith.in_plus_class(n, weight.twice_k)]
    try:
        if args.derivative:
            if not args.plus or args.twice_k != 3 or args.N != 4:
                raise UsageError("--derivative is available for --plus --twice-k 3 --N 4")
            table = poincare.coeff_b_plus_ds_table(args.m, ns, cfg.policy, args.step, threads=cfg.threads)
        else:
            table = poincare.coefficient_table(
                args.m, weight, args.N, ns, args.s, cfg.policy, plus=args.plus, threads=cfg.threads
            )
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    except (poincare.PoleAtS, poincare.PlusSpaceViolation, ValueError) as exc:
        raise UsageError(str(exc))
    rows = [(n, table[n]) for n in ns]
    if cfg.fmt == "csv":
        lines = ["# lossy export: JSON is canonical", "n,re,im,err,c_used,converged"]
        for n, v in rows:
            c = complex(v.value)
            lines.append(f"{n},{_num(c.real)},{_num(c.imag)},{_num(v.error_estimate)},{v.c_used},{int(v.converged)}")
        text = "\n".join(lines) + "\n"
    else:
        body = ", ".join(
            f"[{n}, {_num(complex(v.value).real)}, {_num(complex(v.value).imag)}, {_num(v.error_estimate)}, "
            f"{v.c_used}, {'true' if v.converged else 'false'}]"
            for n, v in rows
        )
        parts = [
            f'  "m": {args.m}',
            f'  "weight_times_2": {args.twice_k}',
            f'  "level": {args.N}',
            f'  "s": {_num(args.s)}',
            f'  "plus_space": {"true" if args.plus else "false"}',
            f'  "derivative": {"true" if args.derivative else "false"}',
            '  "columns": ["n", "re", "im", "error_estimate", "c_used", "converged"]',
            f'  "rows": [{body}]',
            '  "skipped_off_class": [' + ", ".join(str(n) for n in skipped) + "]",
        ] + _stamp(cfg.reproducible)
        text = "{\n" + ",\n".join(parts) + "\n}\n"
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_basis(args, cfg: RunConfig) -> int:
    try:
        if args.kind == "f":
            if args.d is None:
                raise UsageError("basis f needs --d")
            q = bases.f_series(args.d, args.nmax, cfg.policy, threads=cfg.threads)
        elif args.kind == "g":
            if args.D is None:
                raise UsageError("basis g needs --D")
            q = bases.g_series_neg(args.D, args.nmax, cfg.policy)
        elif args.kind == "gmock":
            if args.D is None:
                raise UsageError("basis gmock needs --D")
            q = bases.g_mock_series(args.D, args.nmax, cfg.policy, step=args.step, route=args.route)
        else:
            q = bases.theta_series(args.nmax)
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    except ValueError as exc:
        raise UsageError(str(exc))
    text = q.to_csv() if cfg.fmt == "csv" else q.to_json(reproducible=cfg.reproducible)
    _emit(text, cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites; each returns a list of (name, defect, tolerance)


def _suite_kloosterman_symmetry(args, cfg):
    worst = 0.0
    for c in range(4, 129, 4):
        for m in range(-12, 13):
            for n in range(-12, 13):
                a = kloosterman.kloosterman_sum(3, m, n, c)
                b = kloosterman.kloosterman_sum(3, n, m, c)
                h = -1j * kloosterman.kloosterman_sum(1, -m, -n, c)
                worst = max(worst, abs(a - b), abs(a - h))
    return [("K_3/2(m,n,c) = K_3/2(n,m,c) = -i K_1/2(-m,-n,c)", worst, 1e-10)]


def _suite_plus_identities(args, cfg):
    worst0 = worst1 = 0.0
    for twice_k in (1, 3, 5):
        lam = (twice_k - 1) // 2
        for c in (1, 3, 5, 7, 9):
            for m in range(-8, 9):
                if not arith.in_plus_class(m, twice_k):
                    continue
                for n in range(-12, 13):
                    if n % 4 == 0:
                        worst0 = max(worst0, kloosterman.plus_identity_zero_class(m, n, 1, c, twice_k))
                    elif ((-1) ** lam * n) % 4 == 1:
                        worst1 = max(worst1, kloosterman.plus_identity_one_class(m, n, 1, c, twice_k))
    return [("n = 0 mod 4 class", worst0, 1e-10), ("(-1)^lambda n = 1 mod 4 class", worst1, 1e-10)]


def _suite_theta(args, cfg):
    theta = _theta_expansion(60)
    z = 0.13 + 0.9j
    out = []
    for g in (((1, 0), (4, 1)), ((1, 1), (0, 1)), ((-3, 1), (-4, 1))):
        r = poincare.modularity_residual(lambda w: theta(w, y_min=0.01), g, z, Weight(1))
        out.append((f"theta under {g}", r, 1e-9))
    return out


def _theta_expansion(n_max: int) -> poincare.HarmonicExpansion:
    exp = poincare.HarmonicExpansion(Weight(1), 4, n_max=n_max * n_max)
    for m in range(n_max + 1):
        exp.add_hol(m * m, 1.0 if m == 0 else 2.0)
    return exp


def _suite_duality(args, cfg):
    Ds = (-1, -4) if args.grid == "small" else (-1, -4, -5, -8)
    return [
        (f"A({r.D},{r.d}) + B({r.D},{r.d})", r.relative_defect, r.tolerance)
        for r in bases.duality_grid(Ds, (0, -3, -4), cfg.policy)
    ]


def _suite_shadow(args, cfg):
    out = []
    for n, (got, want) in bases.shadow_check(3, (0, 1, 4), cfg.policy).items():
        out.append((f"xi(h_3) at q^{n}", abs(got - want), 1e-2))
    for n, (got, want) in bases.shadow_check(0, (0, 1, 4)).items():
        out.append((f"xi(h_0) at q^{n}", abs(got - want), 1e-2))
    return out


def _suite_hurwitz(args, cfg):
    ns = [3, 4, 7, 8, 11, 12, 15, 16, 19, 20, 23, 24]
    table = poincare.coefficient_table(0, Weight(3), 4, ns, 0.75, cfg.policy, plus=True, threads=cfg.threads)
    out = []
    for n in ns:
        h = -math.sqrt(n / math.pi) / 6 * complex(table[n].value).real
        out.append((f"H({n})", abs(h - float(arith.hurwitz_class_number(n))), 1e-2))
    return out


def _suite_eisenstein(args, cfg):
    pol = TruncationPolicy(c_max=cfg.policy.c_max, tol=1e-10, rtol=1e-9)
    table = poincare.coefficient_table(0, Weight(8), 1, range(1, 21), 2.0, pol)
    c1 = complex(table[1].value)
    out = []
    for n in range(1, 21):
        ratio = complex(table[n].value) / c1 * n**3
        want = arith.divisor_sigma(n, 3)
        out.append((f"ratio at n = {n}", abs(ratio - want) / want, 1e-6))
    return out


def _suite_specfun(args, cfg):
    out = []
    for mu, y in ((0.25, 1.5), (-0.3, 0.4), (0.9, 7.0)):
        nu = mu + 0.5
        ref = specfun.gamma(2 * mu + 2) * y**-mu * math.exp(y / 2)
        val = specfun.whittaker_M(mu, nu, y) + (2 * mu + 1) * specfun.whittaker_W(mu, nu, y)
        out.append((f"M + (2mu+1) W at mu = {mu}, y = {y}", abs(val - ref) / ref, 1e-9))
    a, b = specfun.whittaker_W(0.75, 0.25, 3.0), specfun.whittaker_W(0.75, -0.25, 3.0)
    out.append(("W symmetry in nu", abs(a - b), 1e-10))
    x = 1.0
    out.append(("Gamma(1/2, 1) = sqrt(pi) erfc(1)", abs(specfun.inc_gamma_upper(0.5, x) - math.sqrt(math.pi) * math.erfc(1)), 1e-12))
    return out


SUITES = {
    "kloosterman-symmetry": _suite_kloosterman_symmetry,
    "plus-identities": _suite_plus_identities,
    "theta-automorphy": _suite_theta,
    "duality": _suite_duality,
    "shadow": _suite_shadow,
    "hurwitz": _suite_hurwitz,
    "eisenstein": _suite_eisenstein,
    "specfun": _suite_specfun,
}


def cmd_verify(args, cfg: RunConfig) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(sorted(SUITES))}")
    try:
        checks = SUITES[args.suite](args, cfg)
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    ok = all(d <= t for _, d, t in checks)
    rows = ",\n".join(
        f'    {{"name": {_json_str(name)}, "defect": {_num(d)}, "tolerance": {_num(t)}, '
        f'"passed": {"true" if d <= t else "false"}}}'
        for name, d, t in checks
    )
    parts = [
        f'  "suite": {_json_str(args.suite)}',
        f'  "passed": {"true" if ok else "false"}',
        f'  "checks": [\n{rows}\n  ]',
    ] + _stamp(cfg.reproducible)
    _emit("{\n" + ",\n".join(parts) + "\n}\n", cfg.out)
    return EXIT_OK if ok else 1


def cmd_kloosterman(args) -> int:
    try:
        v = kloosterman.kloosterman_sum(args.twice_k, args.m, args.n, args.c)
    except ValueError as exc:
        raise UsageError(str(exc))
    print(f"{_num(v.real)} {_num(v.imag)}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "kloosterman":
            return cmd_kloosterman(args)
        cfg = _config(args)
        if args.command == "coeff":
            return cmd_coeff(args, cfg)
        if args.command == "basis":
            return cmd_basis(args, cfg)
        return cmd_verify(args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
