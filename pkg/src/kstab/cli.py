"""Command line front end: polynomial parsing, job files and report emission."""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, fields, replace
from fractions import Fraction

import numpy as np

from .curves import SingularCurveError
from .futaki import donaldson_futaki
from .geometry import RayConfig, kenergy_ray
from .ideal import Ideal, OneParamSubgroup, hilbert_data, initial_ideal
from .poly import FitError, MultiPoly, binom_identity
from .raylab import VerifyConfig, ladder, verify_asymptotics

__all__ = ["JobConfig", "InputError", "main", "parse_poly", "parse_lambda"]

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3
ALIASES = {"x": 0, "y": 1, "z": 2}
WEIGHT_SIGNS = {"dual": "section-dual", "function": "function"}


class InputError(ValueError):
    """Malformed user input; mapped to exit code 2."""


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>x\d+|[A-Za-z])|(?P<op>[-+*/^()]))")


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise InputError(f"unexpected character {text[col]!r} at position {col}")
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def _var_index(name: str, nvars: int | None, pos: int) -> int:
    if name in ALIASES:
        if nvars not in (None, 3):
            raise InputError(f"alias {name!r} at position {pos} needs exactly three variables")
        return ALIASES[name]
    if re.fullmatch(r"x\d+", name):
        i = int(name[1:])
        if nvars is not None and i >= nvars:
            raise InputError(f"variable {name!r} at position {pos} outside x0..x{nvars - 1}")
        return i
    raise InputError(f"unknown variable {name!r} at position {pos}")


def parse_poly(text: str, nvars: int | None = None, *, homogeneous: bool = True) -> MultiPoly:
    """Exact polynomial from text such as ``"x*z - y^2"`` or ``"x0^3 + 1/2 x1^3"``.

    Variables are ``x0..xN``; ``x, y, z`` alias ``x0, x1, x2`` in three
    variables.  ``*`` is optional and coefficients may be rational.
    """
    toks = _tokens(text)
    terms: list[tuple[Fraction, dict[int, int]]] = []
    k = 0

    def peek():
        return toks[k]

    def take(kind=None, value=None):
        nonlocal k
        t = toks[k]
        if (kind and t[0] != kind) or (value and t[1] != value):
            what = value or kind
            found = t[1] or "end of input"
            raise InputError(f"expected {what} at position {t[2]}, found {found!r}")
        k += 1
        return t

    if peek()[0] == "end":
        raise InputError("empty polynomial")
    sign = 1
    first = True
    while True:
        t = peek()
        if t[0] == "op" and t[1] in "+-":
            sign = -1 if t[1] == "-" else 1
            take()
        elif not first:
            raise InputError(f"expected '+' or '-' at position {t[2]}, found {t[1]!r}")
        first = False
        coef = Fraction(sign)
        powers: dict[int, int] = {}
        factors = 0
        while True:
            t = peek()
            if t[0] == "num":
                take()
                c = Fraction(int(t[1]))
                if peek()[0] == "op" and peek()[1] == "/":
                    take()
                    den = take("num")
                    if int(den[1]) == 0:
                        raise InputError(f"zero denominator at position {den[2]}")
                    c /= int(den[1])
                coef *= c
            elif t[0] == "var":
                take()
                i = _var_index(t[1], nvars, t[2])
                e = 1
                if peek()[0] == "op" and peek()[1] == "^":
                    take()
                    e = int(take("num")[1])
                powers[i] = powers.get(i, 0) + e
            else:
                break
            factors += 1
            if peek()[0] == "op" and peek()[1] == "*":
                take()
                if peek()[0] not in ("num", "var"):
                    raise InputError(f"dangling '*' before position {peek()[2]}")
        if factors == 0:
            t = peek()
            raise InputError(f"expected a term at position {t[2]}, found {t[1] or 'end of input'!r}")
        terms.append((coef, powers))
        if peek()[0] == "end":
            break
    if nvars is None:
        top = max((i for _, p in terms for i in p), default=0)
        nvars = max(3, top + 1)
    acc: dict[tuple[int, ...], Fraction] = {}
    for c, p in terms:
        alpha = tuple(p.get(i, 0) for i in range(nvars))
        acc[alpha] = acc.get(alpha, Fraction(0)) + c
    poly = MultiPoly(acc, nvars)
    if poly.is_zero():
        raise InputError("polynomial is identically zero")
    if homogeneous and not poly.is_homogeneous():
        raise InputError(f"polynomial {text!r} is not homogeneous")
    return poly


def parse_lambda(text, nvars: int | None = None) -> OneParamSubgroup:
    """Zero-sum integer weight vector from ``"2,-1,-1"`` (or a sequence)."""
    if isinstance(text, str):
        parts = [p for p in re.split(r"[,\s]+", text.strip().strip("()[]")) if p]
    else:
        parts = list(text)
    try:
        w = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"weights must be integers: {text!r}") from exc
    if nvars is not None and len(w) != nvars:
        raise InputError(f"expected {nvars} weights, got {len(w)}")
    if sum(w) != 0:
        raise InputError(f"weights {w} do not sum to zero")
    return OneParamSubgroup(w)


@dataclass(frozen=True)
class JobConfig:
    """Everything a run depends on; round-trips through a flat key=value text."""

    N: int = 2
    gens: tuple[str, ...] = ()
    lam: tuple[int, ...] = (0, 0, 0)
    ladder_depth: float = 14.0
    ladder_step: float = 0.5
    window_min: float | None = None
    window_max: float | None = None
    grid: int = 6
    rtol: float = 1e-5
    seed: int = 0
    weight_sign: str = "dual"
    invert_lambda: int = 0
    json_out: str = ""
    csv_out: str = ""

    def __post_init__(self):
        if sum(self.lam) != 0:
            raise InputError(f"weights {self.lam} do not sum to zero")
        if len(self.lam) != self.N + 1:
            raise InputError(f"lambda has {len(self.lam)} weights, ambient space needs {self.N + 1}")
        if self.weight_sign not in WEIGHT_SIGNS:
            raise InputError(f"weight sign must be one of {sorted(WEIGHT_SIGNS)}")
        if self.invert_lambda not in (0, 1):
            raise InputError("invert_lambda must be 0 or 1")

    # -- derived objects -----------------------------------------------
    def polys(self) -> list[MultiPoly]:
        return [parse_poly(g, self.N + 1) for g in self.gens]

    def ideal(self) -> Ideal:
        gens = self.polys()
        return Ideal(gens, self.N + 1)

    def subgroup(self) -> OneParamSubgroup:
        lam = OneParamSubgroup(self.lam)
        return -lam if self.invert_lambda else lam

    def convention(self) -> str:
        return WEIGHT_SIGNS[self.weight_sign]

    def phase(self) -> float:
        if not self.seed:
            return 0.0
        return float(np.random.default_rng(self.seed).uniform(0.0, 2 * np.pi))

    def ray_config(self) -> RayConfig:
        return RayConfig(resolution=self.grid, rtol=self.rtol, phase=self.phase())

    def verify_config(self) -> VerifyConfig:
        window = None
        if self.window_min is not None and self.window_max is not None:
            window = (self.window_min, self.window_max)
        return VerifyConfig(ladder_depth=self.ladder_depth, ladder_step=self.ladder_step,
                            window=window, convention=self.convention(),
                            ray=self.ray_config())

    # -- serialisation ---------------------------------------------------
    def emit(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "gens":
                lines.extend(f"gen={g}" for g in v)
            elif f.name == "lam":
                lines.append("lam=" + ",".join(str(m) for m in v))
            elif v is None:
                lines.append(f"{f.name}=")
            else:
                lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "JobConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        kw: dict = {}
        gens = []
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"job line {n}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key == "gen":
                gens.append(val)
                continue
            if key not in kinds:
                raise InputError(f"job line {n}: unknown key {key!r}")
            kw[key] = _coerce(key, val, n)
        kw["gens"] = tuple(gens)
        if "lam" not in kw and "N" in kw:
            kw["lam"] = (0,) * (kw["N"] + 1)
        job = cls(**kw)
        for g in job.gens:
            parse_poly(g, job.N + 1)
        return job


def _coerce(key, val, n):
    try:
        if key == "lam":
            return parse_lambda(val).weights
        if key in ("N", "grid", "seed", "invert_lambda"):
            return int(val)
        if key in ("window_min", "window_max"):
            return float(val) if val else None
        if key in ("ladder_depth", "ladder_step", "rtol"):
            return float(val)
        return val
    except (ValueError, InputError) as exc:
        raise InputError(f"job line {n}: bad value for {key}: {exc}") from exc


def _q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _write(path: str, text: str, stdout) -> None:
    if path and path != "-":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _ladder_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["s", "nu", "psi_s", "I", "J", "osc", "err"])
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()


# -- commands -----------------------------------------------------------------

def cmd_identity(job, args, out):
    rows = [{"n": n, "i": i, "value": binom_identity(n, i)}
            for n in range(args.n + 1) for i in range(n + 3)]
    if args.csv_flag:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["n", "i", "value"])
        for r in rows:
            w.writerow([r["n"], r["i"], r["value"]])
        _write(job.csv_out, buf.getvalue(), out)
    else:
        _write(job.json_out, _dump({"identity": rows, "n_max": args.n}), out)
    return EXIT_PASS


def cmd_futaki(job, args, out):
    rep = donaldson_futaki(job.ideal(), job.subgroup(), convention=job.convention())
    d = rep.as_dict()
    d["job"] = _job_dict(job)
    _write(job.json_out, _dump(d), out)
    return EXIT_PASS


def cmd_hilbert(job, args, out):
    hd = hilbert_data(job.ideal())
    d = {"hilbert_poly": [_q(c) for c in hd.hilbert_poly.coeffs],
         "hilbert_poly_text": hd.hilbert_poly.to_string(),
         "dimension": hd.dimension, "degree": hd.degree, "mu": _q(hd.mu),
         "regularity_start": hd.regularity_start,
         "sampled": [[m, v] for m, v in hd.sampled],
         "low_degree_mismatch": list(hd.low_degree_mismatch),
         "job": _job_dict(job)}
    _write(job.json_out, _dump(d), out)
    return EXIT_PASS


def cmd_limit(job, args, out):
    lim = initial_ideal(job.ideal(), job.subgroup())
    d = {"lambda": list(job.subgroup().weights), "limit_ideal": lim.to_strings(),
         "job": _job_dict(job)}
    _write(job.json_out, _dump(d), out)
    return EXIT_PASS


def _single_curve(job) -> MultiPoly:
    polys = job.polys()
    if len(polys) != 1 or job.N != 2:
        raise InputError("ray computations need a single plane curve (N = 2, one generator)")
    return polys[0]


def cmd_ray(job, args, out):
    f = _single_curve(job)
    lam = np.array(job.subgroup().weights, float)
    rows = kenergy_ray(f, lam, ladder(job.ladder_depth, job.ladder_step), job.ray_config())
    table = [(r.s, r.nu, r.psi_s, r.i_func, r.j_func, r.osc, r.error_est) for r in rows]
    _write(job.csv_out, _ladder_csv(table), out)
    return EXIT_INCONCLUSIVE if any(r.flagged for r in rows) else EXIT_PASS


def cmd_verify(job, args, out):
    f = _single_curve(job)
    rep = verify_asymptotics(f, job.subgroup(), job.verify_config())
    d = rep.as_dict()
    d["job"] = _job_dict(job)
    if job.csv_out:
        _write(job.csv_out, _ladder_csv(rep.ladder_rows()), out)
    if args.csv_flag and not job.csv_out:
        _write("", _ladder_csv(rep.ladder_rows()), out)
    else:
        _write(job.json_out, _dump(d), out)
    return {"pass": EXIT_PASS, "fail": EXIT_FAIL}.get(rep.verdict, EXIT_INCONCLUSIVE)


COMMANDS = {"identity": cmd_identity, "futaki": cmd_futaki, "hilbert": cmd_hilbert,
            "limit": cmd_limit, "ray": cmd_ray, "verify": cmd_verify}


def _job_dict(job: JobConfig) -> dict:
    d = {f.name: getattr(job, f.name) for f in fields(job)}
    d["gens"] = list(job.gens)
    d["lam"] = list(job.lam)
    return d


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--job", help="key=value job file (flags override it)")
    common.add_argument("--poly", action="append", help="ideal generator; repeatable")
    common.add_argument("--N", type=int, help="ambient projective dimension")
    common.add_argument("--lambda", dest="lam", help="zero-sum integer weights, e.g. 2,-1,-1")
    common.add_argument("--invert-lambda", type=int, choices=(0, 1))
    common.add_argument("--weight-sign", choices=sorted(WEIGHT_SIGNS))
    common.add_argument("--grid", type=int, help="initial polar grid resolution")
    common.add_argument("--rtol", type=float)
    common.add_argument("--ladder-depth", type=float)
    common.add_argument("--ladder-step", type=float)
    common.add_argument("--window", help="fit window 'smin,smax'")
    common.add_argument("--seed", type=int, help="grid phase jitter (0 = none)")
    common.add_argument("--json", dest="json_path", nargs="?", const="-",
                        help="write JSON (to a path, or stdout)")
    common.add_argument("--csv", dest="csv_path", nargs="?", const="-",
                        help="write CSV (to a path, or stdout)")
    p = argparse.ArgumentParser(prog="kstab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("futaki", "hilbert", "limit", "ray", "verify"):
        sub.add_parser(name, parents=[common])
    ident = sub.add_parser("identity", parents=[common])
    ident.add_argument("--n", type=int, default=8, help="largest n in the table")
    return p


def _build_job(args) -> JobConfig:
    base = JobConfig()
    if args.job:
        with open(args.job, encoding="utf-8") as fh:
            base = JobConfig.parse(fh.read())
    kw: dict = {}
    N = args.N if args.N is not None else base.N
    kw["N"] = N
    if args.poly:
        kw["gens"] = tuple(args.poly)
    if args.lam is not None:
        kw["lam"] = parse_lambda(args.lam, N + 1).weights
    elif len(base.lam) != N + 1:
        kw["lam"] = (0,) * (N + 1)
    for attr, key in (("invert_lambda", "invert_lambda"), ("weight_sign", "weight_sign"),
                      ("grid", "grid"), ("rtol", "rtol"), ("ladder_depth", "ladder_depth"),
                      ("ladder_step", "ladder_step"), ("seed", "seed")):
        v = getattr(args, attr)
        if v is not None:
            kw[key] = v
    if args.window:
        lo, hi = sorted(float(x) for x in args.window.split(","))
        kw["window_min"], kw["window_max"] = lo, hi
    if args.json_path not in (None, "-"):
        kw["json_out"] = args.json_path
    if args.csv_path not in (None, "-"):
        kw["csv_out"] = args.csv_path
    job = replace(base, **kw)
    for g in job.gens:
        parse_poly(g, job.N + 1)
    return job


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = _parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    for k in range(len(argv) - 1):
        # weight vectors such as "-2,1,1" would otherwise look like options
        if argv[k] in ("--lambda", "--window") and re.match(r"-\d", argv[k + 1]):
            argv[k:k + 2] = [f"{argv[k]}={argv[k + 1]}", ""]
    argv = [a for a in argv if a != ""]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    args.csv_flag = args.csv_path is not None
    try:
        job = _build_job(args)
        if args.command != "identity" and not job.gens:
            raise InputError("no ideal generators given (use --poly or a job file)")
        if args.command == "identity" and args.n < 0:
            raise InputError("--n must be non-negative")
        return COMMANDS[args.command](job, args, stdout)
    except FitError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (InputError, OSError, ValueError, SingularCurveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
