"""Benchmark harness: ``proxsvrg-bench {run,compare,complexity,validate}``.

Traces are CSV (UTF-8, LF, '.' decimals, shortest round-trip floats) with a
fixed header; see ``RUN_HEADER``. Exit status: 0 on success, 1 on divergence
or a failed validation, 2 on usage, parse or I/O errors.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import complexity, suites
from .datasets import LibsvmParseError, normalize_rows, read_libsvm, synthetic_samples
from .optimizers import Algorithm, OptimizerConfig, OutputMode, RunResult, default_step_size, run
from .problems import FiniteSumProblem, build_nnpca, random_pl_quadratic
from .sampling import Replacement

log = logging.getLogger("proxsvrg.bench")

RUN_HEADER = ("algo", "seed", "n", "d", "B", "b", "m", "eta", "epoch", "iter", "sfo", "po", "diag_sfo",
              "objective", "grad_map_sq", "elapsed_ms")
VALIDATE_HEADER = ("suite", "check", "trials", "violations", "worst_residual", "tolerance", "asserted")
COMPLEXITY_HEADER = ("b", "algo", "sfo", "po", "constants", "valid", "label")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# -- run specs ---------------------------------------------------------------------


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, val = part.partition("=")
        if not sep:
            raise UsageError(f"expected key=value in {text!r}")
        out[key.strip()] = val.strip()
    return out


def resolve_batch(expr: str | int, n: int) -> int:
    """``"n"``, ``"n/5"``, ``"n/10"`` (any ``n/k``) or a literal integer, clipped to [1, n]."""
    s = str(expr).strip().replace(" ", "")
    try:
        if s == "n":
            val = n
        elif s.startswith("n/"):
            val = n // int(s[2:])
        else:
            val = int(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse batch size {expr!r}") from None
    if val < 1:
        raise UsageError(f"batch size {expr!r} resolves to {val} for n={n}")
    return min(val, n)


@dataclass
class RunSpec:
    algo: Algorithm
    problem: str = "nnpca"
    synthetic: str | None = "n=1000,d=20"
    libsvm: str | None = None
    dim: int | None = None
    B: str = "n/5"
    b: str = "64"
    m: int | None = None
    eta: float | None = None
    epochs: int = 10
    seed: int = 0
    output_mode: OutputMode = OutputMode.LAST
    replacement: Replacement = Replacement.WITH
    stride: int | None = None
    metric_eta: float | None = None
    mu: float = 1.0
    L: float = 4.0
    lam: float = 0.1

    def problem_key(self) -> tuple:
        return (self.problem, self.synthetic, self.libsvm, self.dim, self.mu, self.L, self.lam)


_PROBLEM_CACHE: dict[tuple, FiniteSumProblem] = {}


def build_problem(spec: RunSpec) -> FiniteSumProblem:
    key = spec.problem_key()
    if key in _PROBLEM_CACHE:
        return _PROBLEM_CACHE[key]
    if spec.problem == "nnpca":
        if spec.libsvm:
            try:
                samples = normalize_rows(read_libsvm(spec.libsvm, spec.dim))
            except OSError as exc:
                raise UsageError(f"cannot read dataset: {exc}") from None
            except LibsvmParseError as exc:
                raise UsageError(str(exc)) from None
            if samples.dropped:
                log.warning("dropped %d zero rows from %s", samples.dropped, spec.libsvm)
        else:
            kv = _synthetic_kv(spec.synthetic)
            samples = synthetic_samples(kv["n"], kv["d"], kv.get("seed", 0))
        prob = build_nnpca(samples.rows)
    elif spec.problem == "pl_quadratic":
        kv = _synthetic_kv(spec.synthetic)
        prob = random_pl_quadratic(kv["n"], kv["d"], mu=spec.mu, L=spec.L, lam=spec.lam, seed=kv.get("seed", 0))
    else:
        raise UsageError(f"unknown problem {spec.problem!r}")
    _PROBLEM_CACHE[key] = prob
    return prob


def _synthetic_kv(text: str | None) -> dict[str, int]:
    if not text:
        raise UsageError("need --synthetic n=..,d=.. or --libsvm PATH")
    kv = parse_kv(text)
    try:
        out = {k: int(v) for k, v in kv.items()}
    except ValueError:
        raise UsageError(f"synthetic spec values must be integers: {text!r}") from None
    if "n" not in out or "d" not in out:
        raise UsageError("synthetic spec needs n and d")
    unknown = set(out) - {"n", "d", "seed"}
    if unknown:
        raise UsageError(f"unknown synthetic keys: {sorted(unknown)}")
    return out


def resolve(spec: RunSpec) -> tuple[FiniteSumProblem, OptimizerConfig]:
    prob = build_problem(spec)
    n = prob.n
    b = resolve_batch(spec.b, n)
    if spec.replacement is Replacement.WITHOUT and b > n:
        raise UsageError("b > n is impossible without replacement")
    B = n if spec.algo is Algorithm.PROXSVRG else resolve_batch(spec.B, n)
    if spec.algo is Algorithm.PROXGD:
        b, B, m = n, n, 1
    else:
        m = spec.m if spec.m is not None else math.ceil(math.sqrt(b))
    eta = spec.eta if spec.eta is not None else default_step_size(spec.algo, prob.L, n, b)
    try:
        cfg = OptimizerConfig(B=B, b=b, m=m, eta=eta, epochs=spec.epochs, output_mode=spec.output_mode,
                              seed=spec.seed, replacement=spec.replacement)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return prob, cfg


def trace_rows(spec: RunSpec, prob: FiniteSumProblem, res: RunResult):
    c = res.config
    for r in res.trace:
        yield (spec.algo.value, c.seed, prob.n, prob.d, c.B, c.b, c.m, c.eta, r.epoch, r.iter, r.sfo, r.po,
               r.diag_sfo, r.objective, r.grad_map_sq, round(r.elapsed_ms, 3))


def execute(spec: RunSpec) -> tuple[FiniteSumProblem, RunResult]:
    prob, cfg = resolve(spec)
    res = run(spec.algo, prob, cfg, stride=spec.stride, metric_eta=spec.metric_eta)
    last = res.trace[-1]
    print(f"{spec.algo.value} seed={cfg.seed} status={res.status} objective={last.objective!r} "
          f"n*objective={prob.n * last.objective!r} grad_map_sq={last.grad_map_sq!r}", file=sys.stderr)
    return prob, res


@contextlib.contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None
    with fh:
        yield fh


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def cmd_run(spec: RunSpec, out: str | None) -> int:
    prob, res = execute(spec)
    with _open_out(out) as fh:
        w = _writer(fh)
        w.writerow(RUN_HEADER)
        for row in trace_rows(spec, prob, res):
            w.writerow([fmt(v) for v in row])
    return EXIT_FAIL if res.diverged else EXIT_OK


def cmd_compare(specs: list[RunSpec], out: str | None) -> int:
    if len(specs) < 2:
        raise UsageError("compare needs at least two run specs")
    keys = {s.problem_key() for s in specs}
    if len(keys) != 1:
        raise UsageError("compare specs must share one problem")
    status = EXIT_OK
    with _open_out(out) as fh:
        w = _writer(fh)
        w.writerow(RUN_HEADER)
        for spec in specs:
            prob, res = execute(spec)
            if res.diverged:
                status = EXIT_FAIL
            for row in trace_rows(spec, prob, res):
                w.writerow([fmt(v) for v in row])
    return status


def log_grid(lo: int, hi: int, points: int) -> list[int]:
    if lo < 1 or hi < lo:
        raise UsageError(f"empty minibatch range [{lo}, {hi}]")
    if points < 1:
        raise UsageError("need at least one sweep point")
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    return [int(b) for b in grid]


def cmd_complexity(args) -> int:
    n = args.n
    hi = n if args.b_max is None else args.b_max
    grid = log_grid(args.b_min, hi, args.points)
    case = args.case
    base = dict(n=n, eps=args.eps, L=args.L, delta_phi=args.delta, sigma=args.sigma, mu=args.mu)
    try:
        complexity.BoundQuery(b=1, **base)
        if case == "online" and args.sigma is None:
            raise UsageError("--case online needs --sigma")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = []

    def emit(b, label):
        q = complexity.BoundQuery(b=b, **base)
        exact = complexity.bounds_theorem1(q, case)
        rows.append((b, "ProxSVRG+ (exact)", exact.sfo, exact.po, exact.constants, True, label))
        table = complexity.comparison_rows_pl(q) if args.pl else complexity.comparison_rows(q)
        for name, r in table.items():
            rows.append((b, name, r.sfo, r.po, r.constants, r.valid, label))

    for b in grid:
        emit(b, "")
    for label, b in complexity.table2_minibatches(n, args.eps).items():
        if 1 <= b <= n:
            emit(float(b), f"anchor {label}")
    choice = complexity.optimal_minibatch(complexity.BoundQuery(b=1, **base), case)
    emit(choice.b_star, f"b* (continuous {choice.b_continuous!r})")
    with _open_out(args.out) as fh:
        w = _writer(fh)
        w.writerow(COMPLEXITY_HEADER)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return EXIT_OK


def cmd_validate(suite: str, seed: int, trials: int, mc_trials: int, out: str | None) -> int:
    if suite not in suites.SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(suites.SUITES)}")
    results = suites.run_named(suite, seed, trials, mc_trials)
    failed = False
    with _open_out(out) as fh:
        w = _writer(fh)
        w.writerow(VALIDATE_HEADER)
        for name, r in results:
            w.writerow([fmt(v) for v in (name, r.name, r.trials, r.violations, r.worst_residual, r.tolerance,
                                         r.asserted)])
            failed |= r.asserted and r.violations > 0
    return EXIT_FAIL if failed else EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def _add_problem_args(p):
    p.add_argument("--problem", choices=("nnpca", "pl_quadratic"), default="nnpca")
    p.add_argument("--synthetic", default=None, help="n=..,d=..[,seed=..]")
    p.add_argument("--libsvm", default=None, help="LIBSVM file (nnpca only)")
    p.add_argument("--dim", type=int, default=None, help="expected LIBSVM dimension")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--L", type=float, default=4.0)
    p.add_argument("--lam", type=float, default=0.1)


def _add_config_args(p, with_algo=True):
    if with_algo:
        p.add_argument("--algo", required=True, choices=[a.value for a in Algorithm])
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--b", default="64")
    p.add_argument("--B", default="n/5", help='integer, "n", "n/5", "n/10", ...')
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--output-mode", choices=[o.value for o in OutputMode], default="last")
    p.add_argument("--replacement", choices=[r.value for r in Replacement], default="with")
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--metric-eta", type=float, default=None)
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="proxsvrg-bench", description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None, help="flat key=value file; command-line flags win")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one run, CSV trace")
    _add_problem_args(p)
    _add_config_args(p)

    p = sub.add_parser("compare", help="several algorithms x seeds on one problem")
    _add_problem_args(p)
    _add_config_args(p, with_algo=False)
    p.add_argument("--algos", default="proxsvrg+,proxsvrg,proxgd,proxsgd")
    p.add_argument("--seeds", default="0")

    p = sub.add_parser("complexity", help="SFO/PO bound sweep over b")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--case", choices=("finite", "online"), default="finite")
    p.add_argument("--pl", action="store_true", help="PL-condition comparison rows")
    p.add_argument("--b-min", type=int, default=1)
    p.add_argument("--b-max", type=int, default=None)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="inequality property suites")
    p.add_argument("suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--mc-trials", type=int, default=100_000)
    p.add_argument("--out", default=None)
    return ap


def _config_argv(path: str) -> list[str]:
    """Turn ``key=value`` lines into ``--key value`` tokens (``#`` starts a comment)."""
    argv = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        argv += [f"--{key.strip().replace('_', '-')}", val.strip()]
    return argv


def _spec_from_args(args, algo: str, seed: int, eta=None) -> RunSpec:
    return RunSpec(algo=Algorithm(algo), problem=args.problem, synthetic=args.synthetic, libsvm=args.libsvm,
                   dim=args.dim, B=args.B, b=args.b, m=args.m, eta=eta, epochs=args.epochs, seed=seed,
                   output_mode=OutputMode(args.output_mode), replacement=Replacement(args.replacement),
                   stride=args.stride, metric_eta=args.metric_eta, mu=args.mu, L=args.L, lam=args.lam)


def _dispatch(args) -> int:
    if args.command in ("run", "compare") and not args.synthetic and not args.libsvm:
        args.synthetic = "n=1000,d=20"
    if args.command == "run":
        return cmd_run(_spec_from_args(args, args.algo, args.seed, args.eta), args.out)
    if args.command == "compare":
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
            algos = [Algorithm(a.strip()) for a in args.algos.split(",") if a.strip()]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        specs = [_spec_from_args(args, a, s) for a in algos for s in seeds]
        return cmd_compare(specs, args.out)
    if args.command == "complexity":
        return cmd_complexity(args)
    return cmd_validate(args.suite, args.seed, args.trials, args.mc_trials, args.out)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            k = argv.index("--config")
            cfg_path = argv[k + 1] if k + 1 < len(argv) else None
            if cfg_path is None:
                raise UsageError("--config needs a path")
            rest = argv[:k] + argv[k + 2:]
            # config tokens go right after the subcommand so explicit flags override them
            cmd_pos = next((i for i, a in enumerate(rest) if a in ("run", "compare", "complexity", "validate")), None)
            if cmd_pos is None:
                raise UsageError("subcommand required")
            argv = rest[:cmd_pos + 1] + _config_argv(cfg_path) + rest[cmd_pos + 1:]
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_USAGE if exc.code else EXIT_OK
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return _dispatch(args)
    except UsageError as exc:
        print(f"proxsvrg-bench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
