"""Command-line interface: ``predict``, ``simulate``, ``bpp-check`` and ``validate``.

Exit codes: 0 success, 2 validation error, 3 numeric divergence, 4 I/O error.
CSV output is UTF-8 with LF line endings and 17 significant digits.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import bpp, montecarlo, predict
from .errors import GlcError, InvalidArgumentError, ScenarioValidationError
from .scenarios import ScenarioFile, list_presets, load_preset, load_scenario_file, parse_time_grid

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


def fmt(x: float) -> str:
    """Locale-independent 17-significant-digit float."""
    return format(float(x), ".17g")


def _beta_label(prefix: str, beta: float) -> str:
    return f"{prefix}@{format(float(beta), '.17g')}"


def _parse_betas(text: Optional[str], default: Sequence[float]) -> List[float]:
    if text is None:
        return list(default)
    try:
        return [float(b) for b in text.split(",") if b.strip()]
    except ValueError:
        raise ScenarioValidationError(f"--beta: expected comma-separated numbers, got {text!r}") from None


def _resolve_scenario(arg: str) -> ScenarioFile:
    path = Path(arg)
    if not path.exists():
        stem = arg[:-4] if arg.endswith(".scn") else arg
        if stem in list_presets() and path.parent == Path("."):
            return load_preset(stem)
    return load_scenario_file(path)


def _times(args, sf: ScenarioFile) -> List[float]:
    if args.t is not None:
        return list(parse_time_grid(args.t, "--t"))
    return list(sf.run.times)


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _write_csv(path: Optional[str], header: Sequence[str], rows: Sequence[Sequence[str]]):
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with _output(path) as fh:
        fh.write(buf.getvalue())


def run_predict(args) -> int:
    sf = _resolve_scenario(args.scenario)
    sc = sf.scenario
    times = _times(args, sf)
    betas = _parse_betas(args.beta, sf.run.betas)
    header = ["t", "mean", "variance", "std"] + [_beta_label("mgf", b) for b in betas]
    rows = []
    for t in times:
        res = predict.mean_interference(sc, t, args.method)
        mgfs = [predict.mgf_interference(sc, t, b, args.method) for b in betas]
        rows.append([fmt(t), fmt(res.mean), fmt(res.variance), fmt(res.std)] + [fmt(v) for v in mgfs])
    _write_csv(args.out, header, rows)
    return EXIT_OK


def run_simulate(args) -> int:
    sf = _resolve_scenario(args.scenario)
    sc = sf.scenario
    times = _times(args, sf)
    betas = _parse_betas(args.beta, sf.run.betas)
    M = sf.run.M if args.realizations is None else args.realizations
    seed = sf.run.seed if args.seed is None else args.seed
    if M < 2:
        raise InvalidArgumentError(f"--realizations must be >= 2 for a variance estimate, got {M}")
    samples = montecarlo.interference_samples(sc, times, M, seed)
    header = ["t", "mean_hat", "std_error", "var_hat"]
    for b in betas:
        header += [_beta_label("mgf_hat", b), _beta_label("mgf_std_error", b)]
    rows = []
    for j, t in enumerate(times):
        st = montecarlo.summarize_samples(samples[:, j], None)
        row = [fmt(t), fmt(st.mean_hat), fmt(st.std_error_mean), fmt(st.var_hat)]
        for b in betas:
            mb = montecarlo.summarize_samples(samples[:, j], b)
            row += [fmt(mb.mgf_hat), fmt(mb.mgf_std_error)]
        rows.append(row)
    _write_csv(args.out, header, rows)
    if args.trace:
        trace = [[str(i), fmt(t), fmt(samples[i, j])] for i in range(M) for j, t in enumerate(times)]
        _write_csv(args.trace, ["realization", "t", "interference"], trace)
    return EXIT_OK


def _summary(verdict: bpp.BppVerdict) -> str:
    mark = "satisfied" if verdict.satisfied else "violated"
    zero = "satisfied" if verdict.zero_limit_satisfied else "violated"
    return (f"BPP condition {mark} (max pairwise gap {verdict.max_pairwise_gap:.3g} at t={verdict.horizon:g}, "
            f"tolerance {verdict.gap_tol:g}); zero-limit test {zero}; {verdict.rationale}")


def run_bpp_check(args) -> int:
    sf = _resolve_scenario(args.scenario)
    horizon = sf.run.horizon if args.horizon is None else args.horizon
    gap_tol = sf.run.gap_tol if args.gap_tol is None else args.gap_tol
    verdict = bpp.check_bpp_condition(sf.scenario, horizon, gap_tol)
    report = json.dumps(verdict.as_dict(), indent=2) + "\n"
    if args.out is None or args.out == "-":
        sys.stdout.write(report)
        sys.stderr.write(_summary(verdict) + "\n")
    else:
        with _output(args.out) as fh:
            fh.write(report)
        sys.stdout.write(_summary(verdict) + "\n")
    return EXIT_OK


def run_validate(args) -> int:
    sf = _resolve_scenario(args.scenario)
    sc = sf.scenario
    kind = "homogeneous" if sc.is_homogeneous() else "heterogeneous"
    sys.stdout.write(f"ok: d={sc.d}, {sc.N} interferer(s), {kind}, s={sc.s:g}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glcinterference",
                                     description="Predict and simulate interference in mobile networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--scenario", required=True,
                       help=f"scenario file, or a preset name ({', '.join(list_presets())})")
        p.add_argument("--out", help="output path (default: stdout)")
        if grid:
            p.add_argument("--t", help="times: comma list 'a,b,c' or range 'start:stop:step'")
            p.add_argument("--beta", help="comma list of MGF arguments")

    p = sub.add_parser("predict", help="predicted mean, variance and MGF")
    common(p)
    p.add_argument("--method", choices=predict.METHODS, default="auto")
    p.set_defaults(func=run_predict)

    p = sub.add_parser("simulate", help="Monte Carlo statistics")
    common(p)
    p.add_argument("--realizations", type=int, help="number of realizations M (>= 2)")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--method", choices=predict.METHODS, default="auto", help="accepted for symmetry; unused")
    p.add_argument("--trace", help="write every realization to this CSV")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("bpp-check", help="test the BPP condition")
    common(p, grid=False)
    p.add_argument("--horizon", type=float, help="base horizon t1 of the probe grid")
    p.add_argument("--gap-tol", type=float, dest="gap_tol", help="gap threshold")
    p.set_defaults(func=run_bpp_check)

    p = sub.add_parser("validate", help="schema check only")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=run_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        sys.stderr.write("error: --seed must be an unsigned 64-bit integer\n")
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except ArithmeticError as exc:
        sys.stderr.write(f"numeric divergence: {exc}\n")
        return EXIT_DIVERGENCE
    except (ValueError, GlcError) as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
