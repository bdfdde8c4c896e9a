"""Command line entry point: anova, ems, simulate, compare."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .compare import compare
from .data import BalancedLayout, LayoutError, read_csv
from .design import DesignDims, ModelVariant, Source
from .ems import VarianceComponent, ems, symbolic_string
from .f_tests import FTestResult, evaluate, f_test_plan
from .simulator import SimSpec, SimSpecError, default_fixed_effects, simulate, type1_error, verify_ems
from .sums_of_squares import anova_table


def _model(text: str) -> ModelVariant:
    try:
        return ModelVariant.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dims(text: str) -> DesignDims:
    try:
        return DesignDims.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sigma(text: str) -> tuple[VarianceComponent, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return VarianceComponent.parse(name), float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _stars(p: float, alpha: float) -> str:
    if p < alpha / 50:
        return "***"
    if p < alpha / 5:
        return "**"
    if p < alpha:
        return "*"
    return ""


# -- anova ------------------------------------------------------------------

def _anova_records(table, results: list[FTestResult], alpha: float) -> list[dict]:
    by_source = {r.source: r for r in results}
    recs = []
    for row in table:
        rec = {"source": row.source.value, "df": row.df, "ss": row.ss, "ms": row.ms}
        res = by_source.get(row.source)
        if res is not None:
            rec.update(
                f=res.f_value, df1=res.df1, df2=res.df2, method=str(res.df_method),
                p=res.p_value, significant=res.p_value < alpha, ratio=res.spec.ratio_text(),
                alternates=[
                    {"method": str(alt.method), "df1": alt.df1, "df2": alt.df2, "p": alt.p_value}
                    for alt in res.alternates
                ],
            )
        recs.append(rec)
    return recs


def _anova_text(model, table, results, alpha) -> str:
    by_source = {r.source: r for r in results}
    lines = [
        f"Strip-split plot ANOVA, model {model.code}, dims {table.dims}",
        f"{'Source':<8}{'df':>5}{'SS':>14}{'MS':>12}{'F':>10}{'df1':>9}{'df2':>9}  {'method':<14}{'p':>9}",
    ]
    notes = []
    for row in table:
        line = f"{row.source.value:<8}{row.df:>5}{row.ss:>14.4f}{row.ms:>12.4f}"
        res = by_source.get(row.source)
        if res is not None:
            line += (
                f"{res.f_value:>10.3f}{res.df1:>9.3f}{res.df2:>9.3f}  {str(res.df_method):<14}"
                f"{res.p_value:>9.4f} {_stars(res.p_value, alpha)}"
            )
            if not res.spec.is_simple:
                notes.append(f"{row.source.value}: F = {res.spec.ratio_text()}")
                for alt in res.alternates:
                    notes.append(
                        f"    {str(alt.method):<28} df1={alt.df1:.3f} df2={alt.df2:.3f} p={alt.p_value:.4f}"
                    )
        lines.append(line.rstrip())
    lines.append(f"{'Total':<8}{table.total_df:>5}{table.total_ss:>14.4f}")
    lines.append(f"significance: * p < {alpha:g}, ** p < {alpha / 5:g}, *** p < {alpha / 50:g}")
    if notes:
        lines.append("")
        lines.append("Complex ratios:")
        lines.extend(notes)
    return "\n".join(lines)


def _anova_csv(recs: list[dict]) -> str:
    out = io.StringIO()
    cols = ("source", "df", "ss", "ms", "f", "df1", "df2", "method", "p", "significant")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(cols)
    for rec in recs:
        writer.writerow(tuple(rec.get(c, "") for c in cols))
    return out.getvalue()


def cmd_anova(args) -> int:
    layout = read_csv(args.data)
    table = anova_table(layout)
    results = evaluate(f_test_plan(args.model), table)
    if args.format == "text":
        print(_anova_text(args.model, table, results, args.alpha))
    else:
        recs = _anova_records(table, results, args.alpha)
        if args.format == "json":
            print(json.dumps({"model": args.model.code, "dims": list(table.dims.shape),
                              "alpha": args.alpha, "rows": recs}, indent=2))
        else:
            sys.stdout.write(_anova_csv(recs))
    return 0


# -- ems --------------------------------------------------------------------

def cmd_ems(args) -> int:
    for source in Source:
        if args.dims is None:
            expr = symbolic_string(args.model, source)
        else:
            expr = str(ems(args.model, args.dims, source))
        print(f"E(MS_{source.value}) = {expr}")
    return 0


# -- simulate ---------------------------------------------------------------

def _emit_csv(spec: SimSpec, directory: Path, workers: int) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    width = max(5, len(str(spec.n_reps - 1)))
    for n, values in enumerate(simulate(spec, workers)):
        path = directory / f"rep_{n:0{width}d}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            BalancedLayout.from_array(values).to_csv(fh)


def cmd_simulate(args) -> int:
    spec = SimSpec(
        dims=args.dims,
        model=args.model,
        variances=dict(args.sigma or []),
        fixed_effects=default_fixed_effects(args.dims, args.model, args.fixed_scale),
        grand_mean=args.mean,
        n_reps=args.reps,
        seed=args.seed,
    )
    if args.emit_csv:
        _emit_csv(spec, Path(args.emit_csv), args.workers)
        print(f"wrote {spec.n_reps} replicate(s) to {args.emit_csv}")
    print(f"EMS check, model {spec.model.code}, dims {spec.dims}, {spec.n_reps} reps, seed {spec.seed}")
    print(f"{'Source':<8}{'empirical':>12}{'predicted':>12}{'MC se':>10}{'z':>8}")
    for check in verify_ems(spec, args.workers):
        print(f"{check.source.value:<8}{check.empirical:>12.4f}{check.predicted:>12.4f}"
              f"{check.std_error:>10.4f}{check.z:>8.2f}")
    if args.type1 is not None:
        print("")
        print(f"Rejection rates at alpha={args.type1:g} (tests whose null holds)")
        for rate in type1_error(spec, args.type1, args.workers):
            kind = "simple" if rate.simple else "complex"
            print(f"{rate.source.value:<8}{rate.rate:>8.4f} +- {rate.std_error:.4f}  {kind}")
    return 0


# -- compare ----------------------------------------------------------------

def cmd_compare(args) -> int:
    result = compare(read_csv(args.data), args.alpha, args.error_strata)
    if args.format == "json":
        print(result.to_json(indent=2))
    elif args.format == "csv":
        sys.stdout.write(result.to_csv())
    else:
        print(result.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stripsplit", description="Strip-split plot ANOVA toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("anova", help="ANOVA table and F tests for a CSV dataset")
    p.add_argument("--model", type=_model, default=ModelVariant.parse("FFF"), help="e.g. FFF, RRR, RFF")
    p.add_argument("--data", required=True, help="CSV with header block,A,B,C,y")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=cmd_anova)

    p = sub.add_parser("ems", help="expected mean squares for a model variant")
    p.add_argument("--model", type=_model, required=True)
    p.add_argument("--dims", type=_dims, help="r,a,b,c; omit for symbolic coefficients")
    p.set_defaults(func=cmd_ems)

    p = sub.add_parser("simulate", help="Monte Carlo EMS and test-size audit")
    p.add_argument("--model", type=_model, required=True)
    p.add_argument("--dims", type=_dims, required=True)
    p.add_argument("--sigma", type=_sigma, action="append", metavar="NAME=VALUE",
                   help="variance of a random component, e.g. eT=1 (repeatable)")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mean", type=float, default=0.0, help="grand mean")
    p.add_argument("--fixed-scale", type=float, default=0.0,
                   help="scale of the centered fixed-effect pattern (0 = all nulls hold)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--emit-csv", metavar="DIR")
    p.add_argument("--type1", type=float, metavar="ALPHA", help="also report rejection rates")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="strip-split vs factorial vs split-split")
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--error-strata", action="store_true",
                   help="test split-split A, B, AB against their own error strata")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LayoutError, SimSpecError, OSError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
