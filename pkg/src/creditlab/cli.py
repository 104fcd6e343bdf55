"""Command-line front end.

Exit status is 0 on success, 1 on data or validation errors and 2 on usage
errors. Diagnostics go to stderr; results go to stdout or to ``--out``.
"""
import argparse
import csv
import dataclasses
import os
import sys

import numpy as np

from . import discriminant as da
from . import harness
from . import neural as nn
from .datamodel import dump_dataset, load_dataset, split_by_period
from .errors import CreditLabError, DimensionMismatch, MissingColumn, ParseError


def _add_common(p, data=False, config=False, out=False):
    if data:
        p.add_argument("--data", metavar="PATH", help="input CSV")
    if config:
        p.add_argument("--config", metavar="PATH", help="pipeline config file")
    if out:
        p.add_argument("--out", metavar="DIR", help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="creditlab",
                                     description="credit risk model laboratory")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("ingest", help="load and validate a dataset")
    _add_common(p, data=True, out=True)

    p = sub.add_parser("ratios", help="compute ratios from statement columns")
    _add_common(p, data=True, out=True)

    p = sub.add_parser("select", help="group mean tests and stepwise selection")
    _add_common(p, data=True, config=True, out=True)

    p = sub.add_parser("lda", help="fit or apply the discriminant function")
    _add_common(p, data=True, config=True, out=True)
    p.add_argument("--priors", choices=("proportional", "equal"))
    p.add_argument("--model", metavar="PATH", help="model file to score with")
    p.add_argument("--score", metavar="PATH", help="CSV of ratios to score")

    p = sub.add_parser("mlp", help="train one perceptron")
    _add_common(p, data=True, config=True, out=True)
    _add_nn_flags(p)
    p.add_argument("--arch", metavar='"9 6 8 1"', help="layer sizes")

    p = sub.add_parser("search", help="architecture search")
    _add_common(p, data=True, config=True, out=True)
    _add_nn_flags(p)

    p = sub.add_parser("compare", help="full pipeline and comparison report")
    _add_common(p, data=True, config=True, out=True)
    _add_nn_flags(p)
    p.add_argument("--priors", choices=("proportional", "equal"))

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    _add_common(p, config=True, out=True)
    p.add_argument("--seed", type=int)
    return parser


def _add_nn_flags(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--mse", choices=("mean", "half_sum"))
    p.add_argument("--verbose", action="store_true",
                   help="print the training error of every epoch to stderr")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return COMMANDS[args.command](args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (CreditLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


# --- helpers -------------------------------------------------------------

def _config(args):
    if getattr(args, "config", None):
        config = harness.load_config(args.config)
    else:
        config = harness.PipelineConfig()
    train = config.train
    if getattr(args, "seed", None) is not None:
        train = dataclasses.replace(train, seed=args.seed)
    if getattr(args, "epochs", None) is not None:
        train = dataclasses.replace(train, epochs=args.epochs)
    changes = {"train": train}
    if getattr(args, "priors", None):
        changes["priors"] = args.priors
    if getattr(args, "mse", None):
        changes["mse_convention"] = args.mse
    return dataclasses.replace(config, **changes)


def _dataset(args, config, parser):
    if getattr(args, "data", None):
        return load_dataset(args.data,
                            on_zero_division=config.data.get("on_zero_division", "raise"))
    if config.data:
        return harness.load_pipeline_data(config)
    parser.error(f"{args.command}: --data or a config with a [data] section is required")


def _emit(args, name, text):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w", encoding="utf-8",
                  newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _split(dataset, config):
    base_years, test_year = harness._default_years(dataset, config)
    return split_by_period(dataset, base_years, test_year)


def _read_score_rows(path, variables):
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [v for v in variables if v not in (reader.fieldnames or [])]
        if missing:
            raise MissingColumn(missing[0])
        rows = []
        for i, row in enumerate(reader, start=1):
            try:
                rows.append([float(row[v]) for v in variables])
            except (TypeError, ValueError):
                raise ParseError(i, None, "non-numeric ratio") from None
    return np.array(rows, dtype=float).reshape(-1, len(variables))


# --- commands --------------------------------------------------------------

def cmd_ingest(args, parser):
    if not args.data:
        parser.error("ingest: --data is required")
    ds = load_dataset(args.data, on_zero_division="drop")
    lines = [f"records {len(ds)}", "variables " + " ".join(ds.variable_names)]
    for year in sorted(set(ds.years.tolist())):
        sub = ds.subset(ds.years == year)
        n0, n1 = sub.class_counts()
        lines.append(f"year {year} class0 {n0} class1 {n1}")
    for row, code in ds.dropped:
        lines.append(f"dropped row {row} ({code} denominator is zero)")
        print(f"warning: dropped row {row}: zero denominator for {code}",
              file=sys.stderr)
    print("\n".join(lines))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "dataset.csv"), "w",
                  encoding="utf-8", newline="") as fh:
            fh.write(dump_dataset(ds))
    return 0


def cmd_ratios(args, parser):
    if not args.data:
        parser.error("ratios: --data is required")
    ds = load_dataset(args.data)
    _emit(args, "ratios.csv", dump_dataset(ds))
    return 0


def cmd_select(args, parser):
    config = _config(args)
    ds = _dataset(args, config, parser)
    base, _ = _split(ds, config)
    candidates = config.candidates or ds.variable_names
    tests = [da.group_mean_test(base, v) for v in candidates]
    trace = da.stepwise_select(base, candidates, config.f_enter, config.f_remove)
    if args.out:
        _emit(args, "table2.csv", da.table_csv(da.group_mean_rows(tests)))
        _emit(args, "stepwise.csv", da.table_csv(da.trace_rows(trace)))
    else:
        sys.stdout.write(da.table_text(da.group_mean_rows(tests)) + "\n")
        sys.stdout.write(da.table_text(da.trace_rows(trace)))
    print("selected " + " ".join(trace.selected), file=sys.stderr if args.out else sys.stdout)
    return 0


def cmd_lda(args, parser):
    if args.model:
        if not args.score:
            parser.error("lda: --model requires --score")
        model = da.load_model(args.model)
        X = _read_score_rows(args.score, model.variables)
        scores = da.score(model, X) if len(X) else np.empty(0)
        _emit(args, "scores.txt", "".join(f"{z:.10g}\n" for z in scores))
        return 0
    if args.score:
        parser.error("lda: --score requires --model")
    config = _config(args)
    ds = _dataset(args, config, parser)
    base, test = _split(ds, config)
    variables = config.candidates or ds.variable_names
    model = da.fit_lda(base, variables, config.priors)
    base_table = da.classification_table(model, base)
    if args.out:
        _emit(args, "model.txt", da.dump_model(model))
        _emit(args, "table3.csv", da.table_csv(da.coefficient_rows(model)))
        rows = da.confusion_rows(base_table, "base")
        if len(test):
            rows += da.confusion_rows(da.classification_table(model, test), "test")[1:]
        _emit(args, "table4.csv", da.table_csv(rows))
    else:
        out = sys.stdout
        out.write(da.table_text(da.coefficient_rows(model)) + "\n")
        out.write(da.table_text(da.confusion_rows(base_table)))
        out.write(da.format_overall(base_table) + "\n")
    return 0


def _nn_data(args, config, parser):
    ds = _dataset(args, config, parser)
    base, test = _split(ds, config)
    variables = config.candidates or ds.variable_names
    return ((base.matrix(variables), base.labels.astype(float)),
            (test.matrix(variables), test.labels.astype(float)), variables)


def cmd_mlp(args, parser):
    config = _config(args)
    train, test, variables = _nn_data(args, config, parser)
    if args.arch:
        try:
            arch = tuple(int(s) for s in args.arch.replace(",", " ").split())
        except ValueError:
            parser.error(f"mlp: bad --arch {args.arch!r}")
    else:
        arch = config.space(len(variables))[0]
    if arch and arch[0] != len(variables):
        raise DimensionMismatch(
            f"architecture expects {arch[0]} inputs, data has {len(variables)}")
    net = nn.init_network(arch, nn.config_seed(config.train.seed, arch))
    callback = None
    if args.verbose:
        callback = lambda e, err: print(f"epoch {e} error {err:.10g}",  # noqa: E731
                                        file=sys.stderr)
    net, hist = nn.train_rprop(net, train[0], train[1], config.train, callback)
    out_tr = nn.forward(net, train[0])
    lines = [f"architecture {nn.format_architecture(arch)}",
             f"train_mse {nn.mse(out_tr, train[1], config.mse_convention):.10g}"]
    if len(test[1]):
        out_te = nn.forward(net, test[0])
        ref = out_te if config.threshold_on == "test" else out_tr
        threshold, _ = nn.median_threshold_classify(ref)
        pred = (out_te >= threshold).astype(int)
        correct = int(np.sum(pred == test[1].astype(int)))
        lines += [f"test_mse {nn.mse(out_te, test[1], config.mse_convention):.10g}",
                  f"threshold {threshold:.10g}",
                  f"correct {correct}/{len(pred)}"]
        if args.out:
            _emit(args, "table6.csv", da.table_csv(nn.firm_rows(test[1], out_te, threshold)))
    print("\n".join(lines))
    if args.out:
        _emit(args, "network.txt", nn.dump_network(net))
        _emit(args, "curve.csv", da.table_csv(nn.curve_rows(hist)))
    return 0


def cmd_search(args, parser):
    config = _config(args)
    train, test, variables = _nn_data(args, config, parser)
    result = nn.architecture_search(train, test, config.space(len(variables)),
                                    config.train, config.threshold_on,
                                    config.workers)
    rows = nn.search_rows(result)
    if args.out:
        _emit(args, "table5.csv", da.table_csv(rows))
    else:
        sys.stdout.write(da.table_text(rows))
    return 0


def cmd_compare(args, parser):
    if not args.config and not args.data:
        parser.error("compare: --config or --data is required")
    config = _config(args)
    ds = _dataset(args, config, parser)
    report = harness.run_pipeline(ds, config, out_dir=args.out)
    if not args.out:
        sys.stdout.write(harness.render_report(report))
    return 0


def cmd_synth(args, parser):
    config = _config(args)
    data = dict(config.data)
    if args.seed is not None:
        data["seed"] = args.seed
    data.setdefault("mean0", (0.0,))
    data.setdefault("mean1", (6.0,))
    data.setdefault("years", (2005, 2006, 2007))
    ds = harness.generate_synthetic(harness.synthetic_spec_from(data))
    _emit(args, "dataset.csv", dump_dataset(ds))
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "ratios": cmd_ratios,
    "select": cmd_select,
    "lda": cmd_lda,
    "mlp": cmd_mlp,
    "search": cmd_search,
    "compare": cmd_compare,
    "synth": cmd_synth,
}


if __name__ == "__main__":
    sys.exit(main())
