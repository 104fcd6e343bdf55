"""Synthetic data, pipeline configuration and the end-to-end comparison of
the discriminant function against the searched perceptron."""
import configparser
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import discriminant as da
from . import neural as nn
from .datamodel import Dataset, FirmRecord, load_dataset, split_by_period
from .errors import ConfigError, CreditLabError, NotPositiveDefinite

OUTPUT_FILES = ("table2.csv", "table3.csv", "table4.csv", "table5.csv",
                "table6.csv", "report.txt")


@dataclass(frozen=True)
class SyntheticSpec:
    """Two Gaussian classes sharing one covariance matrix.

    Records are assigned years from ``years`` round-robin within each class.
    """

    n0: int
    n1: int
    mean0: tuple
    mean1: tuple
    covariance: tuple
    seed: int = 0
    years: tuple = (2005,)

    @property
    def dimension(self):
        return len(self.mean0)

    def __post_init__(self):
        if self.n0 < 2 or self.n1 < 2:
            raise ConfigError("need at least two records per class")
        if len(self.mean0) != len(self.mean1):
            raise ConfigError("mean vectors differ in length")
        cov = np.asarray(self.covariance, dtype=float)
        k = len(self.mean0)
        if cov.shape != (k, k):
            raise ConfigError(f"covariance must be {k}x{k}")
        if not self.years:
            raise ConfigError("need at least one year")

    @classmethod
    def isotropic(cls, n0, n1, separation, dimension=1, seed=0,
                  years=(2005,), informative=1):
        """Identity covariance; the first ``informative`` coordinates of the
        class-1 mean are shifted so the means are ``separation`` apart."""
        mean0 = np.zeros(dimension)
        mean1 = np.zeros(dimension)
        mean1[:informative] = separation / math.sqrt(informative)
        return cls(n0, n1, tuple(mean0), tuple(mean1),
                   tuple(map(tuple, np.eye(dimension))), seed, tuple(years))


def variable_codes(k):
    return tuple(f"R{i:02d}" for i in range(1, k + 1))


def generate_synthetic(spec):
    cov = np.asarray(spec.covariance, dtype=float)
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
        raise NotPositiveDefinite("covariance is not symmetric")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("covariance is not positive definite") from None
    rng = np.random.default_rng(spec.seed)
    k = spec.dimension
    records = []
    for label, n, mean in ((0, spec.n0, spec.mean0), (1, spec.n1, spec.mean1)):
        draws = np.asarray(mean) + rng.standard_normal((n, k)) @ chol.T
        for i, row in enumerate(draws):
            records.append(FirmRecord(f"C{label}-{i:04d}",
                                      int(spec.years[i % len(spec.years)]),
                                      label, tuple(row)))
    return Dataset(records, variable_codes(k))


# --- configuration ---------------------------------------------------------

_SCHEMA = {
    "data": {"path": str, "source": str, "n0": int, "n1": int, "dimension": int,
             "mean0": "floats", "mean1": "floats", "covariance": str,
             "seed": int, "years": "ints", "on_zero_division": str},
    "split": {"base_years": "ints", "test_year": int},
    "stepwise": {"candidates": "words", "f_enter": float, "f_remove": float},
    "lda": {"priors": str},
    "nn": {"epochs": int, "eta_plus": float, "eta_minus": float,
           "delta_init": float, "delta_max": float, "delta_min": float,
           "seed": int, "threshold_on": str, "mse": str},
    "search": {"hidden": "layers", "architectures": "layers", "workers": int},
}


@dataclass(frozen=True)
class PipelineConfig:
    data: dict = field(default_factory=dict)
    base_years: tuple = ()
    test_year: int = None
    candidates: tuple = ()
    f_enter: float = 3.84
    f_remove: float = 2.71
    priors: str = "proportional"
    train: nn.TrainConfig = nn.TrainConfig()
    threshold_on: str = "test"
    mse_convention: str = "mean"
    hidden: tuple = ()
    architectures: tuple = ()
    workers: int = 1

    def space(self, n_inputs):
        """Full layer lists: explicit architectures, then hidden-only specs."""
        space = [tuple(a) for a in self.architectures]
        space += [(n_inputs, *h, 1) for h in self.hidden]
        if not space:
            space = [(n_inputs, max(1, n_inputs // 2), 1)]
        return space


def _convert(kind, raw, where):
    try:
        if kind in (str, int, float):
            return kind(raw.strip())
        if kind == "floats":
            return tuple(float(v) for v in raw.split())
        if kind == "ints":
            return tuple(int(v) for v in raw.split())
        if kind == "words":
            return tuple(raw.split())
        if kind == "layers":
            return tuple(tuple(int(v) for v in part.split())
                         for part in raw.split(";") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise AssertionError(kind)


def parse_config(text, base_dir=None):
    """Parse a pipeline config (INI-style ``key = value`` sections).

    Unknown sections and keys are errors. A relative ``[data] path`` is
    resolved against ``base_dir``.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[(section, key)] = _convert(_SCHEMA[section][key], raw,
                                              f"[{section}] {key}")

    data = {k: v for (s, k), v in values.items() if s == "data"}
    if "path" in data and base_dir and not os.path.isabs(data["path"]):
        data["path"] = os.path.join(base_dir, data["path"])
    nn_keys = {k: v for (s, k), v in values.items() if s == "nn"}
    threshold_on = nn_keys.pop("threshold_on", "test")
    mse_convention = nn_keys.pop("mse", "mean")
    if threshold_on not in ("test", "train"):
        raise ConfigError("[nn] threshold_on must be test or train")
    if mse_convention not in ("mean", "half_sum"):
        raise ConfigError("[nn] mse must be mean or half_sum")
    try:
        train = nn.TrainConfig(**nn_keys)
    except CreditLabError as exc:
        raise ConfigError(f"[nn] {exc}") from None
    get = lambda s, k, d: values.get((s, k), d)  # noqa: E731
    priors = get("lda", "priors", "proportional")
    if priors not in ("proportional", "equal"):
        raise ConfigError("[lda] priors must be proportional or equal")
    return PipelineConfig(
        data=data,
        base_years=get("split", "base_years", ()),
        test_year=get("split", "test_year", None),
        candidates=get("stepwise", "candidates", ()),
        f_enter=get("stepwise", "f_enter", 3.84),
        f_remove=get("stepwise", "f_remove", 2.71),
        priors=priors,
        train=train,
        threshold_on=threshold_on,
        mse_convention=mse_convention,
        hidden=get("search", "hidden", ()),
        architectures=get("search", "architectures", ()),
        workers=get("search", "workers", 1),
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), os.path.dirname(os.path.abspath(path)))


def synthetic_spec_from(data):
    """Build a :class:`SyntheticSpec` from a ``[data]`` section."""
    try:
        mean0, mean1 = data["mean0"], data["mean1"]
    except KeyError as exc:
        raise ConfigError(f"[data] synthetic source needs {exc.args[0]}") from None
    k = len(mean0)
    if "dimension" in data and data["dimension"] != k:
        raise ConfigError("[data] dimension disagrees with mean0")
    cov_text = data.get("covariance", "identity").strip()
    if cov_text == "identity":
        cov = np.eye(k)
    else:
        try:
            cov = np.array([[float(v) for v in row.split()]
                            for row in cov_text.split(";")])
        except ValueError as exc:
            raise ConfigError(f"[data] covariance: {exc}") from None
    return SyntheticSpec(data.get("n0", 50), data.get("n1", 50), tuple(mean0),
                         tuple(mean1), tuple(map(tuple, cov)),
                         data.get("seed", 0), data.get("years", (2005,)))


def load_pipeline_data(config):
    data = config.data
    source = data.get("source", "csv" if "path" in data else "synthetic")
    if source == "csv":
        if "path" not in data:
            raise ConfigError("[data] path is required for csv source")
        return load_dataset(data["path"],
                            on_zero_division=data.get("on_zero_division", "raise"))
    if source == "synthetic":
        return generate_synthetic(synthetic_spec_from(data))
    raise ConfigError(f"[data] unknown source {source!r}")


# --- pipeline ----------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of one pipeline run.

    ``lda_rate`` is measured on the test sample, like ``nn_rate``;
    ``lda_base_rate`` is the resubstitution rate on the base sample.
    """

    lda_rate: float
    lda_base_rate: float
    nn_rate: float
    lda_table: da.ConfusionTable
    lda_base_table: da.ConfusionTable
    nn_result: nn.EvalResult
    selected_variables: tuple
    trace: da.StepwiseTrace
    group_tests: tuple
    model: da.LdaModel
    search: nn.SearchResult
    test_labels: tuple = ()
    mse_convention: str = "mean"
    files: dict = field(default_factory=dict, compare=False)


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, CreditLabError) and exc.stage is None:
            exc.stage = self.name
        return False


def _default_years(dataset, config):
    years = sorted(set(int(y) for y in dataset.years))
    test_year = config.test_year if config.test_year is not None else years[-1]
    base = config.base_years or tuple(y for y in years if y != test_year)
    return base, test_year


def run_pipeline(dataset, config, out_dir=None):
    """Split, select, fit, search and compare.

    Nothing is written unless every stage succeeds. Errors leave with the
    failing stage recorded on ``exc.stage``.
    """
    with _Stage("data"):
        dataset.require_both_classes()
    with _Stage("split"):
        base_years, test_year = _default_years(dataset, config)
        base, test = split_by_period(dataset, base_years, test_year)
        base.require_both_classes()
        test.require_both_classes()
    with _Stage("stepwise"):
        candidates = config.candidates or dataset.variable_names
        trace = da.stepwise_select(base, candidates, config.f_enter, config.f_remove)
        selected = trace.selected
        tests = tuple(da.group_mean_test(base, v) for v in selected)
    with _Stage("lda"):
        model = da.fit_lda(base, selected, config.priors)
        base_table = da.classification_table(model, base)
        test_table = da.classification_table(model, test)
    with _Stage("search"):
        Xtr, dtr = base.matrix(selected), base.labels.astype(float)
        Xte, dte = test.matrix(selected), test.labels.astype(float)
        search = nn.architecture_search((Xtr, dtr), (Xte, dte),
                                        config.space(len(selected)), config.train,
                                        config.threshold_on, config.workers)
    best = search.best
    report = ComparisonReport(
        lda_rate=test_table.overall_rate,
        lda_base_rate=base_table.overall_rate,
        nn_rate=best.classification_rate,
        lda_table=test_table,
        lda_base_table=base_table,
        nn_result=best,
        selected_variables=selected,
        trace=trace,
        group_tests=tests,
        model=model,
        search=search,
        test_labels=tuple(int(v) for v in test.labels),
        mse_convention=config.mse_convention,
    )
    if out_dir is not None:
        with _Stage("output"):
            files = write_outputs(report, out_dir)
        report.files.update(files)
    return report


def render_outputs(report):
    """Map each output file name to its text content."""
    table4 = (da.confusion_rows(report.lda_base_table, "base")
              + da.confusion_rows(report.lda_table, "test")[1:])
    best = report.nn_result
    search = report.search
    if report.mse_convention == "half_sum":
        search = _half_sum_view(search, report)
    return {
        "table2.csv": da.table_csv(da.group_mean_rows(report.group_tests)),
        "table3.csv": da.table_csv(da.coefficient_rows(report.model)),
        "table4.csv": da.table_csv(table4),
        "table5.csv": da.table_csv(nn.search_rows(search)),
        "table6.csv": da.table_csv(nn.firm_rows(report.test_labels,
                                                best.test_outputs, best.threshold)),
        "report.txt": render_report(report),
    }


def _half_sum_view(search, report):
    # rescale mean MSE to the half-sum convention for display
    n_test = len(report.test_labels)
    n_train = report.lda_base_table.total
    results = tuple(
        nn.EvalResult(r.architecture, 0.5 * n_train * r.train_mse,
                      0.5 * n_test * r.test_mse, r.threshold, r.correct_count,
                      r.total_count, r.n_params, r.error)
        for r in search.results)
    return nn.SearchResult(results, search.best_index)


def render_report(report):
    out = io.StringIO()
    w = out.write
    w("credit risk model comparison\n\n")
    w("stepwise selection\n")
    w(da.table_text(da.trace_rows(report.trace)))
    w("selected: " + " ".join(report.selected_variables) + "\n\n")
    w("group mean tests (base sample)\n")
    w(da.table_text(da.group_mean_rows(report.group_tests)) + "\n")
    w("discriminant function\n")
    w(da.table_text(da.coefficient_rows(report.model)))
    w(f"cutoff {report.model.cutoff + 0.0:.3f}  priors "
      f"{report.model.prior0:.3f}/{report.model.prior1:.3f}\n\n")
    w("discriminant classification, base sample\n")
    w(da.table_text(da.confusion_rows(report.lda_base_table)))
    w(da.format_overall(report.lda_base_table) + "\n\n")
    w("discriminant classification, test sample\n")
    w(da.table_text(da.confusion_rows(report.lda_table)) + "\n")
    w(f"architecture search (mse convention: {report.mse_convention})\n")
    search = (_half_sum_view(report.search, report)
              if report.mse_convention == "half_sum" else report.search)
    w(da.table_text(nn.search_rows(search)) + "\n")
    best = report.nn_result
    w(f"best network {nn.format_architecture(best.architecture)}, "
      f"median threshold {best.threshold:.3f}, "
      f"{best.correct_count}/{best.total_count} test firms correct\n\n")
    w("comparison (test sample classification rate)\n")
    w(f"  discriminant analysis  {100 * report.lda_rate:.2f}%\n")
    w(f"  neural network         {100 * report.nn_rate:.2f}%\n")
    w(f"  discriminant, base sample  {100 * report.lda_base_rate:.2f}%\n")
    return out.getvalue()


def write_outputs(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for name, text in render_outputs(report).items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        paths[name] = path
    return paths
