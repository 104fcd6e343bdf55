"""Two-group linear discriminant analysis.

Covers the univariate group-mean tests (Wilks' lambda and F), forward
stepwise selection with removal, canonical discriminant fitting, scoring,
classification and the confusion table, plus report emitters for the
group-mean, coefficient and classification tables.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import (
    DegenerateVariable,
    DimensionMismatch,
    InvalidConfig,
    MissingClass,
    NoSeparation,
    NoVariableSelected,
    SingularWithinCovariance,
)

# Candidates whose within-group variance is (almost) fully explained by the
# variables already entered are not eligible to enter.
MIN_TOLERANCE = 1e-8


def _split_classes(dataset, variables):
    dataset.require_both_classes()
    X = dataset.matrix(variables)
    y = dataset.labels
    return X[y == 0], X[y == 1]


def f_upper_tail(f_stat, dfn, dfd):
    """P(F > f_stat) for an F(dfn, dfd) variable via the regularized
    incomplete beta function."""
    if f_stat <= 0:
        return 1.0
    if math.isinf(f_stat):
        return 0.0
    x = dfd / (dfd + dfn * f_stat)
    return float(special.betainc(dfd / 2.0, dfn / 2.0, x))


@dataclass(frozen=True)
class GroupMeanTest:
    variable: str
    wilks_lambda: float
    f_stat: float
    ddl1: int
    ddl2: int
    p_value: float


def group_mean_test(dataset, variable):
    """One-way ANOVA of ``variable`` across the two classes.

    Examples
    --------
    Class 0 = {0, 2} and class 1 = {3, 5} give SSB = 9 and SSW = 4, hence
    F = (9 / 1) / (4 / 2) = 4.5 and lambda = 4 / 13.
    """
    x0, x1 = _split_classes(dataset, [variable])
    x0, x1 = x0[:, 0], x1[:, 0]
    n = x0.size + x1.size
    grand = (x0.sum() + x1.sum()) / n
    ssw = float(np.sum((x0 - x0.mean()) ** 2) + np.sum((x1 - x1.mean()) ** 2))
    ssb = float(x0.size * (x0.mean() - grand) ** 2
                + x1.size * (x1.mean() - grand) ** 2)
    if ssw <= 0.0:
        raise DegenerateVariable(f"{variable} has zero within-group variance")
    ddl1, ddl2 = 1, n - 2
    if ddl2 < 1:
        raise DegenerateVariable("need at least three observations")
    f_stat = (ssb / ddl1) / (ssw / ddl2)
    lam = ssw / (ssw + ssb)
    return GroupMeanTest(variable, lam, f_stat, ddl1, ddl2,
                         f_upper_tail(f_stat, ddl1, ddl2))


# --- stepwise selection --------------------------------------------------

@dataclass(frozen=True)
class StepwiseStep:
    step: int
    action: str  # "enter" or "remove"
    variable: str
    wilks_after: float
    f_change: float


@dataclass(frozen=True)
class StepwiseTrace:
    steps: tuple
    selected: tuple


def _sscp(dataset, variables):
    x0, x1 = _split_classes(dataset, variables)
    c0 = x0 - x0.mean(axis=0)
    c1 = x1 - x1.mean(axis=0)
    W = c0.T @ c0 + c1.T @ c1
    X = np.vstack([x0, x1])
    c = X - X.mean(axis=0)
    T = c.T @ c
    return W, T, X.shape[0]


def _conditional(M, j, included):
    """Residual sum of squares of variable j after regression on ``included``."""
    if not included:
        return M[j, j]
    S = list(included)
    m_s = M[np.ix_(S, [j])]
    return float(M[j, j] - (m_s.T @ np.linalg.solve(M[np.ix_(S, S)], m_s)).item())


def _wilks(W, T, included):
    if not included:
        return 1.0
    S = list(included)
    _, logw = np.linalg.slogdet(W[np.ix_(S, S)])
    _, logt = np.linalg.slogdet(T[np.ix_(S, S)])
    return float(np.exp(logw - logt))


def stepwise_select(dataset, candidates, f_enter=3.84, f_remove=2.71,
                    max_steps=None):
    """Forward stepwise selection with removal, minimizing Wilks' lambda.

    At each step the candidate with the largest partial F-to-enter is
    entered if its F exceeds ``f_enter``; afterwards included variables
    whose F-to-remove falls below ``f_remove`` are removed one at a time,
    weakest first. Ties go to the earlier candidate.

    The partial F for entering a variable x into a set of p variables is
    ``(n - 2 - p) * (lambda_p / lambda_{p+1} - 1)`` with (1, n - 2 - p)
    degrees of freedom; the F-to-remove is the same statistic computed for
    the set without x.
    """
    candidates = list(candidates)
    if not candidates:
        raise InvalidConfig("no candidate variables")
    if not (f_enter >= f_remove >= 0):
        raise InvalidConfig("require f_enter >= f_remove >= 0")
    if len(set(candidates)) != len(candidates):
        raise InvalidConfig("duplicate candidate codes")
    W, T, n = _sscp(dataset, candidates)
    for j, code in enumerate(candidates):
        if W[j, j] <= 0.0:
            raise DegenerateVariable(f"{code} has zero within-group variance")
    if max_steps is None:
        max_steps = 4 * len(candidates) + 4

    included = []
    steps = []
    lam = 1.0
    while len(steps) < max_steps:
        p = len(included)
        best_j, best_f = None, -np.inf
        if n - 2 - p >= 1:
            for j in range(len(candidates)):
                if j in included:
                    continue
                w = _conditional(W, j, included)
                t = _conditional(T, j, included)
                if w / W[j, j] < MIN_TOLERANCE:
                    continue
                f = (n - 2 - p) * (t / w - 1.0)
                if f > best_f:
                    best_j, best_f = j, f
        if best_j is None or not best_f > f_enter:
            break
        included.append(best_j)
        lam = _wilks(W, T, included)
        steps.append(StepwiseStep(len(steps) + 1, "enter",
                                  candidates[best_j], lam, float(best_f)))

        while len(included) > 1 and len(steps) < max_steps:
            p = len(included)
            worst_j, worst_f = None, np.inf
            for j in included:
                rest = [k for k in included if k != j]
                w = _conditional(W, j, rest)
                t = _conditional(T, j, rest)
                f = (n - 2 - (p - 1)) * (t / w - 1.0)
                if f < worst_f:
                    worst_j, worst_f = j, f
            if not worst_f < f_remove:
                break
            included.remove(worst_j)
            lam = _wilks(W, T, included)
            steps.append(StepwiseStep(len(steps) + 1, "remove",
                                      candidates[worst_j], lam, float(worst_f)))

    if not included:
        raise NoVariableSelected(
            f"no candidate has F-to-enter above {f_enter}")
    # report in candidate order, not entry order
    selected = tuple(candidates[j] for j in sorted(included))
    return StepwiseTrace(tuple(steps), selected)


# --- canonical discriminant ----------------------------------------------

@dataclass(frozen=True)
class LdaModel:
    """Linear score ``alpha + beta . x`` with its decision cutoff.

    Centroids may be NaN for models loaded from published coefficients,
    where only the scoring function is known.
    """

    variables: tuple
    alpha: float
    beta: tuple
    centroid0: float = float("nan")
    centroid1: float = float("nan")
    prior0: float = 0.5
    prior1: float = 0.5
    cutoff: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.beta) != len(self.variables):
            raise DimensionMismatch("beta and variables differ in length")
        if not (0 < self.prior0 < 1 and 0 < self.prior1 < 1
                and abs(self.prior0 + self.prior1 - 1) < 1e-12):
            raise InvalidConfig("priors must lie in (0, 1) and sum to 1")
        if (math.isfinite(self.centroid0) and math.isfinite(self.centroid1)
                and not self.centroid1 > self.centroid0):
            raise InvalidConfig("centroid1 must exceed centroid0")


def fit_lda(dataset, variables, priors="proportional"):
    """Fit the two-group canonical discriminant function.

    The direction is ``W^-1 (mu1 - mu0)`` with ``W`` the pooled
    within-group covariance, scaled to unit pooled within-group score
    variance and oriented so that class 1 scores higher. The constant
    centres the score on the (size-weighted) grand mean.
    """
    variables = tuple(variables)
    if not variables:
        raise DimensionMismatch("no variables")
    x0, x1 = _split_classes(dataset, variables)
    n0, n1 = len(x0), len(x1)
    n = n0 + n1
    if n <= 2:
        raise SingularWithinCovariance("need more than two observations")
    mu0, mu1 = x0.mean(axis=0), x1.mean(axis=0)
    c0, c1 = x0 - mu0, x1 - mu1
    W = (c0.T @ c0 + c1.T @ c1) / (n - 2)
    try:
        chol = np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        raise SingularWithinCovariance("pooled within covariance is singular") from None
    if np.linalg.cond(W) > 1e12:
        raise SingularWithinCovariance("pooled within covariance is ill-conditioned")
    diff = mu1 - mu0
    scale = np.sqrt(np.diag(W))
    if np.all(np.abs(diff) <= 1e-12 * scale):
        raise NoSeparation("class means coincide")
    # v = W^-1 diff via the Cholesky factor
    v = np.linalg.solve(chol.T, np.linalg.solve(chol, diff))
    var = float(v @ W @ v)
    beta = v / np.sqrt(var)
    grand = (n0 * mu0 + n1 * mu1) / n
    alpha = -float(beta @ grand)
    cen0 = float(alpha + beta @ mu0)
    cen1 = float(alpha + beta @ mu1)
    if priors == "proportional":
        p0, p1 = n0 / n, n1 / n
    elif priors == "equal":
        p0 = p1 = 0.5
    else:
        raise InvalidConfig(f"unknown priors {priors!r}")
    cutoff = 0.5 * (cen0 + cen1) - math.log(p1 / p0) / (cen1 - cen0)
    return LdaModel(variables, alpha, tuple(beta), cen0, cen1, p0, p1, cutoff)


def _as_vector(model, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (len(model.beta),):
        raise DimensionMismatch(
            f"expected {len(model.beta)} values, got shape {x.shape}")
    return x


def score(model, x):
    """Discriminant score ``alpha + sum(beta_i * x_i)``.

    Accepts one vector or an ``(n, k)`` array (one score per row).
    """
    x = _as_vector(model, x)
    z = model.alpha + x @ np.asarray(model.beta)
    return float(z) if np.ndim(z) == 0 else z


def classify(model, x):
    """Class 1 when the score reaches the cutoff (ties go to class 1)."""
    z = score(model, x)
    if np.ndim(z) == 0:
        return int(z >= model.cutoff)
    return (z >= model.cutoff).astype(int)


@dataclass(frozen=True)
class ConfusionTable:
    """Actual (first index) by predicted (second index) counts."""

    n00: int
    n01: int
    n10: int
    n11: int

    @property
    def total(self):
        return self.n00 + self.n01 + self.n10 + self.n11

    @property
    def class0_rate(self):
        d = self.n00 + self.n01
        return self.n00 / d if d else float("nan")

    @property
    def class1_rate(self):
        d = self.n10 + self.n11
        return self.n11 / d if d else float("nan")

    @property
    def overall_rate(self):
        return (self.n00 + self.n11) / self.total if self.total else float("nan")

    @classmethod
    def from_labels(cls, actual, predicted):
        actual = np.asarray(actual, dtype=int)
        predicted = np.asarray(predicted, dtype=int)
        if actual.shape != predicted.shape:
            raise DimensionMismatch("actual and predicted differ in length")
        return cls(int(np.sum((actual == 0) & (predicted == 0))),
                   int(np.sum((actual == 0) & (predicted == 1))),
                   int(np.sum((actual == 1) & (predicted == 0))),
                   int(np.sum((actual == 1) & (predicted == 1))))


def classification_table(model, dataset):
    X = dataset.matrix(model.variables)
    return ConfusionTable.from_labels(dataset.labels, classify(model, X))


# --- model files -----------------------------------------------------------

MODEL_HEADER = "creditlab-lda 1"


def dump_model(model):
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    lines = [MODEL_HEADER,
             "variables " + " ".join(model.variables),
             "alpha " + fmt(model.alpha),
             "beta " + " ".join(fmt(b) for b in model.beta),
             "centroid0 " + fmt(model.centroid0),
             "centroid1 " + fmt(model.centroid1),
             "prior0 " + fmt(model.prior0),
             "prior1 " + fmt(model.prior1),
             "cutoff " + fmt(model.cutoff)]
    return "\n".join(lines) + "\n"


def parse_model(text):
    """Parse the plain-text model format written by :func:`dump_model`.

    Only ``variables``, ``alpha`` and ``beta`` are mandatory.
    """
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0] != MODEL_HEADER:
        raise InvalidConfig(f"not a model file (expected {MODEL_HEADER!r})")
    entries = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        entries[key] = rest.split()
    try:
        kwargs = dict(variables=tuple(entries["variables"]),
                      alpha=float(entries["alpha"][0]),
                      beta=tuple(float(b) for b in entries["beta"]))
    except (KeyError, IndexError, ValueError) as exc:
        raise InvalidConfig(f"malformed model file: {exc}") from None
    for key in ("centroid0", "centroid1", "prior0", "prior1", "cutoff"):
        if key in entries:
            kwargs[key] = float(entries[key][0])
    return LdaModel(**kwargs)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# --- report emitters -----------------------------------------------------

def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _aligned(rows):
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(c).rjust(w) for c, w in zip(r, widths))
                     for r in rows) + "\n"


def group_mean_rows(tests):
    rows = [["variable", "wilks_lambda", "F", "ddl1", "ddl2", "p_value"]]
    for t in tests:
        rows.append([t.variable, f"{t.wilks_lambda:.3f}", f"{t.f_stat:.2f}",
                     t.ddl1, t.ddl2, f"{t.p_value:.3f}"])
    return rows


def coefficient_rows(model):
    rows = [["variable", "coefficient"]]
    rows += [[v, f"{b:.3f}"] for v, b in zip(model.variables, model.beta)]
    rows.append(["(constant)", f"{model.alpha:.3f}"])
    return rows


def confusion_rows(table, sample=None):
    """Counts and row percentages laid out like a classification table."""
    head = ["sample"] if sample is not None else []
    pre = [sample] if sample is not None else []
    pct = lambda a, b: f"{100 * a / b:.3f}" if b else "nan"  # noqa: E731
    r0 = table.n00 + table.n01
    r1 = table.n10 + table.n11
    return [
        head + ["kind", "actual", "pred_0", "pred_1", "total"],
        pre + ["count", 0, table.n00, table.n01, r0],
        pre + ["count", 1, table.n10, table.n11, r1],
        pre + ["percent", 0, pct(table.n00, r0), pct(table.n01, r0), "100"],
        pre + ["percent", 1, pct(table.n10, r1), pct(table.n11, r1), "100"],
        pre + ["overall", "", "", "", pct(table.n00 + table.n11, table.total)],
    ]


def format_overall(table):
    """The one-line footer, overall rate at one decimal."""
    return (f"{100 * table.overall_rate:.1f}% of original observations "
            "correctly classified")


def table_csv(rows):
    return _csv(rows)


def table_text(rows):
    return _aligned(rows)


def trace_rows(trace):
    rows = [["step", "action", "variable", "wilks_after", "f_change"]]
    for s in trace.steps:
        rows.append([s.step, s.action, s.variable, f"{s.wilks_after:.3f}",
                     f"{s.f_change:.2f}"])
    return rows
