import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from creditlab import reference
from creditlab.datamodel import Dataset, FirmRecord
from creditlab.discriminant import (
    ConfusionTable,
    LdaModel,
    classification_table,
    classify,
    confusion_rows,
    dump_model,
    f_upper_tail,
    fit_lda,
    format_overall,
    group_mean_test,
    parse_model,
    score,
    stepwise_select,
)
from creditlab.errors import (
    DegenerateVariable,
    DimensionMismatch,
    InvalidConfig,
    MissingClass,
    NoSeparation,
    NoVariableSelected,
    SingularWithinCovariance,
)
from creditlab.harness import SyntheticSpec, generate_synthetic


def make_dataset(x0, x1):
    x0, x1 = np.asarray(x0, dtype=float), np.asarray(x1, dtype=float)
    if x0.ndim == 1:
        x0, x1 = x0[:, None], x1[:, None]
    names = tuple(f"R{i:02d}" for i in range(1, x0.shape[1] + 1))
    recs = [FirmRecord(f"a{i}", 2005, 0, tuple(r)) for i, r in enumerate(x0)]
    recs += [FirmRecord(f"b{i}", 2005, 1, tuple(r)) for i, r in enumerate(x1)]
    return Dataset(recs, names)


# --- group mean tests ------------------------------------------------------

def test_hand_anova_four_points():
    t = group_mean_test(make_dataset([0, 2], [3, 5]), "R01")
    assert t.f_stat == pytest.approx(4.5)
    assert t.wilks_lambda == pytest.approx(4 / 13)
    assert (t.ddl1, t.ddl2) == (1, 2)


def test_against_scipy_oneway():
    rng = np.random.default_rng(1)
    a, b = rng.normal(0, 1, 30), rng.normal(0.6, 1, 45)
    t = group_mean_test(make_dataset(a, b), "R01")
    ref = stats.f_oneway(a, b)
    assert t.f_stat == pytest.approx(ref.statistic, rel=1e-12)
    assert t.p_value == pytest.approx(ref.pvalue, rel=1e-10)
    assert t.f_stat == pytest.approx(t.ddl2 * (1 - t.wilks_lambda) / t.wilks_lambda,
                                     rel=1e-9)


def test_equal_means_give_zero_f():
    t = group_mean_test(make_dataset([0, 2], [1, 1]), "R01")
    assert t.f_stat == 0
    assert t.wilks_lambda == 1
    assert t.p_value == 1


def test_constant_variable_is_degenerate():
    with pytest.raises(DegenerateVariable):
        group_mean_test(make_dataset([3, 3], [3, 3]), "R01")


def test_missing_class():
    ds = Dataset([FirmRecord("a", 2005, 1, (1.0,)), FirmRecord("b", 2005, 1, (2.0,))],
                 ("R01",))
    with pytest.raises(MissingClass):
        group_mean_test(ds, "R01")


def test_published_r08_p_value():
    # F = 8.57 with (1, 170) degrees of freedom is significant at about 0.004
    assert round(f_upper_tail(8.57, 1, 170), 3) == 0.004


@pytest.mark.parametrize("code", sorted(reference.GROUP_MEAN_TESTS))
def test_published_significance_from_f(code):
    # F is printed to two decimals, so allow for its rounding interval
    lam, f, d1, d2, sig = reference.GROUP_MEAN_TESTS[code]
    hi = f_upper_tail(f - 0.005, d1, d2)
    lo = f_upper_tail(f + 0.005, d1, d2)
    assert lo - 0.0005 <= sig <= hi + 0.0005


@pytest.mark.parametrize("code", sorted(reference.GROUP_MEAN_TESTS))
def test_published_f_consistent_with_rounded_lambda(code):
    # lambda is printed to three decimals; F = ddl2 (1 - L) / L is decreasing
    # in L, so the published F must lie inside the image of L's rounding interval
    lam, f, _, d2, _ = reference.GROUP_MEAN_TESTS[code]
    f_of = lambda L: d2 * (1 - L) / L  # noqa: E731
    assert f_of(lam + 0.0005) - 0.005 <= f <= f_of(lam - 0.0005) + 0.005
    assert round(d2 / (d2 + f), 3) == lam


@pytest.mark.parametrize("f,d1,d2", [(0.3, 1, 5), (2.0, 3, 40), (12.0, 1, 170)])
def test_f_tail_matches_scipy(f, d1, d2):
    assert f_upper_tail(f, d1, d2) == pytest.approx(stats.f.sf(f, d1, d2), rel=1e-10)


# --- stepwise ----------------------------------------------------------------

def brute_wilks(ds, variables):
    X = ds.matrix(variables)
    y = ds.labels
    W = sum(np.cov(X[y == k].T, bias=True).reshape(len(variables), -1)
            * np.sum(y == k) for k in (0, 1))
    T = np.cov(X.T, bias=True).reshape(len(variables), -1) * len(y)
    return np.linalg.det(W) / np.linalg.det(T)


def test_first_step_is_best_univariate_f():
    ds = generate_synthetic(SyntheticSpec.isotropic(40, 40, 1.5, dimension=6, seed=4))
    trace = stepwise_select(ds, ds.variable_names)
    fs = {v: group_mean_test(ds, v).f_stat for v in ds.variable_names}
    first = trace.steps[0]
    assert first.variable == max(fs, key=fs.get)
    assert first.f_change == pytest.approx(fs[first.variable], rel=1e-9)


def test_wilks_after_matches_determinant_ratio():
    spec = SyntheticSpec(40, 50, (0, 0, 0, 0), (1.0, 0.5, -0.7, 0.2),
                         ((1, .3, 0, 0), (.3, 1, .2, 0), (0, .2, 1, .1), (0, 0, .1, 1)),
                         seed=2)
    ds = generate_synthetic(spec)
    trace = stepwise_select(ds, ds.variable_names, f_enter=1.0, f_remove=0.5)
    included = []
    for s in trace.steps:
        if s.action == "enter":
            included.append(s.variable)
        else:
            included.remove(s.variable)
        assert s.wilks_after == pytest.approx(brute_wilks(ds, included), rel=1e-9)
    assert set(included) == set(trace.selected)


def test_partial_f_matches_wilks_ratio():
    ds = generate_synthetic(SyntheticSpec.isotropic(30, 30, 2.0, dimension=3,
                                                    seed=7, informative=2))
    trace = stepwise_select(ds, ds.variable_names, f_enter=0.0, f_remove=0.0)
    n = len(ds)
    included = []
    for s in trace.steps:
        p = len(included)
        before = brute_wilks(ds, included) if included else 1.0
        included.append(s.variable)
        after = brute_wilks(ds, included)
        assert s.f_change == pytest.approx((n - 2 - p) * (before / after - 1), rel=1e-8)


def test_planted_variable_is_found():
    rng = np.random.default_rng(11)
    n = 100
    noise0 = rng.normal(size=(n, 5))
    noise1 = rng.normal(size=(n, 5))
    noise1[:, 3] += 5.0
    ds = make_dataset(noise0, noise1)
    fs = [group_mean_test(ds, v).f_stat for v in ds.variable_names]
    assert int(np.argmax(fs)) == 3
    assert sorted(fs)[-2] < 100 < fs[3]
    trace = stepwise_select(ds, ds.variable_names, f_enter=100, f_remove=50)
    assert trace.selected == ("R04",)


def test_identical_copies_enter_once():
    rng = np.random.default_rng(3)
    x0, x1 = rng.normal(0, 1, 25), rng.normal(1.5, 1, 25)
    ds = make_dataset(np.column_stack([x0, x0, x0]), np.column_stack([x1, x1, x1]))
    trace = stepwise_select(ds, ["R02", "R01", "R03"])
    assert trace.selected == ("R02",)
    assert len(trace.steps) == 1


def test_infinite_threshold_selects_nothing():
    ds = make_dataset([0, 1, 2], [3, 4, 6])
    with pytest.raises(NoVariableSelected):
        stepwise_select(ds, ["R01"], f_enter=math.inf)


def test_single_candidate_zero_threshold():
    ds = make_dataset([0, 1, 2], [3, 4, 6])
    assert stepwise_select(ds, ["R01"], f_enter=0.0, f_remove=0.0).selected == ("R01",)


def test_removal_step_is_recorded():
    # R02 - R03 recovers the signal almost exactly, which makes R01 redundant
    rng = np.random.default_rng(8)
    n = 60

    def group(shift):
        s = rng.normal(shift, 1, n)
        u = rng.normal(0, 2, n)
        return np.column_stack([s + rng.normal(0, 0.7, n), s + u,
                                u + rng.normal(0, 0.05, n)])

    ds = make_dataset(group(0), group(1))
    trace = stepwise_select(ds, ds.variable_names)
    assert [(s.action, s.variable) for s in trace.steps] == [
        ("enter", "R01"), ("enter", "R03"), ("enter", "R02"), ("remove", "R01")]
    assert trace.steps[-1].f_change < 2.71
    assert trace.steps[-1].wilks_after > trace.steps[-2].wilks_after
    assert trace.selected == ("R02", "R03")
    enters = [s.wilks_after for s in trace.steps if s.action == "enter"]
    assert enters == sorted(enters, reverse=True)


def test_bad_thresholds():
    ds = make_dataset([0, 1, 2], [3, 4, 6])
    with pytest.raises(InvalidConfig):
        stepwise_select(ds, ["R01"], f_enter=1.0, f_remove=2.0)
    with pytest.raises(InvalidConfig):
        stepwise_select(ds, [])


# --- fitting ---------------------------------------------------------------

def test_one_dimensional_hand_fit():
    m = fit_lda(make_dataset([0, 2], [4, 6]), ["R01"], priors="equal")
    r2 = math.sqrt(2)
    assert m.beta[0] == pytest.approx(1 / r2)
    assert m.alpha == pytest.approx(-3 / r2)
    assert m.centroid0 == pytest.approx(-r2)
    assert m.centroid1 == pytest.approx(r2)
    assert m.cutoff == pytest.approx(0.0, abs=1e-12)
    assert classify(m, [0.0]) == 0
    assert classify(m, [6.0]) == 1


def test_proportional_priors_shift_cutoff():
    ds = make_dataset([0, 2], [4, 6, 4, 6])
    eq = fit_lda(ds, ["R01"], "equal")
    prop = fit_lda(ds, ["R01"], "proportional")
    assert (prop.prior0, prop.prior1) == pytest.approx((1 / 3, 2 / 3))
    assert prop.cutoff < eq.cutoff
    expected = eq.cutoff - math.log(2) / (prop.centroid1 - prop.centroid0)
    assert prop.cutoff == pytest.approx(expected)


def test_unit_within_variance_and_zero_grand_mean():
    ds = generate_synthetic(SyntheticSpec.isotropic(30, 45, 2.0, dimension=3, seed=9))
    m = fit_lda(ds, ds.variable_names)
    z = score(m, ds.matrix())
    y = ds.labels
    assert z.mean() == pytest.approx(0.0, abs=1e-12)
    within = (np.sum((z[y == 0] - z[y == 0].mean()) ** 2)
              + np.sum((z[y == 1] - z[y == 1].mean()) ** 2)) / (len(z) - 2)
    assert within == pytest.approx(1.0)
    assert z[y == 1].mean() == pytest.approx(m.centroid1)


def test_affine_relabeling_keeps_scores():
    rng = np.random.default_rng(2)
    x0, x1 = rng.normal(0, 1, (20, 2)), rng.normal(1, 1, (25, 2))
    m = fit_lda(make_dataset(x0, x1), ["R01", "R02"])
    a, b = -3.5, 10.0
    y0, y1 = x0.copy(), x1.copy()
    y0[:, 1] = a * y0[:, 1] + b
    y1[:, 1] = a * y1[:, 1] + b
    m2 = fit_lda(make_dataset(y0, y1), ["R01", "R02"])
    np.testing.assert_allclose(score(m, np.vstack([x0, x1])),
                               score(m2, np.vstack([y0, y1])), atol=1e-10)


def test_identical_classes_have_no_separation():
    with pytest.raises(NoSeparation):
        fit_lda(make_dataset([0, 2], [2, 0]), ["R01"])


def test_singular_within_covariance():
    x0 = np.array([[0, 0], [1, 1], [2, 2.]])
    with pytest.raises(SingularWithinCovariance):
        fit_lda(make_dataset(x0, x0 + 3), ["R01", "R02"])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_direction_collinear_with_dense_solve(k, seed):
    rng = np.random.default_rng(seed)
    n0 = int(rng.integers(k + 2, 20))
    n1 = int(rng.integers(k + 2, 20))
    x0, x1 = rng.normal(size=(n0, k)), rng.normal(0.5, 1.0, size=(n1, k))
    m = fit_lda(make_dataset(x0, x1), [f"R{i:02d}" for i in range(1, k + 1)])
    W = (np.cov(x0.T, ddof=1).reshape(k, k) * (n0 - 1)
         + np.cov(x1.T, ddof=1).reshape(k, k) * (n1 - 1)) / (n0 + n1 - 2)
    ref = np.linalg.solve(W, x1.mean(0) - x0.mean(0))
    beta = np.asarray(m.beta)
    cos = beta @ ref / (np.linalg.norm(beta) * np.linalg.norm(ref))
    assert cos >= 1 - 1e-9


# --- scoring ---------------------------------------------------------------

def test_canonical_model_constant():
    m = reference.canonical_model()
    assert score(m, np.zeros(9)) == -0.188


def test_canonical_model_unit_vectors():
    m = reference.canonical_model()
    for i, code in enumerate(m.variables):
        x = np.zeros(9)
        x[i] = 1.0
        expected = reference.CANONICAL_CONSTANT + reference.CANONICAL_COEFFICIENTS[code]
        assert round(score(m, x), 3) == pytest.approx(expected, abs=1e-12)
    x = np.zeros(9)
    x[0] = 1
    assert score(m, x) == pytest.approx(1.483)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=6, max_size=6))
def test_score_is_affine(v):
    m = LdaModel(("R01", "R02", "R03"), 0.4, (1.5, -2.0, 0.25))
    x, y = np.array(v[:3]), np.array(v[3:])
    assert score(m, x + y) + m.alpha == pytest.approx(score(m, x) + score(m, y),
                                                      rel=1e-9, abs=1e-9)


def test_score_dimension_mismatch():
    m = LdaModel(("R01",), 0.0, (1.0,))
    with pytest.raises(DimensionMismatch):
        score(m, [1.0, 2.0])


def test_tie_at_cutoff_is_class_one():
    m = LdaModel(("R01",), 0.0, (1.0,), cutoff=0.25)
    assert classify(m, [0.25]) == 1
    assert classify(m, [0.2499]) == 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100), st.lists(st.floats(-10, 10), min_size=2, max_size=2))
def test_classify_invariant_under_positive_rescaling(c, x):
    m = LdaModel(("R01", "R02"), 0.3, (1.2, -0.7), -1.0, 2.0, 0.4, 0.6, 0.1)
    m2 = LdaModel(m.variables, c * m.alpha, tuple(c * b for b in m.beta),
                  c * m.centroid0, c * m.centroid1, m.prior0, m.prior1, c * m.cutoff)
    z = score(m, x)
    if abs(z - m.cutoff) > 1e-9:
        assert classify(m, x) == classify(m2, x)


def test_model_file_round_trip():
    m = fit_lda(make_dataset([0, 2, 1], [4, 6, 5]), ["R01"])
    assert parse_model(dump_model(m)) == m


# --- confusion ---------------------------------------------------------------

def test_published_confusion_rates():
    t = ConfusionTable(*reference.BASE_CONFUSION)
    assert round(100 * t.class0_rate, 3) == 19.231
    assert round(100 * t.class1_rate, 3) == 98.333
    assert round(100 * t.overall_rate, 1) == 74.4
    assert format_overall(t).startswith("74.4%")
    rows = confusion_rows(t)
    assert rows[3][2:4] == ["19.231", "80.769"]
    assert rows[4][2:4] == ["1.667", "98.333"]


def test_perfect_classifier():
    ds = make_dataset([0, 1], [5, 6])
    m = fit_lda(ds, ["R01"])
    t = classification_table(m, ds)
    assert (t.n01, t.n10) == (0, 0)
    assert t.overall_rate == 1.0


def test_table_matches_loop_count():
    ds = generate_synthetic(SyntheticSpec.isotropic(10, 10, 1.0, dimension=2, seed=6))
    m = LdaModel(("R01", "R02"), -0.3, (0.9, 0.4))
    counts = {k: 0 for k in itertools.product((0, 1), repeat=2)}
    for rec in ds.records:
        z = m.alpha + sum(b * v for b, v in zip(m.beta, rec.ratios))
        counts[(rec.label, int(z >= m.cutoff))] += 1
    t = classification_table(m, ds)
    assert (t.n00, t.n01, t.n10, t.n11) == (counts[0, 0], counts[0, 1],
                                            counts[1, 0], counts[1, 1])
    assert t.n00 + t.n01 == 10


def test_overall_rate_ignores_record_order():
    ds = generate_synthetic(SyntheticSpec.isotropic(15, 12, 1.0, dimension=2, seed=8))
    m = fit_lda(ds, ds.variable_names)
    shuffled = Dataset(list(reversed(ds.records)), ds.variable_names)
    assert classification_table(m, ds) == classification_table(m, shuffled)
