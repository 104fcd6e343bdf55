"""Reference results of the original 86-firm study (2005-2007), kept as
replay fixtures. The underlying bank data is not available, so these
numbers can only be replayed, never refit."""
from importlib import resources

SELECTED_VARIABLES = ("R02", "R03", "R04", "R05", "R06", "R08", "R09", "R10", "R12")

# variable -> (wilks_lambda, F, ddl1, ddl2, significance)
GROUP_MEAN_TESTS = {
    "R02": (0.992, 1.36, 1, 170, 0.245),
    "R03": (0.993, 1.15, 1, 170, 0.285),
    "R04": (0.989, 1.87, 1, 170, 0.174),
    "R05": (0.979, 3.64, 1, 170, 0.058),
    "R06": (0.999, 0.16, 1, 170, 0.693),
    "R08": (0.952, 8.57, 1, 170, 0.004),
    "R09": (0.984, 2.70, 1, 170, 0.102),
    "R10": (0.986, 2.34, 1, 170, 0.128),
    "R12": (0.953, 8.38, 1, 170, 0.004),
}

CANONICAL_COEFFICIENTS = {
    "R02": 1.671,
    "R03": -0.779,
    "R04": -0.566,
    "R05": -6.151,
    "R06": 0.087,
    "R08": 1.364,
    "R09": 0.008,
    "R10": 0.005,
    "R12": 0.037,
}
CANONICAL_CONSTANT = -0.188

# base-sample classification counts: (n00, n01, n10, n11)
BASE_CONFUSION = (10, 42, 2, 118)

# (architecture, train MSE, test MSE)
ARCHITECTURE_SEARCH = (
    ((9, 1, 1), 0.1485, 0.16038),
    ((9, 3, 1), 0.1249, 0.14437),
    ((9, 4, 1), 0.1013, 0.1053),
    ((9, 6, 1), 0.1046, 0.11895),
    ((9, 7, 1), 0.0807, 0.1257),
    ((9, 4, 6, 1), 0.0569, 0.09744),
    ((9, 6, 8, 1), 0.0086, 0.0608),
    ((9, 2, 4, 5, 1), 0.1298, 0.14756),
    ((9, 5, 6, 7, 1), 0.0671, 0.08604),
    ((9, 2, 3, 4, 3, 1), 0.1384, 0.1523),
    ((9, 3, 4, 4, 4, 1), 0.0846, 0.11891),
    ((9, 1, 2, 3, 4, 1, 1), 0.1106, 0.16454),
)

MEDIAN_THRESHOLD = 0.785

# test-sample firms 1..86: desired class and network output
TEST_DESIRED = (1,) * 60 + (0,) * 26
TEST_OUTPUTS = (
    0.852, 0.785, 0.798, 0.795, 0.791, 0.85, 0.808, 0.896, 0.799, 0.008,
    0.892, 0.865, 0.516, 0.873, 0.848, 0.008, 0.785, 0.882, 0.818, 0.803,
    0.785, 0.791, 0.785, 0.852, 0.884, 0.809, 0.832, 0.828, 0.785, 0.743,
    0.304, 0.864, 0.873, 0.887, 0.785, 0.876, 0.262, 0.151, 0.899, 0.039,
    0.872, 0.191, 0.817, 0.617, 0.785, 0.859, 0.869, 0.54, 0.833, 0.926,
    0.95, 0.835, 0.85, 0.877, 0.785, 0.563, 0.862, 0.897, 0.868, 0.041,
    0.523, 0.333, 0.325, 0.466, 0.788, 0.072, 0.27, 0.069, 0.433, 0.192,
    0.366, 0.371, 0.162, 0.111, 0.132, 0.878, 0.287, 0.008, 0.558, 0.441,
    0.445, 0.812, 0.821, 0.611, 0.008, 0.24,
)
# classes as printed next to each output
TEST_ASSIGNED = (
    1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1,
    0, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1,
    1, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1,
    0, 0, 1, 0, 1, 0, 1, 0, 1, 1, 1, 0,
    1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 0,
    0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0,
    0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0,
    0, 0,
)

LDA_BASE_RATE = 0.744
NN_TEST_RATE = 0.8023


def canonical_model_path():
    return resources.files("creditlab") / "data" / "table3.model"


def canonical_model():
    from .discriminant import parse_model
    return parse_model(canonical_model_path().read_text(encoding="utf-8"))
