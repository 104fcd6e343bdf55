"""Financial statements, the fifteen credit ratios, labelled datasets and
the year-based base/test split.

Datasets travel as CSV (UTF-8, header row, comma separator, ``.`` decimal
point). Reserved columns are ``firm_id``, ``year`` and ``label``; the
remaining columns are either the sixteen statement fields (ratios are then
computed on load) or the ratio codes ``R01``..``R15`` taken verbatim.
"""
import csv
import io
import math
from dataclasses import dataclass, field, fields
from typing import NamedTuple

import numpy as np

from .errors import (
    DivisionByZero,
    InvalidLabel,
    MissingClass,
    MissingColumn,
    ParseError,
    SchemaError,
    YearOutsideSplit,
)

RESERVED_COLUMNS = ("firm_id", "year", "label")


@dataclass(frozen=True)
class FinancialStatement:
    """Raw accounting line items of one firm for one year.

    All amounts share a single currency unit. Signs are unconstrained:
    losses and negative working capital are legal.
    """

    chiffre_affaires: float
    valeur_ajoutee: float
    excedent_brut_exploitation: float
    resultat_exploitation: float
    charges_financieres: float
    resultat_net: float
    fonds_propres_nets: float
    total_bilan: float
    dettes_lmt: float
    capitaux_permanents: float
    cash_flow_net: float
    cash_flow: float
    actifs_immobilises: float
    capitaux_propres: float
    fonds_de_roulement: float
    immobilisations_nettes: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")


STATEMENT_FIELDS = tuple(f.name for f in fields(FinancialStatement))

# code -> (numerator, denominator); total_bilan doubles as total assets (R11)
RATIO_DEFINITIONS = {
    "R01": ("valeur_ajoutee", "chiffre_affaires"),
    "R02": ("excedent_brut_exploitation", "chiffre_affaires"),
    "R03": ("resultat_exploitation", "chiffre_affaires"),
    "R04": ("charges_financieres", "chiffre_affaires"),
    "R05": ("resultat_net", "chiffre_affaires"),
    "R06": ("resultat_net", "fonds_propres_nets"),
    "R07": ("fonds_propres_nets", "total_bilan"),
    "R08": ("dettes_lmt", "capitaux_permanents"),
    "R09": ("dettes_lmt", "cash_flow_net"),
    "R10": ("resultat_net", "total_bilan"),
    "R11": ("actifs_immobilises", "total_bilan"),
    "R12": ("capitaux_propres", "capitaux_permanents"),
    "R13": ("cash_flow", "chiffre_affaires"),
    "R14": ("fonds_de_roulement", "chiffre_affaires"),
    "R15": ("capitaux_permanents", "immobilisations_nettes"),
}

RATIO_CODES = tuple(RATIO_DEFINITIONS)

RATIO_LABELS = {
    "R01": "Taux de valeur ajoutee",
    "R02": "Rentabilite operationnelle",
    "R03": "Marge operationnelle",
    "R04": "Ratio d'endettement",
    "R05": "Ratio de marge beneficiaire",
    "R06": "Rentabilite financiere",
    "R07": "Ratio de solvabilite",
    "R08": "Dependance financiere",
    "R09": "Capacite de remboursement",
    "R10": "Rentabilite economique",
    "R11": "Ratio d'immobilisation de l'actif",
    "R12": "Autonomie financiere",
    "R13": "Marge brute d'autofinancement",
    "R14": "Evolution du fonds de roulement",
    "R15": "Ratio de synthese",
}


class RatioVector(NamedTuple):
    r01: float
    r02: float
    r03: float
    r04: float
    r05: float
    r06: float
    r07: float
    r08: float
    r09: float
    r10: float
    r11: float
    r12: float
    r13: float
    r14: float
    r15: float

    def by_code(self, code):
        return self[RATIO_CODES.index(code)]


def compute_ratios(statement):
    """Compute the fifteen ratios of a statement.

    Raises
    ------
    DivisionByZero
        If a denominator is exactly zero. The offending code is carried on
        the exception; dropping or aborting is the caller's decision.
    """
    values = []
    for code, (num, den) in RATIO_DEFINITIONS.items():
        denominator = getattr(statement, den)
        if denominator == 0:
            raise DivisionByZero(code)
        values.append(getattr(statement, num) / denominator)
    return RatioVector(*values)


@dataclass(frozen=True)
class FirmRecord:
    firm_id: str
    year: int
    label: int
    ratios: tuple

    def __post_init__(self):
        if self.label not in (0, 1) or isinstance(self.label, bool):
            raise InvalidLabel(None, self.label)
        object.__setattr__(self, "ratios", tuple(float(v) for v in self.ratios))


@dataclass(frozen=True)
class Dataset:
    """Ordered labelled observations sharing one variable set.

    ``dropped`` lists ``(row, ratio_code)`` pairs for source rows that were
    skipped because of a zero denominator.
    """

    records: tuple
    variable_names: tuple
    dropped: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        k = len(self.variable_names)
        for rec in self.records:
            if len(rec.ratios) != k:
                raise SchemaError(
                    f"record {rec.firm_id!r} has {len(rec.ratios)} values, "
                    f"expected {k}")

    def __len__(self):
        return len(self.records)

    @property
    def labels(self):
        return np.array([r.label for r in self.records], dtype=int)

    @property
    def years(self):
        return np.array([r.year for r in self.records], dtype=int)

    def matrix(self, variables=None):
        """Return the ``(n, k)`` float array of the requested variables."""
        if variables is None:
            variables = self.variable_names
        idx = [self._index(v) for v in variables]
        if not self.records:
            return np.empty((0, len(idx)))
        full = np.array([r.ratios for r in self.records], dtype=float)
        return full[:, idx]

    def _index(self, code):
        try:
            return self.variable_names.index(code)
        except ValueError:
            raise MissingColumn(code) from None

    def select(self, variables):
        """Restrict every record to ``variables`` (in that order)."""
        idx = [self._index(v) for v in variables]
        recs = [FirmRecord(r.firm_id, r.year, r.label,
                           tuple(r.ratios[i] for i in idx))
                for r in self.records]
        return Dataset(recs, tuple(variables))

    def subset(self, mask):
        recs = [r for r, keep in zip(self.records, mask) if keep]
        return Dataset(recs, self.variable_names)

    def class_counts(self):
        y = self.labels
        return int(np.sum(y == 0)), int(np.sum(y == 1))

    def require_both_classes(self):
        n0, n1 = self.class_counts()
        if n0 == 0 or n1 == 0:
            missing = 0 if n0 == 0 else 1
            raise MissingClass(f"dataset has no class-{missing} records")


def _parse_float(text, row, column):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(row, column, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(row, column, f"non-finite value {text!r}")
    return value


def _parse_int(text, row, column):
    try:
        return int(text.strip())
    except (AttributeError, ValueError):
        raise ParseError(row, column, f"not an integer: {text!r}") from None


def load_dataset(source, schema=None, on_zero_division="raise"):
    """Read a dataset from CSV.

    Parameters
    ----------
    source : str, path-like or text/byte stream
        CSV text, an open file, or a path.
    schema : dict, optional
        Maps CSV column names to target names (``firm_id``, ``year``,
        ``label``, a statement field, or a ratio code). Columns not in the
        mapping keep their own name. Unknown targets are rejected.
    on_zero_division : {"raise", "drop"}
        What to do with rows whose statement has a zero ratio denominator.
        Dropped rows are listed in ``Dataset.dropped``.

    Rows are numbered from 1, counting data rows only (the header is row 0).
    """
    if on_zero_division not in ("raise", "drop"):
        raise ValueError("on_zero_division must be 'raise' or 'drop'")
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn("firm_id") from None
    schema = dict(schema or {})
    targets = [schema.get(col.strip(), col.strip()) for col in header]

    for name in RESERVED_COLUMNS:
        if name not in targets:
            raise MissingColumn(name)
    data_cols = [t for t in targets if t not in RESERVED_COLUMNS]
    unknown = [t for t in data_cols
               if t not in STATEMENT_FIELDS and t not in RATIO_DEFINITIONS]
    if unknown:
        raise SchemaError(f"unknown columns: {', '.join(unknown)}")
    if len(set(targets)) != len(targets):
        raise SchemaError("duplicate columns after schema mapping")
    stmt_cols = [t for t in data_cols if t in STATEMENT_FIELDS]
    ratio_cols = [t for t in data_cols if t in RATIO_DEFINITIONS]
    if stmt_cols and ratio_cols:
        raise SchemaError("statement columns and ratio columns cannot be mixed")
    if stmt_cols:
        for name in STATEMENT_FIELDS:
            if name not in stmt_cols:
                raise MissingColumn(name)
        variable_names = RATIO_CODES
    else:
        if not ratio_cols:
            raise SchemaError("no statement or ratio columns")
        variable_names = tuple(ratio_cols)

    pos = {t: i for i, t in enumerate(targets)}
    records, dropped = [], []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(row_no, None,
                             f"expected {len(header)} fields, got {len(row)}")
        firm_id = row[pos["firm_id"]].strip()
        year = _parse_int(row[pos["year"]], row_no, "year")
        label_text = row[pos["label"]].strip()
        if label_text not in ("0", "1"):
            raise InvalidLabel(row_no, label_text)
        label = int(label_text)
        if stmt_cols:
            values = {name: _parse_float(row[pos[name]], row_no, name)
                      for name in STATEMENT_FIELDS}
            try:
                ratios = compute_ratios(FinancialStatement(**values))
            except DivisionByZero as exc:
                if on_zero_division == "raise":
                    raise DivisionByZero(exc.ratio_code, row_no) from None
                dropped.append((row_no, exc.ratio_code))
                continue
        else:
            ratios = tuple(_parse_float(row[pos[c]], row_no, c)
                           for c in variable_names)
        records.append(FirmRecord(firm_id, year, label, tuple(ratios)))
    return Dataset(records, variable_names, tuple(dropped))


def _read_text(source):
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8-sig")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8-sig") if isinstance(data, bytes) else data
    with open(source, encoding="utf-8-sig", newline="") as fh:
        return fh.read()


def dump_dataset(dataset):
    """Serialize a dataset as ratio-column CSV text.

    Floats are written with ``repr`` so reloading is bit-exact.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(RESERVED_COLUMNS) + list(dataset.variable_names))
    for rec in dataset.records:
        writer.writerow([rec.firm_id, rec.year, rec.label]
                        + [repr(float(v)) for v in rec.ratios])
    return buf.getvalue()


def write_dataset(dataset, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dump_dataset(dataset))


def split_by_period(dataset, base_years, test_year):
    """Split into the base sample (``base_years``) and the test sample.

    Record order is preserved within each part.
    """
    base_years = {int(y) for y in base_years}
    test_year = int(test_year)
    base, test = [], []
    for rec in dataset.records:
        if rec.year in base_years:
            base.append(rec)
        elif rec.year == test_year:
            test.append(rec)
        else:
            raise YearOutsideSplit(rec.firm_id, rec.year)
    return (Dataset(base, dataset.variable_names),
            Dataset(test, dataset.variable_names))
