"""CSV reading and writing for datasets, agreement traces, learning traces and eval reports."""

import csv
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from core.errors import DatasetError
from geometry.ratio import UNBOUNDED, ApproximationRatio, RatioKind


def format_float(x: float) -> str:
    """17 significant digits, '.' decimal, independent of locale."""
    return format(float(x), ".17g")


def detect_delimiter(file_path: str) -> str:
    """Auto-detect CSV delimiter"""
    with open(file_path, 'r', encoding='utf-8') as f:
        sample = f.read(1024)
    try:
        return csv.Sniffer().sniff(sample, delimiters=",;\t").delimiter
    except csv.Error:
        # single-column files give the sniffer nothing to work with
        return ','


def _looks_like_header(row: Sequence[str]) -> bool:
    try:
        float(row[0])
    except (ValueError, IndexError):
        return True
    return False


def read_dataset_rows(file_path: str) -> List[Tuple[int, List[float]]]:
    """Rows of ``label,feat0,feat1,...``; a non-numeric first row is treated as a header."""
    try:
        delimiter = detect_delimiter(file_path)
        with open(file_path, 'r', encoding='utf-8', newline='') as f:
            raw = [row for row in csv.reader(f, delimiter=delimiter)]
    except OSError as e:
        raise DatasetError(f"cannot read {file_path}: {e}") from e

    rows = []
    width = None
    for number, row in enumerate(raw, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if number == 1 and _looks_like_header(row):
            continue
        if len(row) < 2:
            raise DatasetError("expected a label and at least one feature", row=number)
        try:
            label = int(row[0])
            features = [float(cell) for cell in row[1:]]
        except ValueError as e:
            raise DatasetError(f"not a number: {e}", row=number) from e
        if label < 0:
            raise DatasetError(f"negative label {label}", row=number)
        if width is None:
            width = len(features)
        elif len(features) != width:
            raise DatasetError(f"{len(features)} features, earlier rows have {width}", row=number)
        rows.append((label, features))
    if not rows:
        raise DatasetError(f"{file_path} contains no samples")
    return rows


def write_dataset_rows(file_path: str, rows: Iterable[Tuple[int, Sequence[float]]]) -> None:
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        for label, features in rows:
            writer.writerow([int(label)] + [format_float(x) for x in features])


# -- agreement traces ------------------------------------------------------

@dataclass(frozen=True)
class RoundRow:
    """One honest node's output after a round, with the round's honest spread."""

    round: int
    node: int
    coords: Tuple[float, ...]
    honest_diameter: float
    e_max: float


def write_round_csv(file_path: str, rows: Sequence[RoundRow]) -> None:
    dim = len(rows[0].coords) if rows else 0
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["round", "node"] + [f"c{k}" for k in range(dim)] + ["honest_diameter", "e_max"])
        for row in rows:
            writer.writerow(
                [row.round, row.node]
                + [format_float(x) for x in row.coords]
                + [format_float(row.honest_diameter), format_float(row.e_max)]
            )


def read_round_csv(file_path: str) -> List[RoundRow]:
    with open(file_path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        next(reader)
        return [
            RoundRow(
                round=int(r[0]),
                node=int(r[1]),
                coords=tuple(float(x) for x in r[2:-2]),
                honest_diameter=float(r[-2]),
                e_max=float(r[-1]),
            )
            for r in reader
        ]


# -- learning traces -------------------------------------------------------

@dataclass(frozen=True)
class IterationRow:
    iteration: int
    accuracy_mean: float
    accuracy_min: float
    loss: float
    gradient_diameter: float


ITERATION_COLUMNS = ["iteration", "accuracy_mean", "accuracy_min", "loss", "gradient_diameter"]


def write_learning_csv(file_path: str, rows: Sequence[IterationRow]) -> None:
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ITERATION_COLUMNS)
        for row in rows:
            writer.writerow([row.iteration] + [
                format_float(v) for v in (row.accuracy_mean, row.accuracy_min, row.loss, row.gradient_diameter)
            ])


def read_learning_csv(file_path: str) -> List[IterationRow]:
    with open(file_path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        next(reader)
        return [IterationRow(int(r[0]), *(float(x) for x in r[1:5])) for r in reader]


@dataclass(frozen=True)
class ClientRow:
    iteration: int
    client: int
    accuracy: float


def write_client_csv(file_path: str, rows: Sequence[ClientRow]) -> None:
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["iteration", "client", "accuracy"])
        for row in rows:
            writer.writerow([row.iteration, row.client, format_float(row.accuracy)])


def read_client_csv(file_path: str) -> List[ClientRow]:
    with open(file_path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        next(reader)
        return [ClientRow(int(r[0]), int(r[1]), float(r[2])) for r in reader]


# -- approximation-ratio reports -------------------------------------------

@dataclass(frozen=True)
class EvalRow:
    instance: int
    seed: int
    rule: str
    distance: float
    r_cov: float
    ratio: ApproximationRatio


def write_eval_csv(file_path: str, rows: Sequence[EvalRow]) -> None:
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["instance", "seed", "rule", "distance", "r_cov", "ratio", "unbounded"])
        for row in rows:
            writer.writerow([
                row.instance, row.seed, row.rule,
                format_float(row.distance), format_float(row.r_cov),
                str(row.ratio), int(row.ratio.unbounded),
            ])


def _parse_ratio(text: str) -> ApproximationRatio:
    if text == RatioKind.UNBOUNDED.value:
        return UNBOUNDED
    return ApproximationRatio(RatioKind.FINITE, float(text))


def read_eval_csv(file_path: str) -> List[EvalRow]:
    with open(file_path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        next(reader)
        return [
            EvalRow(int(r[0]), int(r[1]), r[2], float(r[3]), float(r[4]), _parse_ratio(r[5]))
            for r in reader
        ]
