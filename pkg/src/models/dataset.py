"""
Dataset and Domain value types for the data engine.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from types import MappingProxyType
from typing import Any, Mapping, Optional, Sequence, Tuple

from .errors import ValidationError

QUANTITATIVE = "quantitative"
NOMINAL = "nominal"
ORDINAL = "ordinal"
TEMPORAL = "temporal"
DATA_TYPES = (QUANTITATIVE, NOMINAL, ORDINAL, TEMPORAL)

CONTINUOUS = "continuous"
DISCRETE = "discrete"


def is_number(value):
    """Return True for int/float values that are not booleans."""
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_timestamp(value):
    """
    Convert an ISO-8601 date string to epoch milliseconds.

    Naive timestamps are read as UTC.

    Returns:
        float or None: Milliseconds since the epoch, None if not a date
    """
    if not isinstance(value, str):
        return None
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        moment = datetime.fromisoformat(text)
    except ValueError:
        return None
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.timestamp() * 1000.0


def format_timestamp(millis):
    """Render epoch milliseconds as an ISO-8601 UTC string."""
    moment = datetime.fromtimestamp(millis / 1000.0, tz=timezone.utc)
    return moment.isoformat()


def infer_type(values):
    """
    Infer the data type of a column from its non-null values.

    Args:
        values (list): Column values

    Returns:
        str: One of quantitative, temporal, nominal
    """
    present = [v for v in values if v is not None]
    if present and all(is_number(v) for v in present):
        return QUANTITATIVE
    if present and all(parse_timestamp(v) is not None for v in present):
        return TEMPORAL
    return NOMINAL


@dataclass(frozen=True)
class Dataset:
    """An inline dataset: a name, a field schema and read-only rows."""

    name: str
    schema: Mapping[str, str]
    rows: Tuple[Mapping[str, Any], ...]

    @classmethod
    def build(cls, name, schema, rows):
        """Build a dataset from plain dicts, freezing rows and schema."""
        frozen_rows = tuple(MappingProxyType({f: row.get(f) for f in schema}) for row in rows)
        return cls(name=name, schema=MappingProxyType(dict(schema)), rows=frozen_rows)

    @classmethod
    def from_values(cls, values, name="source"):
        """
        Build a dataset from inline records, inferring the schema.

        Temporal values are normalized to epoch milliseconds.

        Args:
            values (list): Records mapping field name to value
            name (str): Dataset name

        Returns:
            Dataset: The frozen dataset
        """
        fields = []
        for index, row in enumerate(values):
            if not isinstance(row, Mapping):
                raise ValidationError("Each data value must be an object", path=f"data.values[{index}]")
            for field in row:
                if field not in fields:
                    fields.append(field)
        schema = {}
        for field in fields:
            schema[field] = infer_type([row.get(field) for row in values])
        rows = []
        for row in values:
            record = {}
            for field in fields:
                value = row.get(field)
                if schema[field] == TEMPORAL and value is not None:
                    value = parse_timestamp(value)
                record[field] = value
            rows.append(record)
        return cls.build(name, schema, rows)

    @property
    def fields(self):
        """Field names in schema order."""
        return tuple(self.schema)

    def column(self, field):
        """Return the values of one field in row order."""
        return [row.get(field) for row in self.rows]

    def to_values(self):
        """Return the rows as plain records, temporal fields as ISO strings."""
        values = []
        for row in self.rows:
            record = {}
            for field, value in row.items():
                if self.schema.get(field) == TEMPORAL and value is not None:
                    value = format_timestamp(value)
                record[field] = value
            values.append(record)
        return values

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class Domain:
    """A scale domain: continuous (min, max) or an ordered list of values."""

    kind: str
    values: Tuple[Any, ...]

    def __post_init__(self):
        if self.kind == CONTINUOUS:
            if len(self.values) != 2 or self.values[0] > self.values[1]:
                raise ValidationError(f"Continuous domain needs min <= max, got {list(self.values)}")
        elif self.kind == DISCRETE:
            if not self.values:
                raise ValidationError("Discrete domain must not be empty")
            if len(set(self.values)) != len(self.values):
                raise ValidationError(f"Discrete domain has duplicates: {list(self.values)}")
        else:
            raise ValidationError(f"Unknown domain kind '{self.kind}'")

    @classmethod
    def continuous(cls, low, high):
        return cls(CONTINUOUS, (low, high))

    @classmethod
    def discrete(cls, values: Sequence[Any]):
        return cls(DISCRETE, tuple(values))

    @property
    def is_continuous(self):
        return self.kind == CONTINUOUS

    @property
    def low(self) -> Optional[float]:
        return self.values[0] if self.is_continuous else None

    @property
    def high(self) -> Optional[float]:
        return self.values[1] if self.is_continuous else None

    def to_document(self):
        return list(self.values)

    def __str__(self):
        return f"{self.kind}{list(self.values)}"
