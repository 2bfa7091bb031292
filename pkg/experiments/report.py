"""Experiment reports and their CSV / JSON serialisation.

CSV files start with `# key: value` metadata lines followed by the table.
Floats are written with 17 significant digits and read back with pandas'
round-trip parser, so every number survives emit-then-parse bit for bit.
"""

import io
from datetime import datetime, timezone
from pathlib import Path
from typing import ClassVar, Literal, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from errors import InvalidArgumentError

ReportFormat = Literal["csv", "json"]


class ReportMetadata(BaseModel):
    problem: str
    command: str = ""
    timestamp: str = ""
    tool_version: str = ""

    @classmethod
    def now(cls, problem: str, command: str, tool_version: str) -> "ReportMetadata":
        return cls(
            problem=problem,
            command=command,
            timestamp=datetime.now(timezone.utc).isoformat(),
            tool_version=tool_version,
        )


class ExperimentRow(BaseModel):
    scheme: str
    quadrature: str
    epsilon: float
    n: int
    h: float
    error_inf: float
    error_star: float
    observed_order: Optional[float] = None       # from error_star
    observed_order_inf: Optional[float] = None   # from error_inf


class PlateauRow(ExperimentRow):
    ratio: float                # h / eps
    predicted_plateau: float    # ||I_h(u) - I_h(w)||_inf with w = int_0^x f


class ComparisonRow(BaseModel):
    scheme_a: str
    quadrature_a: str
    scheme_b: str
    quadrature_b: str
    epsilon: float
    n: int
    h: float
    d: float
    difference_norm: float          # ||u_B - u_A||_{*,h}
    functional_dual_norm: float     # ||F_B - F_A|| in the dual norm
    equality_gap: float
    trapezoid_part: Optional[float] = None
    bubble_part: Optional[float] = None
    bound: Optional[float] = None
    bound_holds: Optional[bool] = None


def _plain(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and np.isnan(value):
        return None
    return value


class ExperimentReport(BaseModel):
    row_model: ClassVar[type[BaseModel]] = ExperimentRow

    metadata: ReportMetadata
    rows: list[ExperimentRow] = []

    # ── Tables ────────────────────────────────────────────────────────────────

    def to_frame(self) -> pd.DataFrame:
        columns = list(self.row_model.model_fields)
        return pd.DataFrame([row.model_dump() for row in self.rows], columns=columns)

    # ── Emit ──────────────────────────────────────────────────────────────────

    def to_csv(self, significant_digits: int = 17) -> str:
        header = "".join(
            f"# {key}: {value}\n" for key, value in self.metadata.model_dump().items()
        )
        body = self.to_frame().to_csv(index=False, float_format=f"%.{significant_digits}g")
        return header + body

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def render(self, fmt: ReportFormat = "csv", significant_digits: int = 17) -> str:
        if fmt == "csv":
            return self.to_csv(significant_digits=significant_digits)
        if fmt == "json":
            return self.to_json()
        raise InvalidArgumentError(f"Unknown report format: {fmt!r}")

    def write(self, path: Union[str, Path], fmt: ReportFormat = "csv", significant_digits: int = 17) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(fmt, significant_digits), encoding="utf-8")
        logger.info(f"Wrote {len(self.rows)} rows to {path}")
        return path

    # ── Parse ─────────────────────────────────────────────────────────────────

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentReport":
        meta: dict[str, str] = {}
        table_lines = []
        for line in text.splitlines(keepends=True):
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                meta[key] = value
            else:
                table_lines.append(line)

        frame = pd.read_csv(io.StringIO("".join(table_lines)), float_precision="round_trip")
        rows = [
            cls.row_model(**{k: _plain(v) for k, v in record.items()})
            for record in frame.to_dict(orient="records")
        ]
        return cls(metadata=ReportMetadata(**meta), rows=rows)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.model_validate_json(text)


class PlateauReport(ExperimentReport):
    row_model: ClassVar[type[BaseModel]] = PlateauRow

    rows: list[PlateauRow] = []


class ComparisonReport(ExperimentReport):
    row_model: ClassVar[type[BaseModel]] = ComparisonRow

    rows: list[ComparisonRow] = []
