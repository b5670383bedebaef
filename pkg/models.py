#!/usr/bin/env python3
"""
Output Records
Pydantic mirrors of solve reports, sweep rows, basin boundaries, catalog
entries and reproduction checks. These are what the CLI prints and the
HTTP API returns.

Infinite and NaN reals are written to JSON as the strings "inf", "-inf"
and "nan" and read back from them, so every record round-trips.
"""

import math
from typing import Annotated, Any, Dict, List, Optional, Union

from pydantic import BaseModel, BeforeValidator, Field, PlainSerializer, WithJsonSchema

import config


def _dump_real(value: float) -> Union[float, str]:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _load_real(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "-inf", "nan"):
        return float(value)
    return value


ExtendedReal = Annotated[
    float,
    BeforeValidator(_load_real),
    PlainSerializer(_dump_real, when_used="json"),
    WithJsonSchema({
        "anyOf": [
            {"type": "number"},
            {"type": "string", "enum": ["inf", "-inf", "nan"]},
        ]
    }),
]


def format_real(value: Optional[float]) -> str:
    """CSV text for a real: 17 significant digits, '.' separator, empty for None."""
    if value is None:
        return ""
    return format(value, config.CSV_FLOAT_FORMAT)


class TraceRow(BaseModel):
    iter: int
    x: ExtendedReal
    f: Optional[ExtendedReal] = None
    fprime: Optional[ExtendedReal] = None
    fsecond: Optional[ExtendedReal] = None
    q: Optional[ExtendedReal] = None
    multiplier: Optional[ExtendedReal] = None
    newton_step: Optional[ExtendedReal] = None
    step: Optional[ExtendedReal] = None
    direction_reversed: bool = False
    stationary: bool = False

    @classmethod
    def from_entry(cls, index: int, entry) -> 'TraceRow':
        """Create a row from a solver TraceEntry."""
        row = {"iter": index, "x": entry.x}
        if entry.jet is not None:
            row.update(f=entry.jet.value, fprime=entry.jet.d1, fsecond=entry.jet.d2)
        if entry.diag is not None:
            row.update(
                q=entry.diag.q,
                multiplier=entry.diag.multiplier,
                newton_step=entry.diag.newton_step,
                step=entry.diag.applied_step,
                direction_reversed=entry.diag.direction_reversed,
                stationary=entry.diag.stationary,
            )
        return cls(**row)

    def csv_values(self) -> List[str]:
        values = []
        for column in config.TRACE_CSV_COLUMNS:
            value = getattr(self, column)
            values.append(str(value) if column == "iter" else format_real(value))
        return values


class SolveRecord(BaseModel):
    schema_version: str = config.SCHEMA_VERSION
    problem: str
    method: str
    x0: ExtendedReal
    status: str
    period: Optional[int] = None
    root: Optional[ExtendedReal] = None
    iterations: int
    max_excursion: ExtendedReal
    f_tol: ExtendedReal
    converged_by: Optional[str] = None
    message: str = ""
    trace: List[TraceRow] = []

    @classmethod
    def from_report(cls, report) -> 'SolveRecord':
        """Create a record from a solver SolveReport."""
        return cls(
            problem=report.problem,
            method=report.method.value,
            x0=report.x0,
            status=report.status.value,
            period=report.period,
            root=report.root,
            iterations=report.iterations,
            max_excursion=report.max_excursion,
            f_tol=report.f_tol,
            converged_by=report.converged_by,
            message=report.message,
            trace=[TraceRow.from_entry(i, entry) for i, entry in enumerate(report.trace)],
        )


class SweepRecord(BaseModel):
    x0: ExtendedReal
    status: str
    period: Optional[int] = None
    root: Optional[ExtendedReal] = None
    root_index: Optional[int] = None
    iterations: int
    max_excursion: ExtendedReal

    @classmethod
    def from_row(cls, row) -> 'SweepRecord':
        return cls(
            x0=row.x0,
            status=row.status.value,
            period=row.period,
            root=row.root,
            root_index=row.root_index,
            iterations=row.iterations,
            max_excursion=row.max_excursion,
        )

    def csv_values(self) -> List[str]:
        return [
            format_real(self.x0),
            f"cycle({self.period})" if self.status == "cycle" else self.status,
            format_real(self.root),
            str(self.iterations),
            format_real(self.max_excursion),
        ]


class SweepResult(BaseModel):
    schema_version: str = config.SCHEMA_VERSION
    problem: str
    method: str
    rows: List[SweepRecord] = []


class BoundaryRecord(BaseModel):
    schema_version: str = config.SCHEMA_VERSION
    problem: str
    method: str
    lo: ExtendedReal
    hi: ExtendedReal
    point: ExtendedReal
    width: ExtendedReal
    predicate: str
    lo_outcome: Optional[int] = None
    hi_outcome: Optional[int] = None

    @classmethod
    def from_boundary(cls, boundary) -> 'BoundaryRecord':
        return cls(
            problem=boundary.problem,
            method=boundary.method.value,
            lo=boundary.lo,
            hi=boundary.hi,
            point=boundary.point,
            width=boundary.width,
            predicate=boundary.predicate,
            lo_outcome=boundary.lo_outcome,
            hi_outcome=boundary.hi_outcome,
        )


class ProblemRecord(BaseModel):
    name: str
    formula: str
    domain_lo: ExtendedReal
    domain_hi: ExtendedReal
    known_roots: List[ExtendedReal] = []
    params: Dict[str, float] = {}
    parameter_names: List[str] = []
    notes: str = ""

    @classmethod
    def from_spec(cls, spec, parameter_names: Optional[List[str]] = None) -> 'ProblemRecord':
        return cls(
            name=spec.name,
            formula=spec.formula,
            domain_lo=spec.domain.lo,
            domain_hi=spec.domain.hi,
            known_roots=list(spec.known_roots),
            params=dict(spec.params),
            parameter_names=parameter_names or [],
            notes=spec.notes,
        )


class CheckRecord(BaseModel):
    experiment: str
    name: str
    passed: bool
    measured: str
    expected: str

    @classmethod
    def from_check(cls, check) -> 'CheckRecord':
        return cls(
            experiment=check.experiment,
            name=check.name,
            passed=check.passed,
            measured=check.measured,
            expected=check.expected,
        )


class ReproduceRecord(BaseModel):
    schema_version: str = config.SCHEMA_VERSION
    experiment: str
    passed: bool
    checks: List[CheckRecord] = []

    @classmethod
    def from_checks(cls, experiment: str, checks) -> 'ReproduceRecord':
        records = [CheckRecord.from_check(c) for c in checks]
        return cls(experiment=experiment, passed=all(r.passed for r in records), checks=records)


OUTPUT_RECORDS = {
    "SolveRecord": SolveRecord,
    "SweepResult": SweepResult,
    "BoundaryRecord": BoundaryRecord,
    "ProblemRecord": ProblemRecord,
    "ReproduceRecord": ReproduceRecord,
}


def output_schema() -> Dict[str, Any]:
    """JSON schema of every top-level output record, keyed by record name."""
    return {
        "schema_version": config.SCHEMA_VERSION,
        "records": {
            name: model.model_json_schema(mode="serialization")
            for name, model in OUTPUT_RECORDS.items()
        },
    }


class SolveRequest(BaseModel):
    """Body of POST /api/solve. Exactly one of problem or expr."""
    problem: Optional[str] = None
    expr: Optional[str] = None
    params: List[float] = []
    x0: float
    method: str = config.DEFAULT_METHOD
    f_tol: Optional[float] = Field(default=None, gt=0)
    max_iter: int = Field(default=config.MAX_ITER, ge=1)


class SweepRequest(BaseModel):
    problem: Optional[str] = None
    expr: Optional[str] = None
    params: List[float] = []
    method: str = config.DEFAULT_METHOD
    start: float = Field(alias="from")
    stop: float = Field(alias="to")
    points: int = Field(ge=1, le=config.MAX_SWEEP_POINTS)
    max_iter: int = Field(default=config.BASIN_MAX_ITER, ge=1)

    class Config:
        populate_by_name = True


class BoundaryRequest(BaseModel):
    problem: Optional[str] = None
    expr: Optional[str] = None
    params: List[float] = []
    method: str = config.DEFAULT_METHOD
    lo: float
    hi: float
    resolution: float = Field(default=1e-6, gt=0)
    max_iter: int = Field(default=config.BASIN_MAX_ITER, ge=1)
