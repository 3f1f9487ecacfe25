"""
Report models for validation and serialization.

Mathematical objects live in frozen dataclasses next to the code that builds
them; these pydantic models are the JSON-facing reports.
"""

import json
from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = "1"


def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def canonical_json(payload: Dict[str, Any]) -> str:
    """Sorted keys, fixed separators: re-serializing parsed output is byte-identical."""
    document = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(document, sort_keys=True, indent=2, separators=(",", ": "), ensure_ascii=True)


class BoundsCheck(BaseModel):
    """Lower/upper bounds on a Gaussian binomial."""
    n: int
    k: int
    q: int
    lower: int
    value: int
    upper: int
    ok: bool


class VerificationReport(BaseModel):
    """Outcome of checking a block collection against the design condition."""
    model_config = ConfigDict(populate_by_name=True)

    is_design: bool
    t: int
    lambda_: Optional[int] = Field(None, alias="lambda")
    block_count: int
    is_simple: bool
    is_trivial: bool
    failing_t_subspace: Optional[List[str]] = None
    failing_count: Optional[int] = None
    counts_histogram: Dict[int, int] = Field(default_factory=dict)

    def to_payload(self) -> Dict[str, Any]:
        data = self.model_dump(by_alias=True)
        data["counts_histogram"] = {str(k): v for k, v in sorted(self.counts_histogram.items())}
        return data


class DecodeSystem(BaseModel):
    """The triangular system D f = (0, ..., 0, m)^T and its Cramer solution."""
    q: int
    t: int
    k: int
    D: List[List[int]]
    m: int
    f: List[int]
    Dj_dets: List[int]


class CertificateVerdict(BaseModel):
    """Result of summing a decoding certificate over every t-subspace."""
    ok: bool
    n: int
    m: int
    decoded_column: List[str]
    envelope: List[str]
    rows_used: int
    l1_norm: int
    l1_bound: int
    columns_checked: int
    mismatches: int


class BoundCheck(BaseModel):
    name: str
    lhs: int
    rhs: int
    ok: bool


class DiagonalCount(BaseModel):
    j: int
    count: int
    bound: int
    ok: bool


class DetBoundsReport(BaseModel):
    q: int
    t: int
    k: int
    det_D: BoundCheck
    det_Dj: List[BoundCheck]
    row_maxima: BoundCheck
    diagonals: List[DiagonalCount]
    passed: bool


class C3Report(BaseModel):
    q: int
    t: int
    k: int
    m: int
    l1_norm: Optional[int] = None
    exact_c3: Optional[int] = None
    stated_bound: int
    ok: Optional[bool] = None


class Lemma2Report(BaseModel):
    """Brute-force agreement of the intersection-count formula."""
    q: int
    n: int
    t: int
    k: int
    pairs_checked: int
    cases_checked: int
    mismatches: int
    row_sum_mismatches: int
    ok: bool


class KLPReport(BaseModel):
    """Exact evaluation of the existence-bound parameters."""
    q: int
    n: int
    k: int
    t: int
    constant: int
    c1_bound: int
    c2: int = 1
    c3_bound: int
    A_upper: int
    B_lower: int
    A_exact: Optional[int] = None
    B_exact: Optional[int] = None
    rhs_final: int
    feasible: bool
    block_budget: int
    budget_below_B: Optional[bool] = None
    threshold_k_gt_12t: bool
    threshold_k_gt_12_t_plus_1: bool
    log_reading: str = "bit_length(A_upper * c2) ** 8"
    feasibility_note: str = "relative to supplied constant"


class MatrixPropertiesReport(BaseModel):
    """The five matrix properties checked directly on one incidence matrix."""
    q: int
    n: int
    k: int
    t: int
    constant_vector: bool
    divisibility_witness: int
    witness_below_rows: bool
    boundedness: int
    local_decodability: Optional[bool] = None
    symmetry: bool
    passed: bool


class IncidenceSummary(BaseModel):
    q: int
    n: int
    k: int
    t: int
    rows: int
    columns: int
    row_weight: int
    col_weight: int
    c2: int
    average_row: str
    constant_vector: bool
    double_counting: bool
    symmetry_trials: int
    symmetry_ok: Optional[bool] = None


class SearchReport(BaseModel):
    status: str
    q: int
    n: int
    k: int
    t: int
    lambda_: int = Field(alias="lambda")
    method: str
    block_count: Optional[int] = None
    reason: Optional[str] = None
    nodes: int = 0

    model_config = ConfigDict(populate_by_name=True)


class SuiteResult(BaseModel):
    name: str
    passed: bool
    cases: int
    detail: str = ""


class SelftestReport(BaseModel):
    passed: bool
    suites: List[SuiteResult]


class TranscriptResult(BaseModel):
    page: str
    index: int
    commands: List[str]
    passed: bool
    diff: str = ""


class DocsReport(BaseModel):
    passed: bool
    transcripts: List[TranscriptResult]


class CommandRequest(BaseModel):
    """Validated CLI invocation."""
    command: str
    params: Dict[str, Any] = Field(default_factory=dict)
    output_format: str = "text"
    seed: int = 0
    timeout: Optional[float] = None
    workers: int = 1
