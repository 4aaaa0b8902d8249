import logging
import time
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from schemas import CheckResult, Report

logger = logging.getLogger(__name__)


class ReportBuilder:
    """Collects named checks for one command run and renders the report."""

    def __init__(self, command: str, instance_digest: str):
        self.command = command
        self.instance_digest = instance_digest
        self.checks: List[CheckResult] = []
        self.payload: Dict[str, Any] = {}
        self._started = time.perf_counter()

    def check(self, name: str, residual: float, threshold: float, passed: Optional[bool] = None) -> CheckResult:
        result = CheckResult(
            name=name,
            residual=float(residual),
            threshold=float(threshold),
            passed=bool(residual <= threshold) if passed is None else passed,
        )
        if not result.passed:
            logger.warning("check %s failed: residual %.3e above %.3e", name, result.residual, result.threshold)
        self.checks.append(result)
        return result

    def flag(self, name: str, ok: bool) -> CheckResult:
        # boolean checks report residual 0/1 against threshold 0
        return self.check(name, 0.0 if ok else 1.0, 0.0, passed=ok)

    def residual_family(self, name: str, values: Iterable[float], threshold: float) -> None:
        for i, value in enumerate(values, start=1):
            self.check(f"{name}[{i}]", value, threshold)

    def add_payload(self, **entries: Any) -> None:
        self.payload.update(entries)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def build(self) -> Report:
        return Report(
            command=self.command,
            instance_digest=self.instance_digest,
            checks=list(self.checks),
            passed=self.passed,
            payload=self.payload,
            wall_time_s=round(time.perf_counter() - self._started, 6),
        )


def checks_table(report: Report) -> pd.DataFrame:
    return pd.DataFrame(
        [check.model_dump() for check in report.checks], columns=["name", "residual", "threshold", "passed"]
    )


def render_pretty(report: Report) -> str:
    lines = [
        f"command: {report.command}",
        f"instance: {report.instance_digest}",
    ]
    if report.checks:
        lines.append(checks_table(report).to_string(index=False, float_format=lambda v: f"{v:.3e}"))
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'} ({report.wall_time_s:.3f} s)")
    return "\n".join(lines) + "\n"
