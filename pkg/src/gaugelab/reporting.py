"""Report containers: validation reports, law checks, and verification reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


@dataclass
class ValidationReport:
    """Outcome of a structural check: a list of violated clauses.

    An empty ``violations`` list means the subject is valid.  ``info``
    carries auxiliary data such as sampling coverage or the seed used.
    """

    subject: str
    violations: List[Violation] = field(default_factory=list)
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, detail: str) -> None:
        self.violations.append(Violation(code, detail))

    def summary(self) -> str:
        if self.ok:
            return "%s: valid" % self.subject
        lines = ["%s: %d violation(s)" % (self.subject, len(self.violations))]
        lines += ["  [%s] %s" % (v.code, v.detail) for v in self.violations]
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": [{"code": v.code, "detail": v.detail} for v in self.violations],
            "info": self.info,
        }


@dataclass(frozen=True)
class LawCheck:
    """One verified law: where it was checked, the residual, and the verdict."""

    location: str  # "level 2" or "link 1->2"
    law: str       # stable law identifier, e.g. "isometry.full"
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "location": self.location,
            "law": self.law,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    """Collection of law checks over a tower, with an overall verdict."""

    title: str
    checks: List[LawCheck] = field(default_factory=list)
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, location: str, law: str, residual: float, tolerance: float,
            detail: str = "", passed: Optional[bool] = None) -> LawCheck:
        if passed is None:
            passed = residual <= tolerance
        check = LawCheck(location, law, float(residual), float(tolerance), passed, detail)
        self.checks.append(check)
        return check

    def failures(self) -> List[LawCheck]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        lines = ["%s: %s (%d checks, %d failed)" % (
            self.title, "PASS" if self.ok else "FAIL", len(self.checks), len(self.failures()))]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append("  %s %-34s %-12s residual=%.3e tol=%.1e %s" % (
                mark, c.law, c.location, c.residual, c.tolerance, c.detail))
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "title": self.title,
            "ok": self.ok,
            "checks": [c.to_dict() for c in self.checks],
            "info": self.info,
        }
