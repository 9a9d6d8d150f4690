from enum import Enum


class Verdict(str, Enum):
    """Tri-state outcome of a strict-inequality test evaluated in floating point.

    Margins within the tolerance band of zero are INDETERMINATE; only PASS is truthy.
    """

    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"

    def __bool__(self):
        return self is Verdict.PASS

    @classmethod
    def from_margin(cls, margin, tol):
        if margin > tol:
            return cls.PASS
        if margin < -tol:
            return cls.FAIL
        return cls.INDETERMINATE

    @classmethod
    def conjunction(cls, verdicts):
        verdicts = list(verdicts)
        if any(v is cls.FAIL for v in verdicts):
            return cls.FAIL
        if all(v is cls.PASS for v in verdicts):
            return cls.PASS
        return cls.INDETERMINATE
