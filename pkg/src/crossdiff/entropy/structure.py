"""Sampled verification that ``h''(u) A(u)`` is positive definite."""

from dataclasses import dataclass, field

import numpy as np

from .. import models as _models
from ..ellipticity import is_normally_elliptic
from ..errors import ContractViolation, CrossDiffError, NotNormallyElliptic
from ..lyapunov import solve_lyapunov
from ..linalg import is_diagonalizable, is_positive_definite, leading_principal_minors, operator_norm
from ..verdict import Verdict

SYMMETRY_RTOL = 1e-9


def _margin_tol(M):
    return 1e-9 * (1.0 + operator_norm(M))


@dataclass
class SampleRecord:
    index: int
    u: np.ndarray
    ne: Verdict
    ne_margin: float
    symmetric: bool
    symmetry_defect: float
    pd: Verdict
    pd_margin: float
    convex: Verdict
    convex_margin: float
    diagonalizable: bool
    onsager_defect: float
    minors_positive: bool

    def to_dict(self):
        return {
            "index": self.index,
            "u": self.u.tolist(),
            "ne": {"verdict": self.ne.value, "margin": self.ne_margin},
            "hA_symmetric": {"verdict": self.symmetric, "defect": self.symmetry_defect},
            "hA_pd": {"verdict": self.pd.value, "margin": self.pd_margin},
            "h_convex": {"verdict": self.convex.value, "margin": self.convex_margin},
            "diagonalizable": self.diagonalizable,
            "onsager_symmetry_defect": self.onsager_defect,
            "A_leading_minors_positive": self.minors_positive,
        }


@dataclass
class StructureReport:
    model_id: str
    entropy: dict
    records: list
    flags: dict = field(default_factory=dict)

    def _all(self, attr):
        return Verdict.conjunction(getattr(r, attr) for r in self.records)

    @property
    def ne(self):
        return self._all("ne")

    @property
    def pd(self):
        return self._all("pd")

    @property
    def convex(self):
        return self._all("convex")

    @property
    def symmetric(self):
        return all(r.symmetric for r in self.records)

    @property
    def diagonalizable(self):
        return all(r.diagonalizable for r in self.records)

    @property
    def entropy_structure(self):
        """PASS iff ``h`` is strictly convex and ``h'' A`` is positive definite at every sample."""
        return Verdict.conjunction([self.pd, self.convex])

    def aggregates(self):
        return {
            "ne": self.ne.value,
            "hA_symmetric": self.symmetric,
            "hA_pd": self.pd.value,
            "h_convex": self.convex.value,
            "diagonalizable": self.diagonalizable,
            "entropy_structure": self.entropy_structure.value,
        }

    def to_dict(self):
        return {
            "model_id": self.model_id,
            "samples_used": len(self.records),
            "entropy": self.entropy,
            "aggregates": self.aggregates(),
            "flags": self.flags,
            "records": [r.to_dict() for r in self.records],
        }


def _matrix_function(model):
    if callable(model) and not isinstance(model, _models.ModelSpec):
        return model, "callable"
    return (lambda u: _models.diffusion_matrix(model, u)), model.model_id


def verify_entropy_structure(model, h, samples, tol=None):
    """Evaluate the entropy-structure conditions at each sample.

    Parameters
    ----------
    model : ModelSpec or callable
        Either a catalog model or a function ``u -> A(u)``.
    h : EntropyDensity
    samples : array_like, shape (m, n)
    tol : float, optional
        Absolute tolerance band for every margin; by default ``1e-9 (1 + |M|)``
        for each tested matrix ``M``.

    Returns
    -------
    StructureReport
        Per-sample records and aggregate verdicts. Two consistency flags are
        computed: samples where ``h'' A`` is symmetric and ``A`` normally
        elliptic but ``h'' A`` not positive definite, and samples where ``h'' A``
        is positive definite while ``A`` is not normally elliptic. Either one
        would contradict the equivalences between these properties.
    """
    A_of, model_id = _matrix_function(model)
    records = []
    for k, u in enumerate(np.atleast_2d(np.asarray(samples, dtype=float))):
        try:
            A = np.asarray(A_of(u), dtype=float)
            Hh = np.asarray(h.hessian(u), dtype=float)
        except CrossDiffError as exc:
            raise type(exc)(f"sample {k} at u={u.tolist()}: {exc}") from exc
        M = Hh @ A
        normM = np.linalg.norm(M)
        sym_defect = float(np.linalg.norm(M - M.T) / normM) if normM > 0 else 0.0
        ne, ne_margin = is_normally_elliptic(A, tol)
        _, pd_margin = is_positive_definite(M, tol=0.0)
        pd = Verdict.from_margin(pd_margin, _margin_tol(M) if tol is None else tol)
        Hs = 0.5 * (Hh + Hh.T)
        convex_margin = float(np.linalg.eigvalsh(Hs)[0])
        convex = Verdict.from_margin(convex_margin, _margin_tol(Hs) if tol is None else tol)
        try:
            onsager = A @ np.linalg.inv(Hh)
            nO = np.linalg.norm(onsager)
            onsager_defect = float(np.linalg.norm(onsager - onsager.T) / nO) if nO > 0 else 0.0
        except np.linalg.LinAlgError:
            onsager_defect = float("inf")
        records.append(SampleRecord(
            index=k, u=u.copy(), ne=ne, ne_margin=float(ne_margin),
            symmetric=sym_defect <= SYMMETRY_RTOL, symmetry_defect=sym_defect,
            pd=pd, pd_margin=float(pd_margin), convex=convex, convex_margin=convex_margin,
            diagonalizable=is_diagonalizable(A), onsager_defect=onsager_defect,
            minors_positive=bool(np.all(np.array(leading_principal_minors(A)) > 0)),
        ))
    flags = {
        "symmetric_ne_but_not_pd": [r.index for r in records
                                    if r.symmetric and r.ne is Verdict.PASS and r.pd is Verdict.FAIL],
        "pd_but_not_ne": [r.index for r in records if r.pd is Verdict.PASS and r.ne is not Verdict.PASS],
    }
    return StructureReport(model_id, h.describe(), records, flags)


def shifted_constant_check(A0, shifts):
    """Positive definiteness of ``H A0 + p H`` for each shift ``p > 0``, where ``H A0 + A0^T H = I``.

    Covers ``A(u) = A0 + p(u) I`` with the quadratic entropy of ``A0``.
    Returns ``(verdict, margins)``.
    """
    A0 = np.asarray(A0, dtype=float)
    shifts = np.atleast_1d(np.asarray(shifts, dtype=float))
    if np.any(shifts <= 0):
        raise ContractViolation("shifts p(u) must be positive")
    ne, margin = is_normally_elliptic(A0)
    if ne is not Verdict.PASS:
        raise NotNormallyElliptic(f"min real part of the spectrum is {margin:.3g}")
    H = solve_lyapunov(A0, np.eye(A0.shape[0]))
    margins = []
    verdicts = []
    for p in shifts:
        M = H @ A0 + p * H
        _, m = is_positive_definite(M, tol=0.0)
        margins.append(float(m))
        verdicts.append(Verdict.from_margin(m, _margin_tol(M)))
    return Verdict.conjunction(verdicts), margins
