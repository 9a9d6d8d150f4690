"""Entropy construction per model family, with a fixed automatic order.

Order tried by :func:`select_entropy` (first candidate whose structure check
passes wins):

==========================  ==========================================
family                      candidates
==========================  ==========================================
SktLinear, SktPower         boltzmann
FluidLinear, FluidPoly      boltzmann, potential
DeltaFPoly                  potential, quadratic (constant A only)
VolumeFilling*              volume-filling
KellerSegel, CubicExample   separable
==========================  ==========================================

``boltzmann`` and ``potential`` need detailed-balance weights ``pi`` for the
pressure Jacobian (constant coefficients for SktLinear and FluidLinear).
"""

from dataclasses import dataclass, field

from .. import models as _models
from ..errors import CrossDiffError, UnsupportedError
from ..verdict import Verdict
from .balance import solve_detailed_balance_constant, solve_detailed_balance_pressures
from .densities import (
    boltzmann_entropy,
    cubic_entropy,
    keller_segel_entropy,
    potential_entropy,
    quadratic_entropy_from_lyapunov,
    volume_filling_entropy,
)
from .structure import verify_entropy_structure

ENTROPY_KINDS = ("boltzmann", "potential", "quadratic", "volume-filling", "separable")

AUTO_ORDER = {
    "SktLinear": ("boltzmann",),
    "SktPower": ("boltzmann",),
    "FluidLinear": ("boltzmann", "potential"),
    "FluidPoly": ("boltzmann", "potential"),
    "DeltaFPoly": ("potential", "quadratic"),
    "VolumeFillingSeparable": ("volume-filling",),
    "VolumeFillingChi": ("volume-filling",),
    "KellerSegel": ("separable",),
    "CubicExample": ("separable",),
}


class BalanceInfeasible(CrossDiffError):
    pass


def detailed_balance(model, samples):
    """Detailed balance for the model's pressure (or flux) Jacobian."""
    if model.family in ("SktLinear", "FluidLinear"):
        return solve_detailed_balance_constant(model.params["a"])
    if model.family not in _models.PRESSURE_FAMILIES:
        raise UnsupportedError(f"{model.family} has no pressure functions")
    return solve_detailed_balance_pressures(model, samples)


def _balanced_pi(model, samples, info):
    db = detailed_balance(model, samples)
    info["detailed_balance"] = db.to_dict()
    if db.zero_pairs:
        info["notes"].append(
            "detailed balance skipped every pair with a_ij = a_ji = 0 and solved the rest on a "
            "spanning forest; handling more than one such pair is a generalization of the "
            "single-zero-pair construction")
    if not db.feasible:
        raise BalanceInfeasible(f"detailed balance infeasible at pair {db.witness}: {db.reason}")
    return db.pi


def construct_entropy(model, kind, samples):
    """Build the entropy of the given kind. Returns ``(density, info)``; raises CrossDiffError."""
    info = {"kind": kind, "notes": []}
    if kind == "boltzmann":
        if model.family not in ("SktLinear", "SktPower", "FluidLinear", "FluidPoly"):
            raise UnsupportedError(f"Boltzmann construction not available for {model.family}")
        return boltzmann_entropy(_balanced_pi(model, samples, info)), info
    if kind == "potential":
        if model.family not in ("FluidLinear", "FluidPoly", "DeltaFPoly"):
            raise UnsupportedError(f"potential construction not available for {model.family}")
        pi = _balanced_pi(model, samples, info)
        return potential_entropy(model, pi, samples=samples), info
    if kind == "quadratic":
        if not _models.is_constant_matrix(model):
            raise UnsupportedError("quadratic construction needs a constant diffusion matrix")
        A = _models.diffusion_matrix(model, samples[0])
        return quadratic_entropy_from_lyapunov(A), info
    if kind == "volume-filling":
        return volume_filling_entropy(model), info
    if kind == "separable":
        if model.family == "KellerSegel":
            return keller_segel_entropy(model.params["delta"]), info
        if model.family == "CubicExample":
            return cubic_entropy(), info
        raise UnsupportedError(f"no separable construction for {model.family}")
    raise UnsupportedError(f"unknown entropy kind {kind!r}")


@dataclass
class Selection:
    entropy: object = None
    report: object = None
    info: dict = field(default_factory=dict)
    attempts: list = field(default_factory=list)

    @property
    def found(self):
        return self.report is not None and self.report.entropy_structure is Verdict.PASS


def select_entropy(model, samples, kind=None, tol=None):
    """Try the candidates in order and verify each on ``samples``.

    The first candidate with a passing structure check is selected. When none
    passes, the first candidate that could be constructed is kept for
    reporting, so ``found`` is False but the report is still available.
    """
    kinds = (kind,) if kind else AUTO_ORDER[model.family]
    sel = Selection()
    for k in kinds:
        try:
            h, info = construct_entropy(model, k, samples)
        except CrossDiffError as exc:
            sel.attempts.append({"kind": k, "constructed": False, "reason": f"{type(exc).__name__}: {exc}"})
            continue
        report = verify_entropy_structure(model, h, samples, tol)
        verdict = report.entropy_structure
        sel.attempts.append({"kind": k, "constructed": True, "entropy_structure": verdict.value})
        if sel.report is None or verdict is Verdict.PASS:
            sel.entropy, sel.report, sel.info = h, report, info
        if verdict is Verdict.PASS:
            break
    return sel

