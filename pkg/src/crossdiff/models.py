"""Catalog of parametric diffusion-matrix families.

Every evaluator takes states of shape ``(..., n)`` and returns arrays with the
same leading shape, so a whole grid of cells is evaluated in one call. Partial
derivatives are coded analytically.
"""

import json
import re
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np
from scipy.stats import qmc

from .errors import ContractViolation, DomainError, SpecError, UnsupportedError

FAMILIES = (
    "SktLinear",
    "SktPower",
    "VolumeFillingSeparable",
    "VolumeFillingChi",
    "FluidLinear",
    "FluidPoly",
    "KellerSegel",
    "CubicExample",
    "DeltaFPoly",
)
ORTHANT = "PositiveOrthant"
SIMPLEX = "GibbsSimplex"
DEFAULT_MARGIN = 0.05
DEFAULT_BOX_UPPER = 3.0

PRESSURE_FAMILIES = ("SktLinear", "SktPower", "FluidLinear", "FluidPoly", "DeltaFPoly")
VOLUME_FILLING = ("VolumeFillingSeparable", "VolumeFillingChi")


class Polynomial:
    """Sum of monomials ``coef * prod_j u_j**e_j`` with non-negative integer exponents."""

    def __init__(self, terms, n):
        rows = np.asarray(terms, dtype=float).reshape(-1, n + 1) if len(terms) else np.zeros((0, n + 1))
        self.n = n
        self.coefs = rows[:, 0].copy()
        powers = rows[:, 1:]
        if np.any(powers < 0) or np.any(powers != np.round(powers)):
            raise ContractViolation("polynomial exponents must be non-negative integers")
        self.powers = powers.astype(int)

    @property
    def degree(self):
        return int(self.powers.sum(axis=1).max()) if len(self.coefs) else 0

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape[:-1])
        for c, e in zip(self.coefs, self.powers):
            out = out + c * np.prod(u ** e, axis=-1)
        return out

    def gradient(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        for c, e in zip(self.coefs, self.powers):
            for j in range(self.n):
                if e[j] == 0:
                    continue
                d = e.copy()
                d[j] -= 1
                out[..., j] += c * e[j] * np.prod(u ** d, axis=-1)
        return out

    def to_list(self):
        return [[float(c), *map(int, e)] for c, e in zip(self.coefs, self.powers)]


@dataclass(frozen=True, eq=False)
class ModelSpec:
    family: str
    n: int
    params: dict
    domain: str = ORTHANT
    margin: float = DEFAULT_MARGIN
    box_upper: float = DEFAULT_BOX_UPPER
    name: str = ""
    polys: tuple = field(default=(), repr=False)

    @property
    def model_id(self):
        return self.name or self.family

    def to_dict(self):
        params = {}
        for k, v in self.params.items():
            if isinstance(v, np.ndarray):
                params[k] = v.tolist()
            else:
                params[k] = v
        d = {"family": self.family, "n": self.n, "params": params, "domain": self.domain, "margin": self.margin}
        if self.domain == ORTHANT:
            d["box_upper"] = self.box_upper
        if self.name:
            d["name"] = self.name
        return d


# ---------------------------------------------------------------- construction


def _vec(params, key, n):
    v = np.asarray(params[key], dtype=float)
    if v.shape != (n,):
        raise ContractViolation(f"params.{key} must have length {n}, got shape {v.shape}")
    return v


def _mat(params, key, n):
    M = np.asarray(params[key], dtype=float)
    if M.shape != (n, n):
        raise ContractViolation(f"params.{key} must be {n}x{n}, got shape {M.shape}")
    return M


def _nonneg(arr, key):
    if np.any(arr < 0):
        raise ContractViolation(f"params.{key} must be non-negative")


def make_model(family, n=None, params=None, domain=None, margin=DEFAULT_MARGIN, box_upper=DEFAULT_BOX_UPPER, name=""):
    """Build a validated, immutable ModelSpec.

    Coefficient arrays are converted to read-only float arrays. Sign
    constraints are enforced per family (SKT and linear fluid coefficients
    must be non-negative).
    """
    if family not in FAMILIES:
        raise ContractViolation(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    params = dict(params or {})
    fixed_n = {"KellerSegel": 2, "CubicExample": 3}
    if family in fixed_n:
        if n is not None and n != fixed_n[family]:
            raise ContractViolation(f"{family} has n={fixed_n[family]}")
        n = fixed_n[family]
    if n is None or not 1 <= int(n) <= 16:
        raise ContractViolation("n must be an integer in 1..16")
    n = int(n)
    if domain is None:
        domain = SIMPLEX if family in VOLUME_FILLING else ORTHANT
    if domain not in (ORTHANT, SIMPLEX):
        raise ContractViolation(f"unknown domain {domain!r}")
    if family in VOLUME_FILLING and domain != SIMPLEX:
        raise ContractViolation(f"{family} lives on the {SIMPLEX}")
    if not 0 < margin < 0.4:
        raise ContractViolation("margin must lie in (0, 0.4)")
    if domain == SIMPLEX and (n + 1) * margin >= 1:
        raise ContractViolation(f"margin {margin} infeasible on the {n}-species simplex")
    if domain == ORTHANT and box_upper <= 2 * margin:
        raise ContractViolation("box_upper must exceed twice the margin")

    clean = {}
    polys = ()
    if family in ("SktLinear", "SktPower"):
        clean["a0"] = _vec(params, "a0", n)
        clean["a"] = _mat(params, "a", n)
        _nonneg(clean["a0"], "a0")
        _nonneg(clean["a"], "a")
        if family == "SktPower":
            s = float(params["s"])
            if not s > 0:
                raise ContractViolation("params.s must be positive")
            clean["s"] = s
    elif family == "FluidLinear":
        clean["a"] = _mat(params, "a", n)
        _nonneg(clean["a"], "a")
    elif family == "VolumeFillingSeparable":
        for key in ("beta", "s", "gamma"):
            clean[key] = _vec(params, key, n)
        _nonneg(clean["beta"], "beta")
        for key in ("s", "gamma"):
            if np.any(clean[key] <= 0):
                raise ContractViolation(f"params.{key} must be positive")
    elif family == "VolumeFillingChi":
        C = _mat(params, "C", n)
        if not np.allclose(C, C.T, atol=1e-12):
            raise ContractViolation("params.C must be symmetric")
        clean["C"] = 0.5 * (C + C.T)
        gamma = float(params["gamma"])
        if not gamma > 0:
            raise ContractViolation("params.gamma must be positive")
        clean["gamma"] = gamma
    elif family == "KellerSegel":
        delta = float(params["delta"])
        if not delta > 0:
            raise ContractViolation("params.delta must be positive")
        clean["delta"] = delta
    elif family in ("FluidPoly", "DeltaFPoly"):
        key = "pressures" if family == "FluidPoly" else "fluxes"
        blocks = params[key]
        if len(blocks) != n:
            raise ContractViolation(f"params.{key} must list {n} polynomials")
        polys = tuple(Polynomial(b, n) for b in blocks)
        clean[key] = [p.to_list() for p in polys]

    for v in clean.values():
        if isinstance(v, np.ndarray):
            if not np.all(np.isfinite(v)):
                raise ContractViolation("coefficients must be finite")
            v.setflags(write=False)
    return ModelSpec(family, n, clean, domain, float(margin), float(box_upper), name, polys)


# ---------------------------------------------------------------- domain


def domain_defect(model, u):
    """Smallest distance-like slack of ``u`` to the boundary (u_i, and u_0 on the simplex)."""
    u = np.asarray(u, dtype=float)
    slack = np.min(u, axis=-1)
    if model.domain == SIMPLEX:
        slack = np.minimum(slack, 1.0 - np.sum(u, axis=-1))
    return slack


def check_domain(model, u):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != model.n:
        raise DomainError(f"state has {u.shape[-1]} components, model has n={model.n}")
    if not np.all(np.isfinite(u)) or np.any(domain_defect(model, u) <= 0):
        raise DomainError(f"state outside the open {model.domain}")
    return u


def sample_domain(model, count, margin=None, seed=0):
    """Deterministic scrambled-Halton points in the domain, centroid first.

    Returns an array of shape ``(count, n)``. On the orthant the points fill the
    box ``[margin, box_upper]^n``; on the simplex every ``u_i`` and ``u_0`` is at
    least ``margin``.
    """
    margin = model.margin if margin is None else margin
    n = model.n
    if count < 1:
        raise ContractViolation("count must be >= 1")
    if not 0 < margin < 0.4:
        raise ContractViolation("margin must lie in (0, 0.4)")
    if model.domain == SIMPLEX and (n + 1) * margin >= 1:
        raise ContractViolation(f"margin {margin} infeasible on the {n}-species simplex")
    if model.domain == ORTHANT and model.box_upper <= margin:
        raise ContractViolation("margin exceeds the sampling box")

    if count > 1:
        cube = qmc.Halton(d=n, scramble=True, seed=seed).random(count - 1)
    else:
        cube = np.zeros((0, n))

    if model.domain == ORTHANT:
        lo, hi = margin, model.box_upper
        centroid = np.full((1, n), 0.5 * (lo + hi))
        pts = lo + (hi - lo) * cube
    else:
        scale = 1.0 - (n + 1) * margin
        centroid = np.full((1, n), 1.0 / (n + 1))
        # uniform spacings of sorted cube coordinates map the cube onto the simplex
        srt = np.sort(cube, axis=1)
        edges = np.concatenate([np.zeros((len(cube), 1)), srt, np.ones((len(cube), 1))], axis=1)
        v = np.diff(edges, axis=1)[:, :n]
        pts = margin + scale * v
    return np.concatenate([centroid, pts], axis=0)


# ---------------------------------------------------------------- evaluators


def _u_power(u, s):
    return np.power(u, s)


def pressures(model, u):
    """Pressures ``p(u)`` (fluxes ``F(u)`` for DeltaFPoly), shape ``(..., n)``."""
    u = np.asarray(u, dtype=float)
    f, P = model.family, model.params
    if f == "SktLinear":
        return P["a0"] + u @ P["a"].T
    if f == "SktPower":
        return P["a0"] + _u_power(u, P["s"]) @ P["a"].T
    if f == "FluidLinear":
        return u @ P["a"].T
    if f in ("FluidPoly", "DeltaFPoly"):
        return np.stack([p(u) for p in model.polys], axis=-1)
    raise UnsupportedError(f"{f} has no pressure functions")


def pressure_jacobian_batch(model, u):
    u = np.asarray(u, dtype=float)
    f, P = model.family, model.params
    lead = u.shape[:-1]
    if f in ("SktLinear", "FluidLinear"):
        return np.broadcast_to(P["a"], lead + (model.n, model.n)).copy()
    if f == "SktPower":
        s = P["s"]
        return P["a"] * (s * _u_power(u, s - 1.0))[..., None, :]
    if f in ("FluidPoly", "DeltaFPoly"):
        return np.stack([p.gradient(u) for p in model.polys], axis=-2)
    raise UnsupportedError(f"{f} has no pressure functions")


def pressure_jacobian(model, u):
    """Jacobian ``Q_ij = dp_i/du_j`` at one domain point."""
    u = check_domain(model, u)
    return pressure_jacobian_batch(model, u)


def volume_filling_parts(model, u):
    """Return ``(p, dp, q, dq)`` per species for the volume-filling families.

    For VolumeFillingSeparable ``dp`` is ``p_i'(u_i)``; for VolumeFillingChi it
    is the full Jacobian ``p_i C_ij``.
    """
    u = np.asarray(u, dtype=float)
    P = model.params
    u0 = 1.0 - np.sum(u, axis=-1, keepdims=True)
    if model.family == "VolumeFillingSeparable":
        s, g = P["s"], P["gamma"]
        p = P["beta"] + _u_power(u, s)
        dp = s * _u_power(u, s - 1.0)
        q = _u_power(u0, g)
        dq = g * _u_power(u0, g - 1.0)
        return p, dp, q, dq
    if model.family == "VolumeFillingChi":
        C, g = P["C"], P["gamma"]
        p = np.exp(u @ C.T)
        dp = p[..., :, None] * C
        q = np.broadcast_to(u0 ** g, u.shape)
        dq = np.broadcast_to(g * u0 ** (g - 1.0), u.shape)
        return p, dp, q, dq
    raise UnsupportedError(f"{model.family} is not a volume-filling family")


def diffusion_matrix_batch(model, u):
    """``A(u)`` for states of shape ``(..., n)``; no domain check."""
    u = np.asarray(u, dtype=float)
    f, P, n = model.family, model.params, model.n
    eye = np.eye(n)
    if f in ("SktLinear", "SktPower"):
        p = pressures(model, u)
        Q = pressure_jacobian_batch(model, u)
        return p[..., :, None] * eye + u[..., :, None] * Q
    if f in ("FluidLinear", "FluidPoly"):
        return u[..., :, None] * pressure_jacobian_batch(model, u)
    if f == "DeltaFPoly":
        return pressure_jacobian_batch(model, u)
    if f == "VolumeFillingSeparable":
        p, dp, q, dq = volume_filling_parts(model, u)
        diag = p * q + u * q * dp
        return diag[..., :, None] * eye + (u * p * dq)[..., :, None] * np.ones(n)
    if f == "VolumeFillingChi":
        p, dp, q, dq = volume_filling_parts(model, u)
        return ((p * q)[..., :, None] * eye + (u * p * dq)[..., :, None] * np.ones(n)
                + (u * q)[..., :, None] * dp)
    if f == "KellerSegel":
        A = np.zeros(u.shape[:-1] + (2, 2))
        A[..., 0, 0] = 1.0
        A[..., 0, 1] = -u[..., 0]
        A[..., 1, 0] = P["delta"]
        A[..., 1, 1] = 1.0
        return A
    if f == "CubicExample":
        A = np.zeros(u.shape[:-1] + (3, 3))
        A[..., 0, 0] = u[..., 0]
        A[..., 0, 2] = u[..., 2]
        A[..., 1, 0] = u[..., 0]
        A[..., 1, 1] = u[..., 1]
        A[..., 2, 1] = u[..., 1]
        A[..., 2, 2] = u[..., 2]
        return A
    raise UnsupportedError(f)


def diffusion_matrix(model, u):
    """Diffusion matrix ``A(u)`` at one point of the model's domain."""
    u = check_domain(model, u)
    if u.ndim != 1:
        raise DomainError("diffusion_matrix takes a single state; use diffusion_matrix_batch for grids")
    return diffusion_matrix_batch(model, u)


def is_constant_matrix(model):
    """True when ``A(u)`` does not depend on ``u`` (DeltaFPoly with affine fluxes)."""
    return model.family == "DeltaFPoly" and all(p.degree <= 1 for p in model.polys)


def model_notes(model):
    notes = []
    if model.family == "KellerSegel":
        notes.append(
            "Keller-Segel diffusion matrix taken as [[1, -u1], [delta, 1]]: the displayed second "
            "equation reads Laplace(u1) + delta Laplace(u2), which gives row [1, delta], but the "
            "stated eigenvalues 1 +- i sqrt(delta u1) and the factorization diag(u1, delta) * "
            "[[1/u1, -1], [1, 1/delta]] both require row [delta, 1]. Reaction terms are dropped."
        )
    return notes


# ---------------------------------------------------------------- spec files


def _schema():
    text = resources.files("crossdiff").joinpath("schemas/model.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _locate_line(text, path):
    """Best-effort line number of the last object key in ``path``."""
    pos = 0
    line = None
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if not m:
            break
        pos = m.end()
        line = text.count("\n", 0, m.start()) + 1
    return line


def _field_name(path):
    out = ""
    for key in path:
        out += f"[{key}]" if isinstance(key, int) else (f".{key}" if out else str(key))
    return out


def model_from_dict(doc, text=None):
    """Validate a parsed spec document and build the ModelSpec."""
    validator = jsonschema.Draft7Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        line = _locate_line(text, path) if text is not None else None
        raise SpecError(err.message, field=_field_name(path) or "<root>", line=line)
    try:
        return make_model(
            doc["family"],
            n=doc.get("n"),
            params=doc.get("params", {}),
            domain=doc.get("domain"),
            margin=doc.get("margin", DEFAULT_MARGIN),
            box_upper=doc.get("box_upper", DEFAULT_BOX_UPPER),
            name=doc.get("name", ""),
        )
    except (ContractViolation, KeyError, TypeError, ValueError) as exc:
        msg = str(exc)
        m = re.search(r"params\.(\w+)", msg)
        path = ["params", m.group(1)] if m else []
        line = _locate_line(text, path) if (text is not None and path) else None
        raise SpecError(msg, field=_field_name(path) or None, line=line) from exc


def load_spec(path):
    """Read and validate a JSON model-spec file. Returns ``(model, document)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from exc
    model = model_from_dict(doc, text)
    sim = doc.get("simulation", {})
    for key in ("base", "amplitude"):
        if key in sim and len(sim[key]) != model.n:
            raise SpecError(f"must list {model.n} values", field=f"simulation.{key}",
                            line=_locate_line(text, ["simulation", key]))
    return model, doc


def load_model(path):
    """Read and validate a JSON model-spec file."""
    return load_spec(path)[0]
