"""Explicit finite-volume solver for ``u_t = (A(u) u_x)_x`` on an interval with no-flux ends.

The discrete entropy ``H = dx sum_j h(u_j)`` and dissipation
``D = dx sum_faces g . h''(ubar) A(ubar) g`` (``g`` the face difference
quotient, ``ubar`` the face average) are recorded at every step, together
with the balance residual ``(H_{k+1} - H_k) / dt + D_k``.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import models as _models
from .errors import ContractViolation, Diverged, Stalled, StepRejected

MAX_HALVINGS = 20
MONOTONICITY_RTOL = 1e-8


@dataclass
class SimConfig:
    """Run parameters.

    The initial profile is ``base_i + amplitude_i cos(mode pi x / length)`` at
    cell centres unless ``initial`` (shape ``(cells, n)``) is given.
    """

    model: _models.ModelSpec
    entropy: object
    cells: int = 64
    length: float = 1.0
    base: np.ndarray | None = None
    amplitude: np.ndarray | None = None
    mode: int = 1
    t_final: float = 0.01
    safety: float = 0.4
    stride: int = 1
    max_steps: int = 200_000
    initial: np.ndarray | None = None

    @property
    def dx(self):
        return self.length / self.cells

    def initial_state(self):
        m = self.model
        if self.initial is not None:
            u = np.array(self.initial, dtype=float)
            if u.shape != (self.cells, m.n):
                raise ContractViolation(f"initial state must have shape ({self.cells}, {m.n})")
        else:
            base, amp = default_profile(m)
            base = base if self.base is None else np.asarray(self.base, dtype=float)
            amp = amp if self.amplitude is None else np.asarray(self.amplitude, dtype=float)
            x = (np.arange(self.cells) + 0.5) * self.dx
            u = base + np.cos(self.mode * np.pi * x / self.length)[:, None] * amp
        if np.any(~np.isfinite(u)) or np.any(_models.domain_defect(m, u) < m.margin):
            raise ContractViolation(f"initial profile is not inside the domain with margin {m.margin}")
        return u

    def validate(self):
        if self.cells < 8:
            raise ContractViolation("need at least 8 cells")
        if not 0 < self.safety < 1:
            raise ContractViolation("safety factor must lie in (0, 1)")
        if self.t_final <= 0 or self.length <= 0 or self.stride < 1:
            raise ContractViolation("t_final, length and stride must be positive")


def default_profile(model):
    """Per-species base values and alternating-sign cosine amplitudes well inside the domain."""
    n = model.n
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    if model.domain == _models.SIMPLEX:
        base = np.full(n, 1.0 / (n + 1))
        return base, 0.3 * base * sign
    mid = 0.5 * (model.margin + model.box_upper)
    base = np.full(n, min(1.0, mid))
    return base, 0.4 * base * sign


@dataclass
class SimResult:
    times: np.ndarray
    entropy: np.ndarray
    dissipation: np.ndarray
    residual: np.ndarray
    mass: np.ndarray
    umin: np.ndarray
    umax: np.ndarray
    states: list = field(default_factory=list)
    state_times: list = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0
    reason: str = "completed"

    def monotonicity_violations(self, rtol=MONOTONICITY_RTOL):
        """Step indices ``k`` with ``H_{k+1} > H_k + rtol (1 + |H_k|)``."""
        H = self.entropy
        bad = H[1:] > H[:-1] + rtol * (1.0 + np.abs(H[:-1]))
        return np.flatnonzero(bad)

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residual))) if len(self.residual) else 0.0


def face_flux(model, u, dx):
    """Fluxes ``A(ubar) (u_{j+1} - u_j) / dx`` on the interior faces, with ``ubar`` and ``A(ubar)``."""
    g = np.diff(u, axis=0) / dx
    ubar = 0.5 * (u[1:] + u[:-1])
    A = _models.diffusion_matrix_batch(model, ubar)
    return np.einsum("fij,fj->fi", A, g), g, ubar, A


def step(model, u, dt, dx):
    """One conservative explicit Euler step with zero flux through both ends.

    Raises StepRejected if any cell ends up closer than ``margin / 2`` to the
    domain boundary (or outside it).
    """
    F, *_ = face_flux(model, u, dx)
    div = np.zeros_like(u)
    div[:-1] += F
    div[1:] -= F
    new = u + (dt / dx) * div
    if not np.all(np.isfinite(new)):
        raise Diverged("non-finite state")
    if np.any(_models.domain_defect(model, new) < 0.5 * model.margin):
        raise StepRejected("step leaves the guarded domain")
    return new


def discrete_entropy(h, u, dx):
    return float(dx * np.sum(h.value(u)))


def discrete_dissipation(model, h, u, dx):
    _, g, ubar, A = face_flux(model, u, dx)
    M = h.hessian(ubar) @ A
    return float(dx * np.einsum("fi,fij,fj->", g, M, g))


def spectral_radius(model, u):
    A = _models.diffusion_matrix_batch(model, u)
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def run(config):
    """Integrate to ``t_final``.

    The step is ``safety dx^2 / rho`` with ``rho`` the largest spectral radius of
    ``A`` over the cells, halved after each rejected step. Raises Stalled after
    20 consecutive halvings and Diverged on non-finite values; both carry the
    partial result.
    """
    config.validate()
    model, h, dx = config.model, config.entropy, config.dx
    u = config.initial_state()
    t = 0.0
    times, Hs, Ds, res = [0.0], [discrete_entropy(h, u, dx)], [discrete_dissipation(model, h, u, dx)], []
    masses, mins, maxs = [dx * u.sum(axis=0)], [u.min(axis=0)], [u.max(axis=0)]
    states, state_times = [u.copy()], [0.0]
    accepted = rejected = 0

    def result(reason):
        return SimResult(np.array(times), np.array(Hs), np.array(Ds), np.array(res), np.array(masses),
                         np.array(mins), np.array(maxs), states, state_times, accepted, rejected, reason)

    while t < config.t_final * (1 - 1e-12):
        if accepted >= config.max_steps:
            return result("max_steps")
        rho = spectral_radius(model, u)
        dt = config.safety * dx * dx / max(rho, 1e-300)
        dt = min(dt, config.t_final - t)
        for _ in range(MAX_HALVINGS + 1):
            try:
                new = step(model, u, dt, dx)
                break
            except StepRejected:
                rejected += 1
                dt *= 0.5
            except Diverged as exc:
                raise Diverged(f"t={t:.6g}: {exc}", result("diverged")) from exc
        else:
            raise Stalled(f"t={t:.6g}: {MAX_HALVINGS} halvings without an admissible step", result("stalled"))
        H_new = discrete_entropy(h, new, dx)
        if not np.isfinite(H_new):
            raise Diverged(f"t={t:.6g}: non-finite entropy", result("diverged"))
        res.append((H_new - Hs[-1]) / dt + Ds[-1])
        u, t = new, t + dt
        accepted += 1
        times.append(t)
        Hs.append(H_new)
        Ds.append(discrete_dissipation(model, h, u, dx))
        masses.append(dx * u.sum(axis=0))
        mins.append(u.min(axis=0))
        maxs.append(u.max(axis=0))
        if accepted % config.stride == 0:
            states.append(u.copy())
            state_times.append(t)
    if state_times[-1] != t:
        states.append(u.copy())
        state_times.append(t)
    return result("completed")


def write_csv(result, path, stride=1):
    """Time series: ``t, H, D, residual``, then ``mass_i``, ``min_i``, ``max_i`` per species.

    ``residual`` on row ``k`` belongs to the step from ``t_k`` to ``t_{k+1}``
    and is empty on the final row.
    """
    n = result.mass.shape[1]
    header = ["t", "H", "D", "residual"]
    header += [f"mass_{i + 1}" for i in range(n)]
    header += [f"min_{i + 1}" for i in range(n)]
    header += [f"max_{i + 1}" for i in range(n)]
    last = len(result.times) - 1
    rows = sorted(set(range(0, last + 1, stride)) | {last})
    fmt = "{:.17g}".format
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in rows:
            r = fmt(result.residual[k]) if k < len(result.residual) else ""
            w.writerow([fmt(result.times[k]), fmt(result.entropy[k]), fmt(result.dissipation[k]), r]
                       + [fmt(x) for x in result.mass[k]] + [fmt(x) for x in result.umin[k]]
                       + [fmt(x) for x in result.umax[k]])
