"""Null bicharacteristics: integrate the Hamilton flow of a scalar symbol.

The flow is ``dx^mu/dtau = dq/dk_mu``, ``dk_nu/dtau = -dq/dx^nu`` with
tau the affine parameter of those equations (not arc length, not
coordinate time).  For x-independent symbols the momentum side is the
zero polynomial, so k is held exactly constant and the fixed-step RK4
update collapses to the exact linear flow; this is what makes the
bit-exactness guarantees downstream possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .minkowski import SIGNATURE, PhaseSpacePoint, as_point4
from .symbols import MatrixSymbol


class ZeroSpatialPart(InvalidInput):
    """Cannot project a covector with vanishing spatial part to the cone."""


class NonNullStart(NumericalFailure):
    """Ray tracing started off the characteristic set."""


class StepFailure(NumericalFailure):
    """The adaptive step controller underflowed."""


class ConstraintDrift(NumericalFailure):
    """|q| exceeded the drift bound along the ray; integration aborted."""


class TooFewSamples(InvalidInput):
    """The operation needs more ray samples than were provided."""


@dataclass(frozen=True)
class Ray:
    """Sampled trajectory (tau, x, k) with q recorded along it."""

    tau: np.ndarray  # (n,)
    x: np.ndarray  # (n, 4)
    k: np.ndarray  # (n, 4)
    q: np.ndarray  # (n,)
    method: str = "rk4"
    step: float = math.nan

    def __post_init__(self):
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=float))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "k", np.asarray(self.k, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        n = self.tau.shape[0]
        if self.x.shape != (n, 4) or self.k.shape != (n, 4) or self.q.shape != (n,):
            raise InvalidInput("inconsistent ray sample shapes")
        if n == 0:
            raise InvalidInput("a ray needs at least one sample")
        if n > 1 and not np.all(np.diff(self.tau) > 0):
            raise InvalidInput("ray parameter must be strictly increasing")
        if np.any(np.all(self.k == 0.0, axis=1)):
            raise InvalidInput("ray contains a zero covector sample")
        for arr in (self.tau, self.x, self.k, self.q):
            if not np.all(np.isfinite(arr)):
                raise InvalidInput("ray contains non-finite samples")

    def __len__(self) -> int:
        return self.tau.shape[0]

    def point(self, i: int) -> PhaseSpacePoint:
        return PhaseSpacePoint(self.x[i], self.k[i])


def null_project(k, branch: str = "+") -> np.ndarray:
    """Replace k0 by +/-|spatial k| so the covector lands on the cone."""
    k = as_point4(k, "k")
    spatial = k[1:4]
    norm = float(np.linalg.norm(spatial))
    if norm == 0.0:
        raise ZeroSpatialPart("cannot null-project a covector with zero spatial part")
    if branch not in ("+", "-"):
        raise InvalidInput(f"branch must be '+' or '-', got {branch!r}")
    out = k.copy()
    out[0] = norm if branch == "+" else -norm
    return out


class HamiltonSystem:
    """Cached derivative symbols of a scalar q for repeated evaluation."""

    def __init__(self, q: MatrixSymbol):
        if q.dimension != 1:
            raise InvalidInput("ray tracing requires a scalar (N=1) symbol")
        self.q = q
        self.dq_dk = [q.diff_k(mu) for mu in range(4)]
        self.dq_dx = [q.diff_x(mu) for mu in range(4)]
        self.x_independent = all(d.is_zero() for d in self.dq_dx)

    def value(self, x, k) -> float:
        return self.q.eval_raw(x, k)[0, 0].real

    def velocity(self, x, k) -> np.ndarray:
        return np.array([d.eval_raw(x, k)[0, 0].real for d in self.dq_dk])

    def force(self, x, k) -> np.ndarray:
        return np.array([-d.eval_raw(x, k)[0, 0].real for d in self.dq_dx])


def trace_ray(
    q: MatrixSymbol,
    x0,
    k0,
    tau_span: tuple[float, float],
    step: float,
    method: str = "rk4",
    start_tol: float = 1e-10,
    drift_tol: float = 1e-6,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> Ray:
    """Integrate the Hamilton flow of q from (x0, k0) over tau_span.

    ``step`` is the fixed step for rk4 (shrunk uniformly so the span is
    an integer number of steps) and the initial step for the adaptive
    embedded pair.  The start must satisfy |q(x0,k0)| <= start_tol
    (callers project to the cone first); a drift monitor aborts if |q|
    ever exceeds drift_tol, since q is conserved by the exact flow and
    silent drift would poison downstream transport.
    """
    x0 = as_point4(x0, "x0")
    k0 = as_point4(k0, "k0")
    tau0, tau1 = float(tau_span[0]), float(tau_span[1])
    if not (math.isfinite(tau0) and math.isfinite(tau1)) or tau1 < tau0:
        raise InvalidInput(f"bad tau span {tau_span}")
    if step <= 0:
        raise InvalidInput("step must be positive")
    if method not in ("rk4", "adaptive"):
        raise InvalidInput(f"unknown method {method!r}")

    system = HamiltonSystem(q)
    q0 = system.value(x0, k0)
    if abs(q0) > start_tol:
        raise NonNullStart(f"|q(x0,k0)| = {abs(q0):.3e} exceeds start tolerance {start_tol:.1e}")

    span = tau1 - tau0
    if span == 0.0:
        return Ray(
            tau=np.array([tau0]),
            x=x0[np.newaxis],
            k=k0[np.newaxis],
            q=np.array([q0]),
            method=method,
            step=step,
        )

    if method == "rk4":
        n = max(1, math.ceil(span / step - 1e-9))
        h = span / n
        if system.x_independent:
            # dk/dtau is the zero polynomial: k is exactly constant and the
            # RK4 stages all equal the same velocity, so the update is the
            # exact linear flow.
            v = system.velocity(x0, k0)
            tau = tau0 + np.arange(n + 1) * h
            x = x0 + (tau - tau0)[:, np.newaxis] * v
            k = np.broadcast_to(k0, (n + 1, 4)).copy()
            qs = np.full(n + 1, q0)
            return Ray(tau=tau, x=x, k=k, q=qs, method="rk4", step=h)
        tau = tau0 + np.arange(n + 1) * h
        x = np.empty((n + 1, 4))
        k = np.empty((n + 1, 4))
        qs = np.empty(n + 1)
        x[0], k[0], qs[0] = x0, k0, q0
        xi, ki = x0.copy(), k0.copy()
        for i in range(n):
            xi, ki = _rk4_step(system, xi, ki, h)
            qi = system.value(xi, ki)
            if abs(qi) > drift_tol:
                raise ConstraintDrift(
                    f"|q| = {abs(qi):.3e} exceeded drift bound {drift_tol:.1e} at tau = {tau[i + 1]}"
                )
            x[i + 1], k[i + 1], qs[i + 1] = xi, ki, qi
        return Ray(tau=tau, x=x, k=k, q=qs, method="rk4", step=h)

    return _trace_adaptive(system, x0, k0, tau0, tau1, step, drift_tol, rtol, atol)


def _rk4_step(system: HamiltonSystem, x, k, h):
    def f(xx, kk):
        return system.velocity(xx, kk), system.force(xx, kk)

    ax1, ak1 = f(x, k)
    ax2, ak2 = f(x + 0.5 * h * ax1, k + 0.5 * h * ak1)
    ax3, ak3 = f(x + 0.5 * h * ax2, k + 0.5 * h * ak2)
    ax4, ak4 = f(x + h * ax3, k + h * ak3)
    x_new = x + (h / 6.0) * (ax1 + 2 * ax2 + 2 * ax3 + ax4)
    k_new = k + (h / 6.0) * (ak1 + 2 * ak2 + 2 * ak3 + ak4)
    return x_new, k_new


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _trace_adaptive(system, x0, k0, tau0, tau1, h0, drift_tol, rtol, atol):
    taus = [tau0]
    xs = [x0.copy()]
    ks = [k0.copy()]
    qs = [system.value(x0, k0)]

    def f(y):
        x, k = y[:4], y[4:]
        return np.concatenate([system.velocity(x, k), system.force(x, k)])

    y = np.concatenate([x0, k0])
    tau = tau0
    h = min(h0, tau1 - tau0)
    h_min = 16 * np.finfo(float).eps * max(abs(tau0), abs(tau1), 1.0)
    max_steps = 10_000_000
    for _ in range(max_steps):
        if tau >= tau1:
            break
        h = min(h, tau1 - tau)
        if h < h_min:
            raise StepFailure(f"adaptive step underflowed to {h:.3e} at tau = {tau}")
        stages = []
        for i in range(7):
            yi = y.copy()
            for j, a in enumerate(_DP_A[i]):
                yi += h * a * stages[j]
            stages.append(f(yi))
        y5 = y + h * sum(b * s for b, s in zip(_DP_B5, stages))
        y4 = y + h * sum(b * s for b, s in zip(_DP_B4, stages))
        err = np.max(np.abs(y5 - y4) / (atol + rtol * np.maximum(np.abs(y), np.abs(y5))))
        if err <= 1.0:
            tau += h
            y = y5
            qv = system.value(y[:4], y[4:])
            if abs(qv) > drift_tol:
                raise ConstraintDrift(
                    f"|q| = {abs(qv):.3e} exceeded drift bound {drift_tol:.1e} at tau = {tau}"
                )
            taus.append(tau)
            xs.append(y[:4].copy())
            ks.append(y[4:].copy())
            qs.append(qv)
        factor = 0.9 * err ** (-0.2) if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    else:
        raise StepFailure("adaptive integrator exceeded the step budget")
    return Ray(
        tau=np.array(taus),
        x=np.array(xs),
        k=np.array(ks),
        q=np.array(qs),
        method="adaptive",
        step=h0,
    )


def geodesic_residual(ray: Ray) -> float:
    """Max second-difference estimate |x'' | on a uniformly sampled ray."""
    n = len(ray)
    if n < 3:
        raise TooFewSamples("geodesic_residual needs at least 3 samples")
    dtau = np.diff(ray.tau)
    h = dtau[0]
    if np.max(np.abs(dtau - h)) > 1e-9 * abs(h):
        raise InvalidInput("geodesic_residual needs uniform tau spacing")
    second = ray.x[2:] - 2.0 * ray.x[1:-1] + ray.x[:-2]
    return float(np.max(np.abs(second)) / h**2)


def line_deviation(points: np.ndarray) -> float:
    """Max perpendicular deviation of points from their best-fit line."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 2:
        return 0.0
    centered = pts - pts.mean(axis=0)
    _, _, vh = np.linalg.svd(centered, full_matrices=False)
    direction = vh[0]
    perp = centered - np.outer(centered @ direction, direction)
    return float(np.max(np.linalg.norm(perp, axis=1)))


def null_curve_residual(q: MatrixSymbol, ray: Ray) -> float:
    """Max of |1/4 eta_{mu nu} xdot^mu xdot^nu| along the ray samples."""
    system = HamiltonSystem(q)
    eta = np.asarray(SIGNATURE)
    if system.x_independent and len(ray) > 1 and np.all(ray.k == ray.k[0]):
        v = system.velocity(ray.x[0], ray.k[0])
        return abs(0.25 * float(np.sum(eta * v * v)))
    worst = 0.0
    for i in range(len(ray)):
        v = system.velocity(ray.x[i], ray.k[i])
        worst = max(worst, abs(0.25 * float(np.sum(eta * v * v))))
    return worst
