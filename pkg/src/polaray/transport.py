"""Transport of fiber polarization vectors along null rays.

The transport law pairs the along-ray derivative with the matrix

    M(x, k) = 1/2 {p~, p}(x, k) + i p~(x, k) p^s(x, k)

so that admissible fiber vectors satisfy ``d omega/dtau + M omega = 0``.
For the flat 4-potential wave symbol every ingredient of M vanishes
identically and transported vectors are constant bit-for-bit; the
generic path integrates the linear system with the same stepper and
parameter grid as the underlying ray.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure
from .minkowski import PhaseSpacePoint
from .principal_type import PrincipalTypeDecomposition, kernel_basis, kernel_residual
from .rays import Ray
from .symbols import mixed_derivative_symbol, _matmul_compat


class KernelEscape(NumericalFailure):
    """A transported fiber vector left the kernel beyond tolerance."""


@dataclass(frozen=True)
class HamiltonOrbit:
    """A ray lifted with one fiber vector per sample."""

    ray: Ray
    omega: np.ndarray  # (n, N) complex
    residuals: np.ndarray  # (n,) kernel-membership residual per sample
    reprojected: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=complex))
        object.__setattr__(self, "residuals", np.asarray(self.residuals, dtype=float))
        if self.omega.shape[0] != len(self.ray):
            raise InvalidInput("orbit fiber samples must match ray samples")
        if self.residuals.shape != (len(self.ray),):
            raise InvalidInput("orbit residuals must match ray samples")

    def __len__(self) -> int:
        return len(self.ray)


@dataclass(frozen=True)
class PolarizationSample:
    """One (x, k; omega) sample with a detection strength."""

    pt: PhaseSpacePoint
    omega: np.ndarray
    strength: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=complex))
        if float(self.strength) < 0:
            raise InvalidInput("strength must be nonnegative")


class ConnectionEvaluator:
    """Precomputed derivative symbols for fast evaluation of M(x, k)."""

    def __init__(self, d: PrincipalTypeDecomposition):
        self.d = d
        p, pt = d.p, d.p_tilde
        self.dpt_dk = [pt.diff_k(mu) for mu in range(4)]
        self.dpt_dx = [pt.diff_x(mu) for mu in range(4)]
        self.dp_dk = [p.diff_k(mu) for mu in range(4)]
        self.dp_dx = [p.diff_x(mu) for mu in range(4)]
        self.mixed = mixed_derivative_symbol(p)
        bracket_zero = all(s.is_zero() for s in self.dpt_dk + self.dpt_dx)
        sub_zero = p.is_zero("lower") and self.mixed.is_zero()
        # {p~, p} also vanishes when p has no x-dependence and p~ no
        # k-dependence (and vice versa); the conservative test above is
        # enough for the constant-coefficient fast path that matters.
        self.identically_zero = bracket_zero and sub_zero

    def matrix_raw(self, x, k) -> np.ndarray:
        dim = max(self.d.p.dimension, self.d.p_tilde.dimension)
        out = np.zeros((dim, dim), dtype=complex)
        for mu in range(4):
            out += 0.5 * _matmul_compat(
                self.dpt_dk[mu].eval_raw(x, k), self.dp_dx[mu].eval_raw(x, k)
            )
            out -= 0.5 * _matmul_compat(
                self.dpt_dx[mu].eval_raw(x, k), self.dp_dk[mu].eval_raw(x, k)
            )
        subprincipal = self.d.p.eval_raw(x, k, "lower") + 0.5j * self.mixed.eval_raw(x, k)
        out += 1j * _matmul_compat(self.d.p_tilde.eval_raw(x, k), subprincipal)
        return out


def connection_matrix(d: PrincipalTypeDecomposition, pt: PhaseSpacePoint) -> np.ndarray:
    """The transport matrix M = 1/2 {p~, p} + i p~ p^s at one point.

    The along-ray derivative part of the full transport law is realized
    as d/dtau by :func:`transport`; this returns only the matrix factor.
    """
    return ConnectionEvaluator(d).matrix_raw(pt.x, pt.k)


def transport(
    d: PrincipalTypeDecomposition,
    ray: Ray,
    omega0,
    residual_tol: float = 1e-6,
    reproject: bool = False,
) -> HamiltonOrbit:
    """Transport a fiber vector along a ray: d omega/dtau = -M omega.

    Integration reuses the ray's tau grid with a classic RK4 step per
    interval; M at stage midpoints is evaluated on linearly interpolated
    (x, k).  Optional reprojection onto the numerical kernel after each
    step is off by default and recorded on the orbit when enabled.

    Raises
    ------
    KernelEscape
        If the kernel residual |p omega| / |omega| exceeds
        ``residual_tol`` at any sample, including the start.
    """
    omega0 = np.asarray(omega0, dtype=complex)
    dim = d.p.dimension
    if omega0.shape != (dim,):
        raise InvalidInput(f"omega0 must have shape ({dim},)")
    n = len(ray)
    evaluator = ConnectionEvaluator(d)

    omega = np.empty((n, dim), dtype=complex)
    omega[0] = omega0
    if evaluator.identically_zero:
        omega[1:] = omega0
    else:
        w = omega0.copy()
        for i in range(n - 1):
            h = ray.tau[i + 1] - ray.tau[i]
            x_mid = 0.5 * (ray.x[i] + ray.x[i + 1])
            k_mid = 0.5 * (ray.k[i] + ray.k[i + 1])
            m0 = evaluator.matrix_raw(ray.x[i], ray.k[i])
            m_mid = evaluator.matrix_raw(x_mid, k_mid)
            m1 = evaluator.matrix_raw(ray.x[i + 1], ray.k[i + 1])
            s1 = -(m0 @ w)
            s2 = -(m_mid @ (w + 0.5 * h * s1))
            s3 = -(m_mid @ (w + 0.5 * h * s2))
            s4 = -(m1 @ (w + h * s3))
            w = w + (h / 6.0) * (s1 + 2 * s2 + 2 * s3 + s4)
            if reproject:
                basis = kernel_basis(d.p, ray.point(i + 1))
                if basis.vectors:
                    stack = np.array(basis.vectors)
                    w = stack.T @ (stack.conj() @ w)
            omega[i + 1] = w

    residuals = _orbit_residuals(d, ray, omega)
    worst = int(np.argmax(residuals))
    if residuals[worst] > residual_tol:
        raise KernelEscape(
            f"kernel residual {residuals[worst]:.3e} exceeds {residual_tol:.1e} "
            f"at tau = {ray.tau[worst]}"
        )
    return HamiltonOrbit(ray=ray, omega=omega, residuals=residuals, reprojected=reproject)


def _orbit_residuals(d: PrincipalTypeDecomposition, ray: Ray, omega: np.ndarray) -> np.ndarray:
    # for p = q * identity the residual is just |q| for any unit fiber,
    # which the ray already recorded
    if d.scalar_multiple:
        norms = np.linalg.norm(omega, axis=1)
        out = np.abs(ray.q).copy()
        out[norms == 0.0] = 0.0
        return out
    return np.array(
        [kernel_residual(d.p, ray.point(i), omega[i]) for i in range(len(ray))]
    )


def fiber_scale(orbit: HamiltonOrbit, z: complex) -> HamiltonOrbit:
    """Scale every fiber sample by a complex number; orbits are closed under this."""
    omega = orbit.omega * complex(z)
    residuals = orbit.residuals if z != 0 else np.zeros_like(orbit.residuals)
    return HamiltonOrbit(
        ray=orbit.ray, omega=omega, residuals=residuals, reprojected=orbit.reprojected
    )


def project_wavefront(
    samples, zero_tol: float = 1e-12, x_tol: float = 1e-9, k_tol: float = 1e-9
):
    """Base points (x, k) of all samples with a nonzero fiber vector.

    Samples whose fiber norm is at or below ``zero_tol`` are dropped (the
    zero section carries no singularity); surviving base points are
    deduplicated within the stated tolerances, keeping first occurrences
    in input order.
    """
    kept: list[PhaseSpacePoint] = []
    for sample in samples:
        if float(np.linalg.norm(sample.omega)) <= zero_tol:
            continue
        pt = sample.pt
        duplicate = any(
            np.max(np.abs(pt.x - other.x)) <= x_tol
            and np.max(np.abs(pt.k - other.k)) <= k_tol
            for other in kept
        )
        if not duplicate:
            kept.append(pt)
    return kept
