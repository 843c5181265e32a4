"""Matrix sufficient conditions for noise-aided ISS stabilization.

The certificate is positive definiteness of

    Q = -[ A'P + PA + eps*P^2 + L/eps + 2R
           + sum_i (sigma_i^c)^2 K_i^c + sum_j (sigma_j^d)^2 K_j^d
           - (2/beta_max) * ( sum_i (sigma_i^c)^2 alpha_i^c J_i^c
                            + sum_j (sigma_j^d)^2 alpha_j^d J_j^d ) ],

where beta_max is the largest eigenvalue of P, the K matrices bound the
channel quadratic forms from above and the J matrices from below, and the
eps*P^2 + L/eps block is dropped for linear systems.  Q > 0 certifies
almost-sure stabilization with decay rate at least
lambda_min(Q) / (2*beta_max).

For the linear aiding family C_i(x) = c_i x one can take K_i = c_i^2 P,
J_i = c_i P, alpha_i = c_i; the certificate then reduces to a closed form
that is monotone in the aiding intensity, which the minimal-intensity
solver exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from noiseaid.errors import ValidationError

#: Relative eigenvalue threshold below which Q is not declared definite.
PD_RELATIVE_TOL = 1e-9

#: Allowed asymmetry (relative) in an assembled Q before symmetrization.
SYMMETRY_TOL = 1e-9


def _as_square(name: str, M, n: Optional[int] = None) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise ValidationError(f"{name} must be {n}x{n}, got shape {M.shape}")
    return M


def _check_symmetric(name: str, M: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise ValidationError(f"{name} is not symmetric")
    return 0.5 * (M + M.T)


def _check_psd(name: str, M: np.ndarray) -> np.ndarray:
    M = _check_symmetric(name, M)
    eigs = np.linalg.eigvalsh(M)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    if eigs[0] < -PD_RELATIVE_TOL * scale:
        raise ValidationError(f"{name} is not positive semidefinite (lambda_min={eigs[0]:g})")
    return M


def _check_pd(name: str, M: np.ndarray) -> np.ndarray:
    M = _check_symmetric(name, M)
    eigs = np.linalg.eigvalsh(M)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    if eigs[0] <= PD_RELATIVE_TOL * scale:
        raise ValidationError(f"{name} is not positive definite (lambda_min={eigs[0]:g})")
    return M


@dataclass(frozen=True)
class NoiseChannel:
    """One white-noise channel: intensity plus its bounding matrices.

    ``K`` bounds the channel quadratic form from above, ``J`` from below,
    and ``alpha`` is the smallest eigenvalue of the channel map (for the
    linear family C_i(x) = c_i x it equals c_i).  ``K`` and ``J`` may be
    omitted for channels consumed only by the closed-form corollary route.
    """

    sigma: float
    K: Optional[np.ndarray] = None
    J: Optional[np.ndarray] = None
    alpha: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValidationError(f"channel intensity must be finite and >= 0, got {self.sigma}")


@dataclass(frozen=True)
class ConditionInputs:
    """Assembled inputs for the Q-matrix certificates."""

    A: np.ndarray
    P: np.ndarray
    L: Optional[np.ndarray] = None
    R: Optional[np.ndarray] = None
    epsilon: Union[float, str] = "auto"
    aiding: Tuple[NoiseChannel, ...] = ()
    disturbance: Tuple[NoiseChannel, ...] = ()
    linear_system: bool = False

    def __post_init__(self):
        A = _as_square("A", self.A)
        n = A.shape[0]
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "P", _check_pd("P", _as_square("P", self.P, n)))
        L = self.L if self.L is not None else np.zeros((n, n))
        R = self.R if self.R is not None else np.zeros((n, n))
        object.__setattr__(self, "L", _check_psd("L", _as_square("L", L, n)))
        object.__setattr__(self, "R", _check_psd("R", _as_square("R", R, n)))
        if not self.linear_system and not isinstance(self.epsilon, str):
            if self.epsilon <= 0:
                raise ValidationError("epsilon must be positive (or 'auto')")
        if isinstance(self.epsilon, str) and self.epsilon != "auto":
            raise ValidationError("epsilon must be a positive number or 'auto'")
        for ch in tuple(self.aiding) + tuple(self.disturbance):
            if ch.K is not None:
                _check_psd("K", _as_square("K", ch.K, n))
            if ch.J is not None:
                _check_psd("J", _as_square("J", ch.J, n))
        object.__setattr__(self, "aiding", tuple(self.aiding))
        object.__setattr__(self, "disturbance", tuple(self.disturbance))

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a Q-matrix certificate check."""

    Q: np.ndarray
    eigenvalues: np.ndarray
    lambda_min_Q: float
    passes: bool
    epsilon_used: Optional[float]
    decay_bound: float

    def to_dict(self) -> dict:
        return {
            "Q": self.Q.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "lambda_min_Q": self.lambda_min_Q,
            "passes": self.passes,
            "epsilon_used": self.epsilon_used,
            "decay_bound": self.decay_bound,
        }


def lemma4_scale(R, S) -> float:
    """Scale sqrt(r*s) of the cross-term bound x'R Y(x) <= sqrt(r*s)||x||^2,
    with r, s the largest eigenvalues of the PSD matrices R and S."""
    R = _check_psd("R", _as_square("R", R))
    S = _check_psd("S", _as_square("S", S, R.shape[0]))
    r = float(np.linalg.eigvalsh(R)[-1])
    s = float(np.linalg.eigvalsh(S)[-1])
    return math.sqrt(max(r, 0.0) * max(s, 0.0))


def _noise_terms(channels: Sequence[NoiseChannel], n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return (sum sigma^2 K, sum sigma^2 alpha J) over the channels."""
    K_sum = np.zeros((n, n))
    J_sum = np.zeros((n, n))
    for ch in channels:
        s2 = ch.sigma**2
        if ch.K is None or ch.J is None:
            raise ValidationError("channel is missing its K or J bounding matrix")
        K_sum += s2 * np.asarray(ch.K, dtype=float)
        J_sum += s2 * ch.alpha * np.asarray(ch.J, dtype=float)
    return K_sum, J_sum


def _neg_q(inputs: ConditionInputs, epsilon: Optional[float], disturbance: bool) -> np.ndarray:
    A, P = inputs.A, inputs.P
    beta_max = float(np.linalg.eigvalsh(P)[-1])
    M = A.T @ P + P @ A + 2.0 * inputs.R
    if not inputs.linear_system:
        assert epsilon is not None
        M = M + epsilon * (P @ P) + inputs.L / epsilon
    channels = list(inputs.aiding)
    if disturbance:
        channels += list(inputs.disturbance)
    K_sum, J_sum = _noise_terms(channels, inputs.n)
    return M + K_sum - (2.0 / beta_max) * J_sum


def _golden_epsilon(objective: Callable[[float], float], lo: float = -6.0, hi: float = 6.0) -> float:
    """Golden-section minimizer of ``objective(10**u)`` over u in [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(10.0**c), objective(10.0**d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(10.0**c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(10.0**d)
    return 10.0 ** (0.5 * (a + b))


def _report_from_neg_q(neg_q: np.ndarray, P: np.ndarray, epsilon_used: Optional[float]) -> ConditionReport:
    Q = -neg_q
    scale = max(1.0, float(np.max(np.abs(Q))))
    asym = float(np.max(np.abs(Q - Q.T)))
    if asym > SYMMETRY_TOL * scale:
        raise ValidationError(f"assembled Q is asymmetric beyond tolerance ({asym:g})")
    Q = 0.5 * (Q + Q.T)
    eigs = np.linalg.eigvalsh(Q)
    lam_min = float(eigs[0])
    norm_q = float(np.max(np.abs(eigs)))
    passes = lam_min > PD_RELATIVE_TOL * norm_q and lam_min > 0.0
    beta_max = float(np.linalg.eigvalsh(P)[-1])
    return ConditionReport(
        Q=Q,
        eigenvalues=eigs,
        lambda_min_Q=lam_min,
        passes=passes,
        epsilon_used=epsilon_used,
        decay_bound=lam_min / (2.0 * beta_max),
    )


def _assemble(inputs: ConditionInputs, disturbance: bool) -> ConditionReport:
    if inputs.linear_system:
        return _report_from_neg_q(_neg_q(inputs, None, disturbance), inputs.P, None)
    if inputs.epsilon == "auto":
        eps = _golden_epsilon(
            lambda e: float(np.linalg.eigvalsh(_neg_q(inputs, e, disturbance))[-1])
        )
    else:
        eps = float(inputs.epsilon)
    return _report_from_neg_q(_neg_q(inputs, eps, disturbance), inputs.P, eps)


def q_theorem1(inputs: ConditionInputs) -> ConditionReport:
    """Certificate with both aiding and disturbance white-noise channels."""
    return _assemble(inputs, disturbance=True)


def q_theorem2(inputs: ConditionInputs) -> ConditionReport:
    """Certificate for aiding noise only (white disturbance folded into the
    undifferentiated disturbance input)."""
    if inputs.disturbance:
        raise ValidationError("aiding-only certificate takes no disturbance-noise channels")
    return _assemble(inputs, disturbance=False)


def _corollary_precheck(P: np.ndarray) -> Tuple[float, float]:
    eigs = np.linalg.eigvalsh(P)
    beta_min, beta_max = float(eigs[0]), float(eigs[-1])
    if not 2.0 * beta_min > beta_max:
        raise ValidationError(
            f"corollary requires 2*beta_min > beta_max for P "
            f"(beta_min={beta_min:g}, beta_max={beta_max:g})"
        )
    return beta_min, beta_max


def q_corollary(inputs: ConditionInputs, c: Sequence[float]) -> ConditionReport:
    """Closed-form certificate for the linear aiding family C_i(x) = c_i x.

    Substitutes K_i = c_i^2 P, J_i = c_i P; requires the eigenvalues of P
    to satisfy 2*beta_min > beta_max.  The aiding intensities are taken
    from ``inputs.aiding`` (their K/J/alpha entries are ignored).
    """
    beta_min, beta_max = _corollary_precheck(inputs.P)
    c = np.asarray(c, dtype=float)
    if len(c) != len(inputs.aiding):
        raise ValidationError("need one gain c_i per aiding channel")
    if np.any(c <= 0):
        raise ValidationError("aiding gains c_i must be positive")

    A, P = inputs.A, inputs.P
    M = A.T @ P + P @ A + 2.0 * inputs.R
    if not inputs.linear_system:
        eps = inputs.epsilon
        if eps == "auto":
            base = M.copy()

            def neg_q_of(e):
                return _corollary_terms(inputs, c, base + e * (P @ P) + inputs.L / e, beta_min, beta_max)

            eps = _golden_epsilon(lambda e: float(np.linalg.eigvalsh(neg_q_of(e))[-1]))
        eps = float(eps)
        M = M + eps * (P @ P) + inputs.L / eps
        eps_used: Optional[float] = eps
    else:
        eps_used = None

    neg_q = _corollary_terms(inputs, c, M, beta_min, beta_max)
    return _report_from_neg_q(neg_q, P, eps_used)


def _corollary_terms(
    inputs: ConditionInputs, c: np.ndarray, M: np.ndarray, beta_min: float, beta_max: float
) -> np.ndarray:
    n = inputs.n
    if inputs.disturbance:
        K_sum, J_sum = _noise_terms(inputs.disturbance, n)
        M = M + K_sum - (2.0 / beta_max) * J_sum
    aiding_weight = sum((ch.sigma * ci) ** 2 for ch, ci in zip(inputs.aiding, c))
    return M - (2.0 * beta_min / beta_max - 1.0) * aiding_weight * inputs.P


def min_aiding_intensity(
    inputs: ConditionInputs, c: Sequence[float], tol: float = 1e-8
) -> float:
    """Smallest common aiding intensity sigma* above which the corollary
    certificate passes; 0 if it already passes with the noise off.

    Bisection on sigma^2 is exact here because the corollary's -Q
    decreases monotonically (in the PSD order) as sigma^2 grows.
    """
    _corollary_precheck(inputs.P)

    def passes(sigma: float) -> bool:
        trial = replace(
            inputs, aiding=tuple(replace(ch, sigma=sigma) for ch in inputs.aiding)
        )
        return q_corollary(trial, c).passes

    if passes(0.0):
        return 0.0
    hi2 = 1.0
    while not passes(math.sqrt(hi2)):
        hi2 *= 4.0
        if hi2 > 1e16:
            raise ValidationError("no passing intensity found below sigma = 1e8")
    lo2 = 0.0
    while math.sqrt(hi2) - math.sqrt(lo2) > tol:
        mid2 = 0.5 * (lo2 + hi2)
        if passes(math.sqrt(mid2)):
            hi2 = mid2
        else:
            lo2 = mid2
    return math.sqrt(hi2)


@dataclass(frozen=True)
class BoundCheck:
    """Worst-case slack of one sampled inequality (negative = violated)."""

    name: str
    min_slack: float
    worst_point: np.ndarray

    @property
    def holds(self) -> bool:
        return self.min_slack >= 0.0


@dataclass(frozen=True)
class BoundReport:
    checks: Tuple[BoundCheck, ...]

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def __getitem__(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def verify_condition_bounds(
    P,
    sample_points: Sequence[np.ndarray],
    rho: Optional[Callable[[np.ndarray], float]] = None,
    D: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    R=None,
    channels: Sequence[Tuple[Callable[[np.ndarray], np.ndarray], np.ndarray, np.ndarray]] = (),
) -> BoundReport:
    """Numerically check the pointwise matrix-bound conditions.

    For the disturbance margin condition supply ``rho``, ``D`` and ``R``:
    slack = x'Rx - rho(x)*||x'P D(x)||.  For each aiding channel supply a
    triple (C_i, J_i, K_i): lower slack = x'P C_i(x) - x'J_i x, upper
    slack = x'K_i x - C_i(x)'P C_i(x).  Violations are reported through
    negative slacks, never raised.
    """
    P = _check_pd("P", _as_square("P", P))
    points = [np.asarray(x, dtype=float) for x in sample_points]
    if not points:
        raise ValidationError("need at least one sample point")
    checks: List[BoundCheck] = []

    if D is not None:
        if rho is None or R is None:
            raise ValidationError("the margin check needs rho, D and R together")
        R = _check_psd("R", _as_square("R", R, P.shape[0]))
        slacks = [
            float(x @ R @ x) - rho(x) * float(np.linalg.norm(x @ P @ D(x))) for x in points
        ]
        i = int(np.argmin(slacks))
        checks.append(BoundCheck("margin", slacks[i], points[i]))

    for idx, (C_i, J_i, K_i) in enumerate(channels):
        J_i = _check_psd("J", _as_square("J", J_i, P.shape[0]))
        K_i = _check_psd("K", _as_square("K", K_i, P.shape[0]))
        lower = [float(x @ P @ C_i(x)) - float(x @ J_i @ x) for x in points]
        upper = [
            float(x @ K_i @ x) - float(np.asarray(C_i(x)) @ P @ np.asarray(C_i(x)))
            for x in points
        ]
        i = int(np.argmin(lower))
        checks.append(BoundCheck(f"channel{idx}_lower", lower[i], points[i]))
        i = int(np.argmin(upper))
        checks.append(BoundCheck(f"channel{idx}_upper", upper[i], points[i]))

    return BoundReport(tuple(checks))


def lipschitz_gain(
    f: Callable[[np.ndarray], np.ndarray],
    theta: float,
    n_samples: int = 100_000,
    seed: int = 0,
    dim: int = 3,
) -> float:
    """Sampled bound ell = max ||f(x)|| / ||x|| over the ball ||x|| <= theta.

    ``L = ell^2 * I`` then satisfies the quadratic Lipschitz condition
    f(x)'f(x) <= x'Lx on the ball, up to sampling resolution.
    """
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_samples, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = theta * rng.random(n_samples) ** (1.0 / dim)
    best = 0.0
    for x, r in zip(dirs, radii):
        if r == 0.0:
            continue
        xv = r * x
        best = max(best, float(np.linalg.norm(f(xv))) / r)
    return best
