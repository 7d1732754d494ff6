"""Moving constraint sets, exact projectors, and the certified inexact-projection contract.

A projection provider never materializes an enlarged set.  It returns a point
``z`` together with a :class:`ProjectionCertificate` whose two numbers bound the
two halves of the contract:

* ``value_gap``  >= ||x - z||^2 - d_S(x)^2   (the squared-distance excess), and
* ``enlargement_residual`` >= d_S(z)          (how far z may sit outside S).

The certificate is VALID for a tolerance pair (eps, eta) when value_gap <= eps
and enlargement_residual <= eta.  Closed-form families certify through their
exact projectors; polyhedra under a quadratic metric delegate to the dual
projected-gradient engine; user-supplied sets are re-validated from their
distance-bound callbacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateFailure, BudgetExhausted, UnsupportedKind


def as_point(x) -> np.ndarray:
    """Coerce to a finite 1-D float vector."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("points must be 1-D vectors")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    return x


@dataclass
class ProjectionCertificate:
    """Auditable evidence that a returned point is an eps-eta approximate projection."""

    epsilon: float
    eta: float
    value_gap: float
    enlargement_residual: float
    iterations: int = 0
    method: str = "exact"
    multiplier: np.ndarray | None = None

    @property
    def is_valid(self) -> bool:
        return (
            self.value_gap <= self.epsilon
            and self.enlargement_residual <= self.eta
        )


# --------------------------------------------------------------------------
# closed-form families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Halfspace:
    """{x : a . x >= b} with nonzero normal a."""

    normal: np.ndarray
    offset: float
    lipschitz_const: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "normal", as_point(self.normal))
        if np.linalg.norm(self.normal) == 0.0:
            raise ValueError("halfspace normal must be nonzero")

    def distance(self, t: float, x) -> float:
        x = as_point(x)
        a = self.normal
        return max(0.0, (self.offset - float(a @ x)) / float(np.linalg.norm(a)))

    def project(self, t: float, x) -> np.ndarray:
        x = as_point(x)
        a = self.normal
        defect = self.offset - float(a @ x)
        if defect <= 0.0:
            return x.copy()
        return x + (defect / float(a @ a)) * a


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; +-inf bounds allowed componentwise."""

    lower: np.ndarray
    upper: np.ndarray
    lipschitz_const: float = 0.0

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape:
            raise ValueError("box bounds must have matching shapes")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def distance(self, t: float, x) -> float:
        return float(np.linalg.norm(as_point(x) - self.project(t, x)))

    def project(self, t: float, x) -> np.ndarray:
        return np.clip(as_point(x), self.lower, self.upper)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float
    lipschitz_const: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")

    def distance(self, t: float, x) -> float:
        return max(0.0, float(np.linalg.norm(as_point(x) - self.center)) - self.radius)

    def project(self, t: float, x) -> np.ndarray:
        x = as_point(x)
        delta = x - self.center
        norm = float(np.linalg.norm(delta))
        if norm <= self.radius:
            return x.copy()
        return self.center + (self.radius / norm) * delta


@dataclass(frozen=True)
class NonnegativeOrthant:
    dimension: int
    lipschitz_const: float = 0.0

    def distance(self, t: float, x) -> float:
        x = as_point(x)
        return float(np.linalg.norm(np.minimum(x, 0.0)))

    def project(self, t: float, x) -> np.ndarray:
        return np.maximum(as_point(x), 0.0)


@dataclass(frozen=True)
class TranslatingSet:
    """C(t) = C0 + t*v for a closed-form base set C0.

    Haus(C(t), C(s)) = ||v|| |t - s|, so the Lipschitz constant is ||v|| unless
    the caller supplies a larger one.
    """

    base: object
    velocity: np.ndarray
    lipschitz_const: float = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "velocity", as_point(self.velocity))
        speed = float(np.linalg.norm(self.velocity))
        if self.lipschitz_const is None:
            object.__setattr__(self, "lipschitz_const", speed)
        elif self.lipschitz_const < speed:
            raise ValueError("lipschitz_const must be at least ||velocity||")
        if not _is_closed_form(self.base):
            raise ValueError("TranslatingSet base must be a closed-form set")

    def distance(self, t: float, x) -> float:
        return self.base.distance(0.0, as_point(x) - t * self.velocity)

    def project(self, t: float, x) -> np.ndarray:
        return self.base.project(0.0, as_point(x) - t * self.velocity) + t * self.velocity


@dataclass(frozen=True)
class MetricPolyhedronRef:
    """Handle to a metric-polyhedron projection provider (the dual-QP engine).

    The provider must expose ``eps_eta_project(t, x, eps, eta, max_iters=...,
    lam0=...)`` and ``distance_bounds(t, x, tol=...)``.
    """

    provider: object

    @property
    def lipschitz_const(self) -> float:
        return self.provider.lipschitz_const


@dataclass(frozen=True)
class CustomSet:
    """User-supplied set: distance-bound and projection callbacks.

    ``distance_bounds_fn(t, x) -> (lower, upper)`` brackets d_S(x);
    ``project_fn(t, x, eps, eta) -> z`` proposes a projection.  Certificates
    are recomputed here from the distance bounds (lower bound for the value
    gap, upper bound at z for the residual), so a sloppy callback cannot
    smuggle an invalid point through.
    """

    distance_bounds_fn: object
    project_fn: object
    lipschitz_const: float = 0.0


_CLOSED_FORM = (Halfspace, Box, Ball, NonnegativeOrthant)


def _is_closed_form(set_) -> bool:
    return isinstance(set_, _CLOSED_FORM) or isinstance(set_, TranslatingSet)


# --------------------------------------------------------------------------
# deliberate slack consumption (scheme stress mode)
# --------------------------------------------------------------------------


@dataclass
class SlackPolicy:
    """Consume a fraction of the (eps, eta) budget instead of projecting exactly.

    Used to exercise the inexact-projection theory on problems whose exact
    projectors would otherwise make the scheme error vanish identically.  Each
    step draws a seeded sign and displaces the exact projection either outward
    (spending the eta budget) or along the inward/x direction (spending the eps
    budget).  Every proposed point is re-certified against exact distances and
    shrunk until its certificate is VALID, so the contract is never violated.
    """

    fraction: float = 0.75
    seed: int = 0
    direction: np.ndarray | None = None
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("slack fraction must be in (0, 1)")
        self._rng = np.random.default_rng(self.seed)

    def next_sign(self) -> int:
        return 1 if self._rng.integers(0, 2) == 1 else -1


def _slacked_projection(set_, t, x, eps, eta, slack: SlackPolicy):
    p = set_.project(t, x)
    d = float(np.linalg.norm(x - p))
    sign = slack.next_sign()
    frac = slack.fraction
    if d > 1e-14:
        outward = (x - p) / d
    elif slack.direction is not None:
        outward = as_point(slack.direction)
        outward = outward / np.linalg.norm(outward)
    else:
        outward = np.zeros_like(p)
        outward[0] = 1.0
    if sign < 0:
        # eta side: stop short of the set, leaving a residual of ~frac*eta
        step = min(frac * eta, d) if d > 1e-14 else frac * min(math.sqrt(eps), eta)
        candidate = p + step * outward
    else:
        # eps side: overshoot through the projection point (or wander when interior)
        if d > 1e-14:
            step = math.sqrt(d * d + frac * eps) - d
            candidate = p - step * outward
        else:
            step = frac * min(math.sqrt(eps), eta)
            candidate = p + step * outward
    # honest certification with exact distances; shrink toward p until valid
    for _ in range(8):
        gap = float(np.linalg.norm(x - candidate) ** 2 - d * d)
        residual = set_.distance(t, candidate)
        if gap <= eps and residual <= eta:
            return candidate, gap, residual
        candidate = p + 0.5 * (candidate - p)
    return p, 0.0, set_.distance(t, p)


# --------------------------------------------------------------------------
# module operations
# --------------------------------------------------------------------------


def distance_exact(set_, t: float, x) -> float:
    """d_{C(t)}(x) for closed-form families; zero iff x is in the set."""
    if not _is_closed_form(set_):
        raise UnsupportedKind(
            f"{type(set_).__name__} provides only estimated distances"
        )
    return set_.distance(t, as_point(x))


def project_exact(set_, t: float, x) -> np.ndarray:
    """proj_{C(t)}(x) for closed-form convex families; idempotent."""
    if not _is_closed_form(set_):
        raise UnsupportedKind(
            f"{type(set_).__name__} has no closed-form projector"
        )
    return set_.project(t, as_point(x))


def distance_bounds(set_, t: float, x, tol: float = 1e-10):
    """(lower, upper) bracket of d_{C(t)}(x); exact families return a tight pair."""
    x = as_point(x)
    if _is_closed_form(set_):
        d = set_.distance(t, x)
        return d, d
    if isinstance(set_, MetricPolyhedronRef):
        return set_.provider.distance_bounds(t, x, tol=tol)
    if isinstance(set_, CustomSet):
        lo, hi = set_.distance_bounds_fn(t, x)
        return float(lo), float(hi)
    raise UnsupportedKind(f"unsupported set kind {type(set_).__name__}")


def eps_eta_project(
    set_,
    t: float,
    x,
    eps: float,
    eta: float,
    *,
    max_iters: int | None = None,
    lam0: np.ndarray | None = None,
    slack: SlackPolicy | None = None,
):
    """Certified eps-eta approximate projection onto C(t).

    Returns ``(z, certificate)`` with a VALID certificate, or raises
    CertificateFailure when the provider cannot reach one within its budget.
    ``max_iters`` and the warm start ``lam0`` apply to metric-polyhedron
    providers; ``slack`` applies to closed-form kinds only (see SlackPolicy).
    """
    if eps <= 0.0 or eta <= 0.0:
        raise ValueError("eps and eta must be strictly positive")
    x = as_point(x)

    if _is_closed_form(set_):
        if slack is not None:
            z, gap, residual = _slacked_projection(set_, t, x, eps, eta, slack)
            cert = ProjectionCertificate(eps, eta, gap, residual, 0, "exact+slack")
        else:
            z = set_.project(t, x)
            cert = ProjectionCertificate(eps, eta, 0.0, 0.0, 0, "exact")
        return z, cert

    if isinstance(set_, MetricPolyhedronRef):
        kwargs = {}
        if max_iters is not None:
            kwargs["max_iters"] = max_iters
        if lam0 is not None:
            kwargs["lam0"] = lam0
        try:
            return set_.provider.eps_eta_project(t, x, eps, eta, **kwargs)
        except BudgetExhausted as exc:
            raise CertificateFailure(
                f"dual projected-gradient budget exhausted: {exc}",
                certificate=exc.certificate,
            ) from exc

    if isinstance(set_, CustomSet):
        z = as_point(set_.project_fn(t, x, eps, eta))
        lo_x, _ = set_.distance_bounds_fn(t, x)
        _, hi_z = set_.distance_bounds_fn(t, z)
        gap = float(np.linalg.norm(x - z) ** 2) - float(lo_x) ** 2
        cert = ProjectionCertificate(eps, eta, gap, float(hi_z), 0, "custom")
        if not cert.is_valid:
            raise CertificateFailure(
                "custom provider returned a point that fails re-validation "
                f"(gap={gap:.3e} vs eps={eps:.3e}, residual={hi_z:.3e} vs eta={eta:.3e})",
                certificate=cert,
            )
        return z, cert

    raise UnsupportedKind(f"unsupported set kind {type(set_).__name__}")
