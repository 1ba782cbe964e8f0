"""The two field representations and a closed-form point-dipole oracle.

Both evaluators integrate over the same quadrature rule and return the
electric field as a sum of named terms:

* ``zone_field`` -- three integrals with explicit 1/R^3, 1/R^2, 1/R kernels
  ("near", "intermediate", "far").  The innermost time integral of the
  current uses the source's analytic primitive, never nested quadrature.
* ``jefimenko_field`` -- retarded current and charge form ("current",
  "charge").  The outer time derivative is commuted through the spatial
  integral onto the current, which is exact because time enters only via
  the retarded time and the domain is fixed; a finite-difference mode of
  the uncommuted form is kept for validating that step.

The two agree up to boundary terms that vanish when the current dies off
fast enough at the domain boundary; ``representation_residual`` measures
the disagreement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .geometry import NATURAL, PhysicalConstants, Vec3, as_vec3
from .quadrature import ConvergenceError, QuadratureRule, build_rule
from .sources import SourceModel, TimeProfile

#: Observation points must sit at least this fraction of the domain diameter
#: outside the domain; keeps every kernel smooth on the integration region.
EXTERIOR_MARGIN_FRACTION = 1e-9

#: Relative floor regularizing the residual when both fields vanish.
RESIDUAL_FLOOR = 1e-30


@dataclass(frozen=True, eq=False)
class ObservationPoint:
    x: Vec3
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", as_vec3(self.x))
        if not np.isfinite(self.t):
            raise ValueError("observation time must be finite")


@dataclass(frozen=True, eq=False)
class FieldDecomposition:
    """Electric field split into the named terms of one representation.

    ``total`` is defined as the sum of the terms in their stored order, so
    identical inputs reproduce it bit for bit.
    """

    terms: Mapping[str, np.ndarray]
    representation: str
    quadrature_error: float = float("nan")

    def __post_init__(self):
        for name, term in self.terms.items():
            if np.asarray(term).shape != (3,) or not np.all(np.isfinite(term)):
                raise ValueError(f"term {name!r} is not a finite 3-vector: {term}")

    @property
    def total(self) -> np.ndarray:
        out = np.zeros(3)
        for term in self.terms.values():
            out = out + term
        return out

    def magnitude(self) -> float:
        return float(np.linalg.norm(self.total))


def _require_exterior(src: SourceModel, obs: ObservationPoint) -> None:
    margin = EXTERIOR_MARGIN_FRACTION * src.domain.diameter()
    if src.domain.exterior_distance(obs.x) <= margin:
        raise ValueError(
            f"observation point {obs.x} is inside or touching the source domain"
        )


def _node_frame(obs: ObservationPoint, rule: QuadratureRule, c: float):
    d = obs.x - rule.nodes
    r = np.linalg.norm(d, axis=1)
    theta = d / r[:, None]
    t_ret = obs.t - r / c
    return r, theta, t_ret


def zone_field(
    src: SourceModel,
    obs: ObservationPoint,
    rule: QuadratureRule,
    constants: PhysicalConstants = NATURAL,
) -> FieldDecomposition:
    """Field as near + intermediate + far integrals (explicit radial kernels)."""
    _require_exterior(src, obs)
    c, k_c = constants.c, constants.coulomb
    r, theta, t_ret = _node_frame(obs, rule, c)
    w = rule.weights
    pol = src.polarization

    g = src.amplitude * np.asarray(src.envelope.value(rule.nodes))
    g_prim = g * np.asarray(src.profile.primitive(t_ret))
    g_val = g * np.asarray(src.profile.value(t_ret))
    g_rate = g * np.asarray(src.profile.derivative(t_ret))
    theta_pol = theta @ pol

    # (delta - 3 theta theta^T) @ v  ==  v - 3 theta (theta . v)
    near = -k_c * (
        pol * np.sum(w * g_prim / r**3) - 3.0 * (theta.T @ (w * g_prim * theta_pol / r**3))
    )
    intermediate = -(k_c / c) * (
        pol * np.sum(w * g_val / r**2) - 3.0 * (theta.T @ (w * g_val * theta_pol / r**2))
    )
    far = (k_c / c**2) * (
        theta.T @ (w * g_rate * theta_pol / r) - pol * np.sum(w * g_rate / r)
    )
    return FieldDecomposition(
        terms={"near": near, "intermediate": intermediate, "far": far},
        representation="zones",
    )


def jefimenko_field(
    src: SourceModel,
    obs: ObservationPoint,
    rule: QuadratureRule,
    constants: PhysicalConstants = NATURAL,
    dt_mode: str = "analytic",
    fd_step: float | None = None,
) -> FieldDecomposition:
    """Field from retarded current and charge densities.

    ``dt_mode="finite-difference"`` differentiates the assembled current
    integral in t with a central step ``fd_step`` instead of using the
    commuted analytic derivative; it exists to validate the commutation.
    """
    _require_exterior(src, obs)
    c, k_c = constants.c, constants.coulomb
    r, _, t_ret = _node_frame(obs, rule, c)
    w = rule.weights
    pol = src.polarization
    g = src.amplitude * np.asarray(src.envelope.value(rule.nodes))

    if dt_mode == "analytic":
        g_rate = g * np.asarray(src.profile.derivative(t_ret))
        current = -(k_c / c**2) * pol * np.sum(w * g_rate / r)
    elif dt_mode == "finite-difference":
        if fd_step is None or not fd_step > 0.0:
            raise ValueError("finite-difference mode requires a positive fd_step")
        hi = np.sum(w * g * np.asarray(src.profile.value(t_ret + fd_step)) / r)
        lo = np.sum(w * g * np.asarray(src.profile.value(t_ret - fd_step)) / r)
        current = -(k_c / c**2) * pol * (hi - lo) / (2.0 * fd_step)
    else:
        raise ValueError(f"unknown dt_mode {dt_mode!r}")

    grad_rho = src.charge_gradient(rule.nodes, t_ret)
    charge = -k_c * (grad_rho.T @ (w / r))
    return FieldDecomposition(
        terms={"current": current, "charge": charge},
        representation="jefimenko",
    )


#: Evaluator registry keyed by representation tag.
EVALUATORS = {"zones": zone_field, "jefimenko": jefimenko_field}


@dataclass(frozen=True, eq=False)
class PointDipole:
    """Point dipole moment p(t) = moment_scale * F(t) * direction at a position.

    ``from_source`` collapses a separable source to its equivalent dipole:
    the moment scale is amplitude times the envelope's spatial integral,
    which is exactly the first moment of the reconstructed charge density.
    """

    position: Vec3
    direction: Vec3
    moment_scale: float
    profile: TimeProfile

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        object.__setattr__(self, "direction", as_vec3(self.direction))
        norm = np.linalg.norm(self.direction)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"dipole direction must be a unit vector, |d| = {norm}")

    @classmethod
    def from_source(cls, src: SourceModel) -> "PointDipole":
        return cls(
            position=src.envelope.center,
            direction=src.polarization,
            moment_scale=src.amplitude * src.envelope.integral(),
            profile=src.profile,
        )

    def moment(self, t) -> np.ndarray:
        return self.moment_scale * np.asarray(self.profile.primitive(t))[..., None] * self.direction

    def moment_rate(self, t) -> np.ndarray:
        return self.moment_scale * np.asarray(self.profile.value(t))[..., None] * self.direction

    def moment_accel(self, t) -> np.ndarray:
        return self.moment_scale * np.asarray(self.profile.derivative(t))[..., None] * self.direction


def dipole_oracle_field(
    dipole: PointDipole,
    obs: ObservationPoint,
    constants: PhysicalConstants = NATURAL,
) -> FieldDecomposition:
    """Closed-form field of an ideal point dipole, split by radial falloff."""
    c, k_c = constants.c, constants.coulomb
    d = obs.x - dipole.position
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise ValueError("observation point coincides with the dipole position")
    n = d / r
    t_ret = obs.t - r / c
    p = dipole.moment(t_ret)
    p_rate = dipole.moment_rate(t_ret)
    p_accel = dipole.moment_accel(t_ret)

    near = k_c * (3.0 * n * (n @ p) - p) / r**3
    intermediate = k_c * (3.0 * n * (n @ p_rate) - p_rate) / (c * r**2)
    far = k_c * (n * (n @ p_accel) - p_accel) / (c**2 * r)
    return FieldDecomposition(
        terms={"near": near, "intermediate": intermediate, "far": far},
        representation="dipole-oracle",
    )


def representation_residual(
    src: SourceModel,
    obs: ObservationPoint,
    rule: QuadratureRule,
    constants: PhysicalConstants = NATURAL,
) -> float:
    """Normalized disagreement between the two representations at one point.

    Zero when both fields are exactly zero (ahead of the light front).
    """
    e_zone = zone_field(src, obs, rule, constants).total
    e_jef = jefimenko_field(src, obs, rule, constants).total
    scale = max(
        float(np.linalg.norm(e_zone)), float(np.linalg.norm(e_jef)), RESIDUAL_FLOOR
    )
    return float(np.linalg.norm(e_zone - e_jef)) / scale


def refined_field(
    representation: str,
    src: SourceModel,
    obs: ObservationPoint,
    constants: PhysicalConstants = NATURAL,
    base_order: int = 12,
    max_order: int = 24,
    tol: float = 1e-10,
    rule_cache: dict | None = None,
) -> FieldDecomposition:
    """Evaluate one representation on an order-refinement ladder.

    Climbs orders base, base+2, ... until the total changes by at most
    ``tol`` (max norm) or the ladder tops out; the achieved change is
    attached as the decomposition's quadrature error.  A ladder whose
    error grows three levels in a row raises ConvergenceError.
    """
    try:
        evaluate = EVALUATORS[representation]
    except KeyError:
        raise ValueError(
            f"unknown representation {representation!r}; expected one of {sorted(EVALUATORS)}"
        ) from None
    if base_order >= max_order:
        raise ValueError("base order must be below max order")

    previous = None
    err = np.inf
    strikes = 0
    history = []
    decomposition = None
    for order in range(base_order, max_order + 1, 2):
        if rule_cache is not None:
            rule = rule_cache.get(order)
            if rule is None:
                rule = rule_cache[order] = build_rule(src.domain, order)
        else:
            rule = build_rule(src.domain, order)
        decomposition = evaluate(src, obs, rule, constants)
        total = decomposition.total
        if previous is not None:
            new_err = float(np.max(np.abs(total - previous)))
            history.append(new_err)
            strikes = strikes + 1 if new_err >= err else 0
            err = new_err
            if err <= tol:
                break
            if strikes >= 3:
                raise ConvergenceError(
                    f"field refinement stalled above tol={tol}: errors {history}"
                )
        previous = total
    return FieldDecomposition(
        terms=decomposition.terms,
        representation=decomposition.representation,
        quadrature_error=float(err),
    )
