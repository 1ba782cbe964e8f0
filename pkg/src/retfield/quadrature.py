"""Fixed-order Gauss-Legendre rules over the source domain.

Boxes get a tensor product of per-axis rules.  Balls get a spherical
product rule: Gauss-Legendre in radius, Gauss-Legendre in cos(theta) (which
absorbs the sin(theta) Jacobian exactly), and a uniform azimuthal grid.
All weights are positive and all nodes are strictly interior, so integrands
with kernels that blow up on the boundary stay finite as long as the
observation point is outside the domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import Ball, Box, Domain


class IntegrationError(RuntimeError):
    """An integrand returned a non-finite value at a quadrature node."""


class ConvergenceError(RuntimeError):
    """Order refinement stopped making progress before reaching tolerance."""


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray  # (n, 3)
    weights: np.ndarray  # (n,), positive, summing to volume(domain)
    order: int
    domain: Domain

    def __len__(self) -> int:
        return self.nodes.shape[0]


def _gauss_legendre(order: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def build_rule(domain: Domain, order: int) -> QuadratureRule:
    """Tensor rule with ``order`` points per axis (2*order azimuthal on balls)."""
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    if isinstance(domain, Box):
        axes = [_gauss_legendre(order, domain.lo[a], domain.hi[a]) for a in range(3)]
        xs = np.stack(
            np.meshgrid(axes[0][0], axes[1][0], axes[2][0], indexing="ij"), axis=-1
        ).reshape(-1, 3)
        ws = (
            axes[0][1][:, None, None] * axes[1][1][None, :, None] * axes[2][1][None, None, :]
        ).reshape(-1)
        return QuadratureRule(nodes=xs, weights=ws, order=order, domain=domain)
    if isinstance(domain, Ball):
        r, wr = _gauss_legendre(order, 0.0, domain.radius)
        mu, wmu = _gauss_legendre(order, -1.0, 1.0)
        nphi = 2 * order
        phi = 2.0 * np.pi * np.arange(nphi) / nphi
        wphi = np.full(nphi, 2.0 * np.pi / nphi)
        rg, mg, pg = np.meshgrid(r, mu, phi, indexing="ij")
        sin_t = np.sqrt(1.0 - mg**2)
        nodes = domain.center + np.stack(
            [
                rg * sin_t * np.cos(pg),
                rg * sin_t * np.sin(pg),
                rg * mg,
            ],
            axis=-1,
        ).reshape(-1, 3)
        weights = (
            (wr * r**2)[:, None, None] * wmu[None, :, None] * wphi[None, None, :]
        ).reshape(-1)
        return QuadratureRule(nodes=nodes, weights=weights, order=order, domain=domain)
    raise TypeError(f"unsupported domain type: {type(domain).__name__}")


def integrate_vector(fn, rule: QuadratureRule) -> np.ndarray:
    """Sum w_i * fn(node_i) over the rule, componentwise.

    ``fn`` maps one point (3,) to one vector (3,).  A non-finite value
    raises IntegrationError identifying the offending node.
    """
    total = np.zeros(3)
    for i, (node, w) in enumerate(zip(rule.nodes, rule.weights)):
        value = np.asarray(fn(node), dtype=float)
        if value.shape != (3,):
            raise IntegrationError(
                f"integrand returned shape {value.shape} at node {i} ({node})"
            )
        if not np.all(np.isfinite(value)):
            raise IntegrationError(
                f"integrand non-finite at node {i} ({node}): {value}"
            )
        total += w * value
    return total


def refine_estimate(
    fn,
    domain: Domain,
    base_order: int,
    max_order: int,
    tol: float = 0.0,
) -> tuple[np.ndarray, float]:
    """Integrate at orders base, base+2, ... and difference consecutive levels.

    Returns the last value together with the max-norm change from the
    previous level.  Stops early once that change drops to ``tol``, and
    raises ConvergenceError if it fails to decrease three levels in a row.
    """
    if base_order >= max_order:
        raise ValueError(
            f"base order must be below max order, got {base_order} >= {max_order}"
        )
    previous = None
    err = np.inf
    strikes = 0
    history = []
    for order in range(base_order, max_order + 1, 2):
        value = integrate_vector(fn, build_rule(domain, order))
        if previous is not None:
            new_err = float(np.max(np.abs(value - previous)))
            history.append(new_err)
            strikes = strikes + 1 if new_err >= err else 0
            err = new_err
            if err <= tol:
                return value, err
            if strikes >= 3:
                raise ConvergenceError(
                    f"refinement stalled above tol={tol}: errors {history}"
                )
        previous = value
    return previous, err
