"""Phase-covariant qubit dynamics: closed forms, backflow, divisibility.

A phase-covariant master equation with gain, damping and dephasing rates
(gamma_plus, gamma_minus, gamma_z) is solved in closed form by

    G(t)       = exp(-1/4 int_0^t (gamma_plus + gamma_minus)),
    H(t)       = int_0^t G(t,s)^2 gamma_plus(s) ds,
    Gamma_z(t) = exp(-int_0^t gamma_z),

with the rotating term fixed to one (it commutes with everything used
here).  The Choi operator in the computational basis, the closed-form
signalling and exclusion powers, the rate-space condition for no
information backflow, and the kappa-model divisibility thresholds all
derive from these three functions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import GridTooCoarse, QuadratureFailure
from .wires import LabeledOperator, Wire

__all__ = [
    "RateModel",
    "DynamicsPoint",
    "constant_rates",
    "eternal_nm_rate",
    "eternal_nm_model",
    "kappa_model",
    "evolve",
    "closed_form_s",
    "closed_form_p",
    "backflow_condition",
    "DynamicsScan",
    "scan_dynamics",
    "ThresholdReport",
    "divisibility_thresholds",
    "write_scan_csv",
]

CHOI_WIRES = (Wire("A", 2), Wire("B", 2))


@dataclass(frozen=True)
class RateModel:
    """Time-dependent decay rates of a phase-covariant master equation."""

    gamma_plus: Callable[[np.ndarray], np.ndarray]
    gamma_minus: Callable[[np.ndarray], np.ndarray]
    gamma_z: Callable[[np.ndarray], np.ndarray]
    omega: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def gamma(self, t):
        return self.gamma_plus(t) + self.gamma_minus(t)


def constant_rates(
    gamma_plus: float = 0.0,
    gamma_minus: float = 0.0,
    gamma_z: float = 0.0,
    omega: float = 0.0,
) -> RateModel:
    return RateModel(
        gamma_plus=lambda t: gamma_plus * np.ones_like(np.asarray(t, dtype=float)),
        gamma_minus=lambda t: gamma_minus * np.ones_like(np.asarray(t, dtype=float)),
        gamma_z=lambda t: gamma_z * np.ones_like(np.asarray(t, dtype=float)),
        omega=lambda t: omega * np.ones_like(np.asarray(t, dtype=float)),
        name="constant",
        params={
            "gamma_plus": gamma_plus,
            "gamma_minus": gamma_minus,
            "gamma_z": gamma_z,
            "omega": omega,
        },
    )


def eternal_nm_rate(gamma: float, t) -> np.ndarray:
    """Dephasing rate -gamma/4 tanh(gamma t / 4).

    The unique rate keeping the backflow condition saturated at all times
    for constant total damping; it solves 16 dgz/dt + gamma^2 - 16 gz^2 = 0
    with gz(0) = 0.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return -(gamma / 4.0) * np.tanh(gamma * np.asarray(t, dtype=float) / 4.0)


def eternal_nm_model(gamma: float = 1.0) -> RateModel:
    """Constant damping split evenly, dephasing always negative."""
    half = gamma / 2.0
    return RateModel(
        gamma_plus=lambda t: half * np.ones_like(np.asarray(t, dtype=float)),
        gamma_minus=lambda t: half * np.ones_like(np.asarray(t, dtype=float)),
        gamma_z=lambda t: eternal_nm_rate(gamma, t),
        omega=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        name="eternal_nm",
        params={"gamma": gamma},
    )


def kappa_model(kappa: float) -> RateModel:
    """Decaying gain and damping with an oscillating dephasing of strength kappa."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    return RateModel(
        gamma_plus=lambda t: np.exp(-np.asarray(t, dtype=float) / 2.0),
        gamma_minus=lambda t: np.exp(-np.asarray(t, dtype=float) / 4.0),
        gamma_z=lambda t: (kappa / 2.0)
        * np.exp(-3.0 * np.asarray(t, dtype=float) / 8.0)
        * np.cos(2.0 * np.asarray(t, dtype=float)),
        omega=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        name="kappa",
        params={"kappa": kappa},
    )


# ---------------------------------------------------------------------------
# pointwise evolution via adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

def _quad(f, a: float, b: float, tol: float) -> float:
    if b == a:
        return 0.0
    val, err = quad(f, a, b, epsabs=tol, epsrel=max(tol, 1e-12), limit=500)
    if err > 50 * max(tol, abs(val) * 1e-9):
        raise QuadratureFailure(
            f"integral on [{a}, {b}] reached error {err:.2e} (tol {tol:.2e})"
        )
    return val


@dataclass(frozen=True)
class DynamicsPoint:
    t: float
    G: float
    H: float
    Gamma_z: float
    choi: LabeledOperator
    s_closed: float
    p_closed: float
    physical: bool


def _choi_matrix(g: float, h: float, gz: float) -> np.ndarray:
    coh = g * gz
    return np.array(
        [
            [1.0 - h, 0.0, 0.0, coh],
            [0.0, h, 0.0, 0.0],
            [0.0, 0.0, 1.0 - g * g - h, 0.0],
            [coh, 0.0, 0.0, g * g + h],
        ],
        dtype=np.complex128,
    )


def evolve(model: RateModel, t: float, quad_tol: float = 1e-10) -> DynamicsPoint:
    """Closed-form dynamics functions and the Choi operator at time t.

    H uses the factored identity H = G(t)^2 int_0^t G(s)^(-2) gamma_plus(s) ds;
    when the exponent would overflow it falls back to the direct double
    integral, which keeps every exponent nonpositive.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    ig = _quad(lambda s: float(model.gamma(s)), 0.0, t, quad_tol)
    igz = _quad(lambda s: float(model.gamma_z(s)), 0.0, t, quad_tol)
    g = float(np.exp(-ig / 4.0))
    gz = float(np.exp(-igz))

    def ig_at(s: float) -> float:
        return _quad(lambda u: float(model.gamma(u)), 0.0, s, quad_tol)

    if ig / 2.0 < 600.0:
        h = g * g * _quad(
            lambda s: np.exp(ig_at(s) / 2.0) * float(model.gamma_plus(s)),
            0.0,
            t,
            quad_tol,
        )
    else:  # overflow guard: exponents stay <= 0 in the double integral
        h = _quad(
            lambda s: np.exp(-(ig - ig_at(s)) / 2.0) * float(model.gamma_plus(s)),
            0.0,
            t,
            quad_tol,
        )

    choi = LabeledOperator(CHOI_WIRES, _choi_matrix(g, h, gz))
    min_eig = float(np.linalg.eigvalsh(choi.hermitize().data)[0])
    point = DynamicsPoint(
        t=float(t),
        G=g,
        H=h,
        Gamma_z=gz,
        choi=choi,
        s_closed=float(np.log2(1.0 + g * g + 2.0 * g * gz)),
        p_closed=_closed_p(g, gz),
        physical=min_eig >= -1e-9,
    )
    return point


def _closed_p(g: float, gz: float) -> float:
    alpha = gz / g
    if alpha > 1.0:
        return 2.0 * g * gz - g * g
    return g * g


def closed_form_s(point: DynamicsPoint) -> float:
    """log2(1 + G^2 + 2 G Gamma_z)."""
    return point.s_closed


def closed_form_p(point: DynamicsPoint) -> float:
    """2 G Gamma_z - G^2 when Gamma_z/G > 1, else G^2."""
    return point.p_closed


def backflow_condition(
    model: RateModel,
    t: float,
    quad_tol: float = 1e-10,
    branch: str | None = None,
) -> tuple[float, str]:
    """Left-hand side of the no-backflow condition at time t.

    lhs = gamma + 4 gamma_z +/- gamma G / Gamma_z; the minus branch applies
    where Gamma_z / G >= 1 (the exclusion-power regime; at the boundary the
    two exclusion branches coincide, so the limit from above is used) and
    the plus branch otherwise.  A negative value flags information backflow.
    A branch may be forced for derivative-sign diagnostics.
    """
    ig = _quad(lambda s: float(model.gamma(s)), 0.0, t, quad_tol)
    igz = _quad(lambda s: float(model.gamma_z(s)), 0.0, t, quad_tol)
    g_of_t = float(np.exp(-ig / 4.0))
    gz_of_t = float(np.exp(-igz))
    ratio = g_of_t / gz_of_t
    if branch is None:
        branch = "minus" if gz_of_t / g_of_t >= 1.0 else "plus"
    sign = -1.0 if branch == "minus" else 1.0
    gamma_t = float(model.gamma(t))
    lhs = gamma_t + 4.0 * float(model.gamma_z(t)) + sign * gamma_t * ratio
    return lhs, branch


# ---------------------------------------------------------------------------
# grid scans (cached cumulative integrals, vectorized)
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _cumulative_integral(f, grid: np.ndarray) -> np.ndarray:
    """Cumulative integral of f from grid[0] along the grid (5-point GL per segment)."""
    a, b = grid[:-1], grid[1:]
    mid = (a + b) / 2.0
    half = (b - a) / 2.0
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    seg = half * (vals @ _GL_WEIGHTS)
    return np.concatenate([[0.0], np.cumsum(seg)])


@dataclass(frozen=True)
class DynamicsScan:
    t: np.ndarray
    G: np.ndarray
    H: np.ndarray
    Gamma_z: np.ndarray
    s_bits: np.ndarray
    p_value: np.ndarray
    backflow_lhs: np.ndarray
    branch: np.ndarray  # "plus" / "minus" per point


def scan_dynamics(model: RateModel, t_grid: Sequence[float]) -> DynamicsScan:
    """Vectorized closed-form dynamics over a sorted time grid.

    Rate integrals use composite Gauss-Legendre on the grid segments; the
    population offset H solves its equivalent linear ODE with tight
    tolerances.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0) or t[0] != 0.0:
        raise ValueError("t_grid must be a strictly increasing grid starting at 0")
    ig = _cumulative_integral(model.gamma, t)
    igz = _cumulative_integral(model.gamma_z, t)
    g = np.exp(-ig / 4.0)
    gz = np.exp(-igz)

    sol = solve_ivp(
        lambda s, y: [float(model.gamma_plus(s)) - 0.5 * float(model.gamma(s)) * y[0]],
        (t[0], t[-1]),
        [0.0],
        t_eval=t,
        rtol=1e-11,
        atol=1e-13,
        dense_output=False,
        method="DOP853",
    )
    if not sol.success:
        raise QuadratureFailure(f"H integration failed: {sol.message}")
    h = sol.y[0]

    gamma_t = np.asarray(model.gamma(t), dtype=float)
    gz_t = np.asarray(model.gamma_z(t), dtype=float)
    minus = gz / g >= 1.0
    lhs = gamma_t + 4.0 * gz_t + np.where(minus, -1.0, 1.0) * gamma_t * g / gz
    p = np.where(gz / g > 1.0, 2.0 * g * gz - g * g, g * g)
    return DynamicsScan(
        t=t,
        G=g,
        H=h,
        Gamma_z=gz,
        s_bits=np.log2(1.0 + g * g + 2.0 * g * gz),
        p_value=p,
        backflow_lhs=lhs,
        branch=np.where(minus, "minus", "plus"),
    )


def write_scan_csv(scan: DynamicsScan, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "G", "H", "Gamma_z", "s_bits", "p_value", "backflow_lhs"])
        for row in zip(
            scan.t, scan.G, scan.H, scan.Gamma_z, scan.s_bits, scan.p_value,
            scan.backflow_lhs,
        ):
            writer.writerow([f"{x:.9g}" for x in row])


# ---------------------------------------------------------------------------
# kappa thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdReport:
    cp: float
    p_div: float
    td: float
    sp: float
    kappa_range: tuple[float, float]
    t_max: float
    tol: float

    def to_json_dict(self) -> dict:
        return {
            "cp": self.cp,
            "p_div": self.p_div,
            "td": self.td,
            "sp": self.sp,
            "kappa_range": list(self.kappa_range),
            "t_max": self.t_max,
            "tol": self.tol,
        }


def _criterion_values(
    model: RateModel, t: np.ndarray, criterion: str
) -> np.ndarray:
    """Criterion function whose negativity signals the divisibility break."""
    gp = np.asarray(model.gamma_plus(t), dtype=float)
    gm = np.asarray(model.gamma_minus(t), dtype=float)
    gz = np.asarray(model.gamma_z(t), dtype=float)
    if criterion == "cp":
        return np.minimum(np.minimum(gp, gm), gz)
    if criterion == "p_div":
        return np.sqrt(np.maximum(gp * gm, 0.0)) + 2.0 * gz
    if criterion == "td":
        return gp + gm + 4.0 * gz
    if criterion == "sp":
        ig = _cumulative_integral(model.gamma, t)
        igz = _cumulative_integral(model.gamma_z, t)
        g = np.exp(-ig / 4.0)
        gzf = np.exp(-igz)
        minus = gzf / g >= 1.0
        return gp + gm + 4.0 * gz + np.where(minus, -1.0, 1.0) * (gp + gm) * g / gzf
    raise ValueError(f"unknown criterion {criterion!r}")


def _violates(
    model_factory: Callable[[float], RateModel],
    kappa: float,
    t: np.ndarray,
    criterion: str,
    refine: int,
) -> bool:
    model = model_factory(kappa)
    values = _criterion_values(model, t, criterion)
    if np.any(values < 0.0):
        return True
    if refine <= 1:
        return False
    # refine around local minima; shallow dips can hide between grid points
    interior = np.where(
        (values[1:-1] <= values[:-2]) & (values[1:-1] <= values[2:])
    )[0] + 1
    if interior.size == 0:
        return False
    order = np.argsort(values[interior])
    for idx in interior[order[:12]]:
        lo, hi = t[max(idx - 1, 0)], t[min(idx + 1, t.size - 1)]
        # keep the base grid up to the dip so cumulative integrals stay accurate
        local = np.unique(
            np.concatenate([t[t <= lo], np.linspace(lo, hi, 2 * refine + 1)])
        )
        if np.any(_criterion_values(model, local, criterion)[1:] < 0.0):
            return True
    return False


def divisibility_thresholds(
    kappa_range: tuple[float, float] = (0.0, 2.0),
    t_max: float = 20.0,
    tol: float = 1e-5,
    grid_points: int = 2000,
    refine: int = 10,
    model_factory: Callable[[float], RateModel] = kappa_model,
) -> ThresholdReport:
    """Minimal parameter at which each divisibility criterion breaks.

    Criteria: cp (any rate negative), p_div (sqrt(gp gm) + 2 gz < 0), td
    (gp + gm + 4 gz < 0) and sp (the backflow condition left-hand side
    negative).  Each threshold is found by bisection over the parameter on
    an adaptively refined time grid.
    """
    lo0, hi0 = kappa_range
    if hi0 <= lo0:
        raise ValueError("kappa_range must be increasing")
    t = np.linspace(0.0, t_max, grid_points + 1)
    results = {}
    for criterion in ("cp", "p_div", "td", "sp"):
        lo, hi = lo0, hi0
        if _violates(model_factory, lo, t, criterion, refine):
            results[criterion] = lo
            continue
        if not _violates(model_factory, hi, t, criterion, refine):
            raise GridTooCoarse(
                f"criterion {criterion!r} is never violated up to kappa {hi}; "
                "enlarge kappa_range or refine the grid"
            )
        while hi - lo > tol:
            mid = (lo + hi) / 2.0
            if _violates(model_factory, mid, t, criterion, refine):
                hi = mid
            else:
                lo = mid
        results[criterion] = (lo + hi) / 2.0
    return ThresholdReport(
        cp=results["cp"],
        p_div=results["p_div"],
        td=results["td"],
        sp=results["sp"],
        kappa_range=(lo0, hi0),
        t_max=t_max,
        tol=tol,
    )


def write_threshold_json(report: ThresholdReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
