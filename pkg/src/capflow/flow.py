"""Explicit time stepping for the contact-angle Gauss curvature flows.

The support function h on the direction cap evolves by

* unnormalized:  dh/dt = -ell * K^alpha,
* normalized:    dh/dt =  h - c(t) * ell * K^alpha,

where K is the Gauss curvature (reciprocal of the product of principal radii)
and c(t) = (n+1) V_ref / quad(K^(alpha-1) ell) equals 1 identically for
alpha = 1.  V_ref is the quadrature-consistent unit-cap volume
quad(ell)/(n+1), so the alpha = 1 identity holds to roundoff.

Scheme: forward Euler at interior nodes with a curvature-aware step
dt = dt_safety * dx^2 * min(lambda_min / (ell K^alpha)) / max(1, alpha),
followed by an exact reconstruction of the edge values from the discrete
boundary conditions.  The edge values are never evolved by the PDE.

Two neutral-to-unstable modes of the normalized flow need active control:

* the volume mode grows like e^((n+1)t), so each step rescales the body back
  to V_ref (a pure scaling, logged through ``max_volume_correction``);
* horizontal translations grow like e^t, so runs may periodically re-center
  the body on its entropy point (``recenter_period``; every translation is
  logged).

Unnormalized runs stop when the capillary support drops below ``stop_u_min``
and report the extinction time from the volume law: exactly linear decay for
alpha = 1, and a two-point extrapolation of vol^((alpha n + 1)/(n + 1))
(which decays linearly on shrinking caps) otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .body import CapillaryBody, volume as body_volume
from .convex import entropy_point
from .errors import ConvexityLost, CurvatureBlowup
from .grid import (CapGrid, GridMode, ScalarField, deriv1, deriv2,
                   enforce_boundary, reference_cap_volume)

try:  # JIT of the inner stepping loop; plain Python otherwise
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap

BLOWUP_FACTOR = 1.0e6

# _advance_chunk status codes
_CONTINUE, _CONVERGED, _EXTINCT, _TIMED_OUT, _LOST_CONVEXITY, _BLOWUP = range(6)


@dataclass(frozen=True)
class FlowConfig:
    alpha: float = 1.0
    normalized: bool = False
    dt_safety: float = 0.2
    dt_cap: float = 1.0e-3
    t_max: float = math.inf
    stop_u_min: float | None = None    # default resolves to 1e-2 * max u(0)
    stop_rate: float = 1.0e-6
    recenter_period: int | None = None
    trace_stride: int = 500

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if not (0.0 < self.dt_safety <= 0.5):
            raise ValueError("dt_safety must lie in (0, 0.5]")
        if self.dt_cap <= 0.0 or self.trace_stride < 1:
            raise ValueError("dt_cap must be positive, trace_stride >= 1")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "normalized": self.normalized,
            "dt_safety": self.dt_safety,
            "dt_cap": self.dt_cap,
            "t_max": self.t_max,
            "stop_u_min": self.stop_u_min,
            "stop_rate": self.stop_rate,
            "recenter_period": self.recenter_period,
            "trace_stride": self.trace_stride,
        }


@dataclass(frozen=True)
class FlowState:
    body: CapillaryBody
    t: float
    step_index: int
    dt_last: float


@dataclass(frozen=True)
class TraceRecord:
    t: float
    dt: float
    volume: float
    entropy_value: float
    entropy_point: tuple
    k_min: float
    k_max: float
    lambda_min: float
    lambda_max: float
    u_min: float
    u_max: float
    phi_max: float
    res_sup: float
    res_l2: float
    norm_coeff: float


@dataclass(frozen=True)
class Outcome:
    kind: str                     # extinct | converged | timed_out | aborted
    t_est: float | None = None
    residual: float | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t_est": self.t_est,
                "residual": self.residual, "reason": self.reason}


@dataclass
class RunResult:
    final_state: FlowState
    traces: list[TraceRecord]
    outcome: Outcome
    recenterings: list[tuple[float, float]] = field(default_factory=list)
    max_volume_correction: float = 0.0


class _Ctx:
    """Loop constants derived from (grid, config)."""

    def __init__(self, grid: CapGrid, config: FlowConfig):
        self.grid = grid
        self.config = config
        self.n = grid.n
        self.axi = grid.mode is GridMode.AXISYMMETRIC
        self.dx = grid.dx
        self.dx2 = grid.dx ** 2
        self.ell = grid.ell
        self.w = grid.quad_weights
        self.cot_nodes = grid.cot_nodes
        self.xi1 = grid.xi_horizontal
        self.v_ref = reference_cap_volume(grid)
        omega = grid.quad(grid.ell)
        # alpha = 1 normalization is the exact quadrature identity
        assert abs(omega - (self.n + 1) * self.v_ref) <= 1.0e-8 * omega
        self.alpha = config.alpha
        self.alpha_div = max(1.0, config.alpha)
        self.sup_ell = float(np.max(grid.ell))


def _geometry(ctx: _Ctx, h: np.ndarray):
    """(lam_r, lam_t, det, lam_min_nodes); raises on lost convexity."""
    lam_r = deriv2(h, ctx.dx) + h
    if ctx.axi:
        d1 = deriv1(h, ctx.dx, pole_zero=True)
        lam_t = np.empty_like(h)
        lam_t[1:] = ctx.cot_nodes[1:] * d1[1:] + h[1:]
        lam_t[0] = lam_r[0]
        lam_min_nodes = np.minimum(lam_r, lam_t)
        det = lam_r * lam_t ** (ctx.n - 1)
    else:
        lam_t = lam_r
        lam_min_nodes = lam_r
        det = lam_r
    lmin = float(lam_min_nodes.min())
    if lmin <= 0.0:
        worst = int(np.argmin(lam_min_nodes))
        raise ConvexityLost(
            f"principal radius {lmin:.6g} <= 0 at node {worst}",
            node_index=worst, value=lmin)
    return lam_r, lam_t, det, lam_min_nodes


def rhs(state: FlowState, config: FlowConfig) -> ScalarField:
    """Time derivative of the support samples (edge values are not evolved)."""
    ctx = _Ctx(state.body.grid, config)
    h = state.body.support.copy()
    _, _, det, _ = _geometry(ctx, h)
    K = 1.0 / det
    value, _ = _rhs_arrays(ctx, h, K, k_limit=math.inf)
    return ScalarField(state.body.grid, value)


def _rhs_arrays(ctx: _Ctx, h: np.ndarray, K: np.ndarray, k_limit: float):
    kmax = float(K.max())
    if kmax > k_limit:
        raise CurvatureBlowup(
            f"max curvature {kmax:.6g} exceeded guard {k_limit:.6g}")
    Ka = K if ctx.alpha == 1.0 else K ** ctx.alpha
    if ctx.config.normalized:
        if ctx.alpha == 1.0:
            c = 1.0
        else:
            c = (ctx.n + 1) * ctx.v_ref / float(
                np.dot(ctx.w, K ** (ctx.alpha - 1.0) * ctx.ell))
        return h - c * ctx.ell * Ka, c
    return -ctx.ell * Ka, 1.0


def adaptive_dt(state: FlowState, config: FlowConfig) -> float:
    ctx = _Ctx(state.body.grid, config)
    h = state.body.support
    lam_r, lam_t, det, lam_min_nodes = _geometry(ctx, h)
    K = 1.0 / det
    return _dt_from_geometry(ctx, lam_min_nodes, K)


def _dt_from_geometry(ctx: _Ctx, lam_min_nodes: np.ndarray,
                      K: np.ndarray) -> float:
    Ka = K if ctx.alpha == 1.0 else K ** ctx.alpha
    ratio = float(np.min(lam_min_nodes / (ctx.ell * Ka)))
    dt = ctx.config.dt_safety * ctx.dx2 * ratio / ctx.alpha_div
    dt = min(dt, ctx.config.dt_cap)
    if ctx.config.normalized:
        dt = min(dt, ctx.config.dt_safety)
    return dt


@njit(cache=True)
def _advance_chunk(h, ell, cot_nodes, w, dx, n, axi, alpha, normalized,
                   dt_safety, dt_cap, v_ref, k_limit, stop_u_min, stop_rate,
                   t, t_max, max_steps, denom_robin):
    """Advance up to max_steps explicit steps in place.

    Evaluates the stop conditions on the pre-step state each iteration, so on
    a non-zero status the arrays hold the state at the reported time.  Same
    scheme as :func:`step`; kept in raw-array form so it can be jitted.
    """
    dx2 = dx * dx
    inv_np1 = 1.0 / (n + 1.0)
    alpha_div = alpha if alpha > 1.0 else 1.0
    N = h.size
    steps = 0
    dt_last = 0.0
    prev_t = t
    prev_vol = -1.0
    max_corr = 0.0
    rate = math.inf
    c = 1.0
    vol = 0.0
    umin = 0.0
    while True:
        lam_r = np.empty(N)
        lam_r[1:-1] = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / dx2 + h[1:-1]
        lam_r[0] = (2.0 * h[0] - 5.0 * h[1] + 4.0 * h[2] - h[3]) / dx2 + h[0]
        lam_r[-1] = (2.0 * h[-1] - 5.0 * h[-2] + 4.0 * h[-3]
                     - h[-4]) / dx2 + h[-1]
        if axi:
            d1 = np.empty(N)
            d1[1:-1] = (h[2:] - h[:-2]) / (2.0 * dx)
            d1[-1] = (3.0 * h[-1] - 4.0 * h[-2] + h[-3]) / (2.0 * dx)
            lam_t = np.empty(N)
            lam_t[1:] = cot_nodes[1:] * d1[1:] + h[1:]
            lam_t[0] = lam_r[0]
            lam_min_nodes = np.minimum(lam_r, lam_t)
            det = lam_r * lam_t ** (n - 1)
        else:
            lam_t = lam_r
            lam_min_nodes = lam_r
            det = lam_r
        lmin = lam_min_nodes.min()
        if lmin <= 0.0:
            return (_LOST_CONVEXITY, steps, t, dt_last, vol, umin, rate, c,
                    prev_t, prev_vol, max_corr, float(np.argmin(lam_min_nodes)),
                    lmin)
        vol = np.dot(w, h * det) * inv_np1
        if normalized:
            s = (v_ref / vol) ** inv_np1
            if s != 1.0:
                h *= s
                lam_r *= s  # FULL1D: det and lam_min_nodes alias lam_r
                if axi:
                    lam_t *= s
                    det *= s ** n
                    lam_min_nodes = lam_min_nodes * s
                corr = abs(s - 1.0)
                if corr > max_corr:
                    max_corr = corr
                vol = v_ref
        K = 1.0 / det
        kmax = K.max()
        if kmax > k_limit:
            return (_BLOWUP, steps, t, dt_last, vol, umin, rate, c,
                    prev_t, prev_vol, max_corr, 0.0, kmax)
        umin = (h / ell).min()
        Ka = K if alpha == 1.0 else K ** alpha
        if normalized:
            if alpha == 1.0:
                c = 1.0
            else:
                c = (n + 1.0) * v_ref / np.dot(w, K ** (alpha - 1.0) * ell)
            rhs_vals = h - c * ell * Ka
            rate = np.max(np.abs(rhs_vals[1:-1])) / np.max(np.abs(h))
            if umin <= 0.0:
                return (_LOST_CONVEXITY, steps, t, dt_last, vol, umin, rate,
                        c, prev_t, prev_vol, max_corr, -1.0, umin)
            if rate < stop_rate:
                return (_CONVERGED, steps, t, dt_last, vol, umin, rate, c,
                        prev_t, prev_vol, max_corr, 0.0, 0.0)
        else:
            rhs_vals = -ell * Ka
            rate = np.max(np.abs(rhs_vals[1:-1])) / np.max(np.abs(h))
            if umin < stop_u_min:
                return (_EXTINCT, steps, t, dt_last, vol, umin, rate, c,
                        prev_t, prev_vol, max_corr, 0.0, 0.0)
        if t >= t_max - 1.0e-14:
            return (_TIMED_OUT, steps, t, dt_last, vol, umin, rate, c,
                    prev_t, prev_vol, max_corr, 0.0, 0.0)
        if steps >= max_steps:
            return (_CONTINUE, steps, t, dt_last, vol, umin, rate, c,
                    prev_t, prev_vol, max_corr, 0.0, 0.0)
        ratio = (lam_min_nodes / (ell * Ka)).min()
        dt = dt_safety * dx2 * ratio / alpha_div
        if dt > dt_cap:
            dt = dt_cap
        if normalized and dt > dt_safety:
            dt = dt_safety
        if dt > t_max - t:
            dt = t_max - t
        h[1:-1] += dt * rhs_vals[1:-1]
        h[-1] = (4.0 * h[-2] - h[-3]) / denom_robin
        if axi:
            h[0] = (4.0 * h[1] - h[2]) / 3.0
        else:
            h[0] = (4.0 * h[1] - h[2]) / denom_robin
        prev_t = t
        prev_vol = vol
        t += dt
        dt_last = dt
        steps += 1


def step(state: FlowState, config: FlowConfig) -> FlowState:
    """One explicit step: interior Euler update, then exact edge
    reconstruction from the discrete boundary conditions."""
    ctx = _Ctx(state.body.grid, config)
    h = state.body.support.copy()
    lam_r, lam_t, det, lam_min_nodes = _geometry(ctx, h)
    K = 1.0 / det
    k_limit = BLOWUP_FACTOR * float(K.max())
    rhs_vals, _ = _rhs_arrays(ctx, h, K, k_limit)
    dt = _dt_from_geometry(ctx, lam_min_nodes, K)
    dt = min(dt, config.t_max - state.t) if config.t_max > state.t else dt
    h[1:-1] += dt * rhs_vals[1:-1]
    enforce_boundary(ctx.grid, h)
    _geometry(ctx, h)  # re-check convexity
    body = CapillaryBody(ctx.grid, ScalarField(ctx.grid, h))
    return FlowState(body=body, t=state.t + dt,
                     step_index=state.step_index + 1, dt_last=dt)


def _soliton_residual_arrays(ctx: _Ctx, h: np.ndarray, det: np.ndarray):
    G = h * det ** ctx.alpha - ctx.ell
    sup = float(np.max(np.abs(G))) / ctx.sup_ell
    l2 = math.sqrt(float(np.dot(ctx.w, G * G))) / ctx.sup_ell
    return sup, l2


def _make_trace(ctx: _Ctx, h: np.ndarray, t: float, dt: float,
                lam_r, lam_t, det, vol: float, umin: float, umax: float,
                c: float) -> TraceRecord:
    grid = ctx.grid
    body = CapillaryBody(grid, ScalarField(grid, h.copy()))
    ze, evalue = entropy_point(body)
    ze_t = tuple(float(v) for v in np.atleast_1d(ze))
    K = 1.0 / det
    phi = lam_r + (ctx.n - 1) * lam_t
    res_sup, res_l2 = _soliton_residual_arrays(ctx, h, det)
    lam_all_min = float(min(lam_r.min(), lam_t.min()))
    lam_all_max = float(max(lam_r.max(), lam_t.max()))
    return TraceRecord(
        t=t, dt=dt, volume=vol, entropy_value=evalue, entropy_point=ze_t,
        k_min=float(K.min()), k_max=float(K.max()),
        lambda_min=lam_all_min, lambda_max=lam_all_max,
        u_min=umin, u_max=umax, phi_max=float(phi.max()),
        res_sup=res_sup, res_l2=res_l2, norm_coeff=c)


def _extinction_estimate(ctx: _Ctx, t: float, vol: float,
                         prev: tuple[float, float] | None) -> float:
    n, alpha = ctx.n, ctx.alpha
    if alpha == 1.0:
        return t + vol / ((n + 1) * ctx.v_ref)
    p = (alpha * n + 1.0) / (n + 1.0)
    w_now = vol ** p
    if prev is not None:
        t_prev, vol_prev = prev
        w_prev = vol_prev ** p
        if w_prev > w_now and t > t_prev:
            return t + w_now * (t - t_prev) / (w_prev - w_now)
    return t + (vol / ctx.v_ref) ** p / (alpha * n + 1.0)


def _eval_for_trace(ctx: _Ctx, h: np.ndarray):
    lam_r, lam_t, det, _ = _geometry(ctx, h)
    vol = float(np.dot(ctx.w, h * det)) / (ctx.n + 1)
    u = h / ctx.ell
    if ctx.config.normalized and ctx.alpha != 1.0:
        K = 1.0 / det
        c = (ctx.n + 1) * ctx.v_ref / float(
            np.dot(ctx.w, K ** (ctx.alpha - 1.0) * ctx.ell))
    else:
        c = 1.0
    return lam_r, lam_t, det, vol, float(u.min()), float(u.max()), c


def run(initial: CapillaryBody, config: FlowConfig) -> RunResult:
    """Advance the flow until extinction, convergence, t_max, or an abort.

    Normalized runs are first re-centered on the entropy point and rescaled
    to the reference cap volume.  The inner stepping happens in
    :func:`_advance_chunk`, chunked at trace and re-centering boundaries.
    """
    grid = initial.grid
    ctx = _Ctx(grid, config)
    h = initial.support.copy()

    recenterings: list[tuple[float, float]] = []
    traces: list[TraceRecord] = []
    t = 0.0
    step_index = 0
    dt_last = 0.0
    max_vol_corr = 0.0
    residual_rate = math.inf
    last_traced = -1
    outcome: Outcome | None = None
    denom_robin = 3.0 - 2.0 * ctx.dx * grid.cot_theta
    prev_sample: tuple[float, float] | None = None

    try:
        if config.normalized:
            if not ctx.axi:
                ze, _ = entropy_point(initial)
                h -= float(ze) * ctx.xi1
            # snap edges first: the scaling below preserves the (homogeneous)
            # edge identities, so the measured volume stays exact
            enforce_boundary(grid, h)
            _, _, det0, _ = _geometry(ctx, h)
            vol0 = float(np.dot(ctx.w, h * det0)) / (ctx.n + 1)
            h *= (ctx.v_ref / vol0) ** (1.0 / (ctx.n + 1))

        stop_u_min = config.stop_u_min
        if stop_u_min is None:
            stop_u_min = 1.0e-2 * float((h / ctx.ell).max())

        _, _, det0, _ = _geometry(ctx, h)
        k_limit = BLOWUP_FACTOR * float((1.0 / det0).max())

        while outcome is None:
            if step_index % config.trace_stride == 0 \
                    and step_index != last_traced:
                lam_r, lam_t, det, vol, umin, umax, c = _eval_for_trace(ctx, h)
                traces.append(_make_trace(ctx, h, t, dt_last, lam_r, lam_t,
                                          det, vol, umin, umax, c))
                last_traced = step_index
            chunk = config.trace_stride - step_index % config.trace_stride
            if config.recenter_period and not ctx.axi:
                chunk = min(chunk, config.recenter_period
                            - step_index % config.recenter_period)
            (status, steps, t, dt_chunk, vol, umin, rate, c,
             prev_t, prev_vol, corr, info_a, info_b) = _advance_chunk(
                h, ctx.ell, ctx.cot_nodes, ctx.w, ctx.dx, ctx.n, ctx.axi,
                ctx.alpha, config.normalized, config.dt_safety, config.dt_cap,
                ctx.v_ref, k_limit, stop_u_min, config.stop_rate, t,
                config.t_max, chunk, denom_robin)
            step_index += steps
            if steps > 0:
                dt_last = dt_chunk
                prev_sample = (prev_t, prev_vol)
            max_vol_corr = max(max_vol_corr, corr)
            residual_rate = rate
            if status == _CONTINUE:
                if (config.recenter_period and not ctx.axi and step_index > 0
                        and step_index % config.recenter_period == 0):
                    body = CapillaryBody(grid, ScalarField(grid, h.copy()))
                    ze, _ = entropy_point(body)
                    h -= float(ze) * ctx.xi1
                    enforce_boundary(grid, h)
                    if config.normalized:
                        _, _, det, _ = _geometry(ctx, h)
                        v = float(np.dot(ctx.w, h * det)) / (ctx.n + 1)
                        h *= (ctx.v_ref / v) ** (1.0 / (ctx.n + 1))
                    recenterings.append((t, float(ze)))
                continue
            if status == _CONVERGED:
                outcome = Outcome(kind="converged", residual=rate)
            elif status == _EXTINCT:
                t_est = _extinction_estimate(ctx, t, vol, prev_sample)
                outcome = Outcome(kind="extinct", t_est=t_est)
            elif status == _TIMED_OUT:
                outcome = Outcome(kind="timed_out", residual=rate)
            elif status == _LOST_CONVEXITY:
                if info_a < 0:
                    raise ConvexityLost(
                        "capillary support lost positivity (drift)",
                        value=info_b)
                raise ConvexityLost(
                    f"principal radius {info_b:.6g} <= 0 at node "
                    f"{int(info_a)}", node_index=int(info_a), value=info_b)
            else:
                raise CurvatureBlowup(
                    f"max curvature {info_b:.6g} exceeded guard "
                    f"{k_limit:.6g}")
        if step_index != last_traced:
            lam_r, lam_t, det, vol, umin, umax, c = _eval_for_trace(ctx, h)
            traces.append(_make_trace(ctx, h, t, dt_last, lam_r, lam_t, det,
                                      vol, umin, umax, c))
    except (ConvexityLost, CurvatureBlowup) as exc:
        outcome = Outcome(kind="aborted", reason=f"{type(exc).__name__}: {exc}")

    body = CapillaryBody(grid, ScalarField(grid, h))
    final = FlowState(body=body, t=t, step_index=step_index, dt_last=dt_last)
    return RunResult(final_state=final, traces=traces, outcome=outcome,
                     recenterings=recenterings,
                     max_volume_correction=max_vol_corr)


def rescale_map(body: CapillaryBody) -> tuple[float, CapillaryBody]:
    """Map an unnormalized snapshot to normalized time and shape:
    t = log(V_ref / vol)/(n+1), support scaled by e^t (volume becomes V_ref)."""
    grid = body.grid
    vol = body_volume(body)
    if vol <= 0.0:
        raise ValueError("snapshot volume must be positive")
    t = math.log(reference_cap_volume(grid) / vol) / (grid.n + 1)
    scaled = ScalarField(grid, math.exp(t) * body.support)
    return t, CapillaryBody(grid, scaled)


# ---------------------------------------------------------------------------
# Trace serialization
# ---------------------------------------------------------------------------

def trace_header(n: int) -> str:
    points = ",".join(f"entropy_point_{i + 1}" for i in range(n))
    return ("t,dt,volume,entropy," + points +
            ",k_min,k_max,lambda_min,lambda_max,u_min,u_max,phi_max,"
            "res_sup,res_l2,norm_coeff")


def write_trace_csv(path, traces: list[TraceRecord], n: int) -> None:
    from .output import fmt17
    lines = [trace_header(n)]
    for r in traces:
        vals = [r.t, r.dt, r.volume, r.entropy_value, *r.entropy_point,
                r.k_min, r.k_max, r.lambda_min, r.lambda_max,
                r.u_min, r.u_max, r.phi_max, r.res_sup, r.res_l2,
                r.norm_coeff]
        lines.append(",".join(fmt17(v) for v in vals))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
