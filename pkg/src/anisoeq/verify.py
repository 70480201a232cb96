"""
Residual verification of equilibrium states.

Each check evaluates the left-minus-right side of a governing equation at
sample points and reports it normalised by a per-equation scale: the
largest magnitude of any constituent term over the whole sample set
(floored at 1e-30). Products such as ``B x curl B`` contribute the product
of factor magnitudes ``|B| |curl B|`` so that exactly cancelling terms do
not shrink the scale to round-off.

In the default ``"fd"`` mode every derivative is a central difference of
field *values*; the analytic jacobians carried by the fields are never
consulted. ``"analytic"`` mode uses the carried derivatives instead and is
meant for fast precondition checks and for comparing the two routes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import yaml

from anisoeq.errors import EvaluationDomainError, FirehoseViolationError
from anisoeq.fields import (
    ScalarField,
    VectorField,
    _require_finite,
    curl_from_jacobian,
    default_fd_step,
    fd_apply,
    fd_gradient,
    fd_jacobian,
)
from anisoeq.sampling import SampleSet
from anisoeq.states import (
    AnisotropicState,
    FlowingIsotropicState,
    StaticIsotropicState,
    VacuumState,
)

SCALE_FLOOR = 1e-30
ORTHO_EPS = 1e-300
CHUNK = 4096


class System(str, enum.Enum):
    MHD = "MHD"
    PLASMA = "PLASMA"
    FORCE_FREE = "FORCE_FREE"
    VACUUM = "VACUUM"
    AMHD = "AMHD"
    ANISO_STATIC = "ANISO_STATIC"
    SURFACE_ORTHO = "SURFACE_ORTHO"
    PRESSURE_DIVERGENCE = "PRESSURE_DIVERGENCE"
    RESCALED_CURL = "RESCALED_CURL"
    HELPER_INVARIANT = "HELPER_INVARIANT"


@dataclass(frozen=True)
class ToleranceSpec:
    analytic_tol: float = 1e-7
    fd_tol: float = 1e-5

    def __post_init__(self):
        if not (self.analytic_tol > 0 and self.fd_tol > 0):
            raise ValueError("tolerances must be positive")

    def for_mode(self, mode: str) -> float:
        return self.fd_tol if mode == "fd" else self.analytic_tol


@dataclass(frozen=True)
class EquationResidual:
    linf: float
    rms: float
    scale: float
    worst_point: tuple

    def to_dict(self) -> dict:
        return {
            "linf": float(self.linf),
            "rms": float(self.rms),
            "scale": float(self.scale),
            "worst_point": [float(v) for v in self.worst_point],
        }


@dataclass(frozen=True)
class ResidualReport:
    system: System
    equations: dict
    sample_count: int
    fd_step: Optional[float]
    mode: str = "fd"
    label: str = ""

    @property
    def linf(self) -> float:
        return max((e.linf for e in self.equations.values()), default=0.0)

    @property
    def rms(self) -> float:
        return max((e.rms for e in self.equations.values()), default=0.0)

    def worst(self) -> tuple:
        name = max(self.equations, key=lambda k: self.equations[k].linf)
        return name, self.equations[name]

    def passed(self, tol: float) -> bool:
        return bool(self.linf <= tol)

    def to_dict(self, tol: Optional[float] = None) -> dict:
        out = {
            "system": self.system.value,
            "label": self.label,
            "mode": self.mode,
            "fd_step": None if self.fd_step is None else float(self.fd_step),
            "sample_count": int(self.sample_count),
            "linf": float(self.linf),
        }
        if tol is not None:
            out["tolerance"] = float(tol)
            out["status"] = "pass" if self.passed(tol) else "fail"
        out["equations"] = {k: v.to_dict() for k, v in self.equations.items()}
        return out

    def to_text(self, tol: Optional[float] = None) -> str:
        return yaml.safe_dump(self.to_dict(tol), sort_keys=False, default_flow_style=None)

    @classmethod
    def from_text(cls, text: str) -> "ResidualReport":
        d = yaml.safe_load(text)
        eqs = {
            k: EquationResidual(v["linf"], v["rms"], v["scale"], tuple(v["worst_point"]))
            for k, v in d["equations"].items()
        }
        return cls(System(d["system"]), eqs, d["sample_count"], d["fd_step"], d["mode"], d["label"])


@dataclass
class _Acc:
    """Mergeable running statistics for one equation (max/sum reductions only)."""

    max_res: float = 0.0
    worst: Optional[np.ndarray] = None
    sumsq: float = 0.0
    count: int = 0
    scale: float = 0.0

    def add(self, pts, res_norm, mags):
        top = np.flatnonzero(res_norm == np.max(res_norm))
        # ties go to the lexicographically smallest point, so results do not depend on order
        i = int(top[np.lexsort(pts[top].T[::-1])[0]]) if top.size > 1 else int(top[0])
        part = _Acc(float(res_norm[i]), pts[i].copy(), float(np.sum(res_norm**2)), len(res_norm),
                    float(max((np.max(m) for m in mags), default=0.0)))
        self.merge(part)

    def merge(self, other: "_Acc"):
        if other.worst is not None:
            if (
                self.worst is None
                or other.max_res > self.max_res
                or (other.max_res == self.max_res and tuple(other.worst) < tuple(self.worst))
            ):
                self.max_res, self.worst = other.max_res, other.worst
        self.sumsq += other.sumsq
        self.count += other.count
        self.scale = max(self.scale, other.scale)
        return self

    def result(self, pointwise: bool) -> EquationResidual:
        scale = 1.0 if pointwise else max(self.scale, SCALE_FLOOR)
        rms = np.sqrt(self.sumsq / max(self.count, 1))
        return EquationResidual(self.max_res / scale, float(rms / scale), scale,
                                tuple(float(v) for v in self.worst))


class _Diff:
    """Differentiation route: finite differences of values, or carried derivatives."""

    def __init__(self, mode: str, h: float):
        if mode not in ("fd", "analytic"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.h = h

    def jac(self, v: VectorField, pts):
        if self.mode == "fd":
            return fd_jacobian(v, pts, self.h)
        return _require_finite(v.evaluate(pts, 1)[1], pts, f"jacobian of {v.name}")

    def grad(self, s: ScalarField, pts):
        if self.mode == "fd":
            return fd_gradient(s, pts, self.h)
        return _require_finite(s.evaluate(pts, 1)[1], pts, f"gradient of {s.name}")


def _val(f, pts):
    return _require_finite(f.evaluate(pts, 0)[0], pts, f"value of {f.name}")


def _norm(a):
    return np.abs(a) if a.ndim == 1 else np.linalg.norm(a, axis=1)


def _points(samples) -> np.ndarray:
    if isinstance(samples, SampleSet):
        return samples.points()
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("samples must be a SampleSet or an (N, 3) array")
    return pts


def _run(system, samples, kernel, mode, h, label="", pointwise=False) -> ResidualReport:
    pts_all = _points(samples)
    if h is None:
        h = default_fd_step(samples.box) if isinstance(samples, SampleSet) else default_fd_step()
    D = _Diff(mode, h)
    accs: dict[str, _Acc] = {}
    for start in range(0, len(pts_all), CHUNK):
        pts = pts_all[start : start + CHUNK]
        for name, (res, mags) in kernel(pts, D).items():
            rn = _norm(np.asarray(res, dtype=float))
            mags = [np.broadcast_to(np.asarray(m, dtype=float), rn.shape) for m in mags]
            bad = ~np.isfinite(rn)
            for m in mags:
                bad |= ~np.isfinite(m)
            if np.any(bad):
                raise EvaluationDomainError(f"non-finite residual in {name!r}", pts[np.argmax(bad)])
            accs.setdefault(name, _Acc()).add(pts, rn, mags)
    eqs = {k: a.result(pointwise) for k, a in accs.items()}
    return ResidualReport(system, eqs, len(pts_all), h if mode == "fd" else None, mode, label)


# -- building blocks ------------------------------------------------------

def _div_eq(D, v: VectorField, pts):
    J = D.jac(v, pts)
    return np.trace(J, axis1=1, axis2=2), [np.abs(J[:, i, i]) for i in range(3)]


def _curl_eq(D, v: VectorField, pts):
    J = D.jac(v, pts)
    offdiag = [np.abs(J[:, i, j]) for i in range(3) for j in range(3) if i != j]
    return curl_from_jacobian(J), offdiag


def _induction_eq(D, V, B, pts):
    """curl(V x B), scaled by the magnitudes of its product-rule expansion."""
    res, _ = _curl_eq(D, V.cross(B), pts)
    Jv, Jb = D.jac(V, pts), D.jac(B, pts)
    v, b = _val(V, pts), _val(B, pts)
    nv, nb = _norm(v), _norm(b)
    jv, jb = np.linalg.norm(Jv, axis=(1, 2)), np.linalg.norm(Jb, axis=(1, 2))
    return res, [nv * jb, nb * jv]


def _mass_eq(D, rho: ScalarField, V: VectorField, pts):
    res, mags = _div_eq(D, V * rho, pts)
    r = _val(rho, pts)
    Jv = D.jac(V, pts)
    mags = mags + [np.abs(r) * np.abs(np.trace(Jv, axis1=1, axis2=2)),
                   _norm(_val(V, pts)) * _norm(D.grad(rho, pts))]
    return res, mags


# -- isotropic systems ------------------------------------------------------

def residual_mhd(s: FlowingIsotropicState, samples, mode="fd", h=None) -> ResidualReport:
    """Flowing isotropic equilibrium: mass, momentum, induction, div B."""

    def kernel(pts, D):
        b, v, rho = _val(s.B, pts), _val(s.V, pts), _val(s.rho, pts)
        curl_b = curl_from_jacobian(D.jac(s.B, pts))
        curl_v = curl_from_jacobian(D.jac(s.V, pts))
        grad_P = D.grad(s.P, pts)
        grad_v2 = D.grad(0.5 * s.V.norm2(), pts)
        t_flow = rho[:, None] * np.cross(v, curl_v)
        t_mag = -np.cross(b, curl_b)
        mom = t_flow + t_mag - grad_P - rho[:, None] * grad_v2
        mags = [
            np.abs(rho) * _norm(v) * _norm(curl_v),
            _norm(b) * _norm(curl_b),
            _norm(grad_P),
            np.abs(rho) * _norm(grad_v2),
        ]
        return {
            "mass": _mass_eq(D, s.rho, s.V, pts),
            "momentum": (mom, mags),
            "induction": _induction_eq(D, s.V, s.B, pts),
            "div_B": _div_eq(D, s.B, pts),
        }

    return _run(System.MHD, samples, kernel, mode, h, s.label)


def residual_plasma(s: StaticIsotropicState, samples, mode="fd", h=None) -> ResidualReport:
    """Static isotropic equilibrium ``(curl B) x B = grad p``, ``div B = 0``."""

    def kernel(pts, D):
        b = _val(s.B, pts)
        curl_b = curl_from_jacobian(D.jac(s.B, pts))
        grad_p = D.grad(s.p, pts)
        mom = np.cross(curl_b, b) - grad_p
        return {
            "momentum": (mom, [_norm(curl_b) * _norm(b), _norm(grad_p)]),
            "div_B": _div_eq(D, s.B, pts),
        }

    return _run(System.PLASMA, samples, kernel, mode, h, s.label)


def residual_force_free(s: StaticIsotropicState, samples, mode="fd", h=None) -> ResidualReport:
    """``curl B = alpha B`` (or collinearity when alpha is absent), ``div B = 0``."""

    def kernel(pts, D):
        b = _val(s.B, pts)
        curl_b = curl_from_jacobian(D.jac(s.B, pts))
        if s.alpha is not None:
            a = _val(s.alpha, pts)
            eq = (curl_b - a[:, None] * b, [_norm(curl_b), np.abs(a) * _norm(b)])
            name = "beltrami"
        else:
            eq = (np.cross(curl_b, b), [_norm(curl_b) * _norm(b)])
            name = "collinear"
        return {name: eq, "div_B": _div_eq(D, s.B, pts)}

    return _run(System.FORCE_FREE, samples, kernel, mode, h, s.label)


def residual_vacuum(s: VacuumState, samples, mode="fd", h=None) -> ResidualReport:
    """``curl B = 0`` and ``div B = 0``, scaled by the largest jacobian entry."""

    def kernel(pts, D):
        return {"curl_B": _curl_eq(D, s.B, pts), "div_B": _div_eq(D, s.B, pts)}

    return _run(System.VACUUM, samples, kernel, mode, h, s.label)


# -- anisotropic systems ---------------------------------------------------

def _aniso_magnetic_terms(D, s: AnisotropicState, pts):
    b = _val(s.B, pts)
    tau = _val(s.tau, pts)
    curl_b = curl_from_jacobian(D.jac(s.B, pts))
    grad_pp = D.grad(s.p_perp, pts)
    grad_b2 = D.grad(0.5 * s.B.norm2(), pts)
    grad_tau = D.grad(s.tau, pts)
    b_dot_gt = np.einsum("ni,ni->n", b, grad_tau)
    nb = _norm(b)
    # (1 - tau) (curl B) x B - grad p_perp - tau grad(B^2/2) - B (B . grad tau)
    lhs = (1.0 - tau)[:, None] * np.cross(curl_b, b)
    rhs = grad_pp + tau[:, None] * grad_b2 + b * b_dot_gt[:, None]
    mags = [
        np.abs(1.0 - tau) * _norm(curl_b) * nb,
        _norm(grad_pp),
        np.abs(tau) * _norm(grad_b2),
        nb * nb * _norm(grad_tau),
    ]
    return tau, lhs - rhs, mags


def _require_subfirehose(tau, pts):
    if np.any(tau >= 1.0):
        raise FirehoseViolationError(
            f"tau >= 1 at sample point {tuple(pts[np.argmax(tau >= 1.0)])}"
        )


def residual_amhd(s: AnisotropicState, samples, mode="fd", h=None) -> ResidualReport:
    """Anisotropic equilibrium residuals.

    Flowing states are checked against momentum, mass, div B and
    induction; static states (no flow) against the motionless momentum
    balance and div B.
    """
    system = System.ANISO_STATIC if s.is_static else System.AMHD

    def kernel(pts, D):
        tau, mom, mags = _aniso_magnetic_terms(D, s, pts)
        _require_subfirehose(tau, pts)
        if s.is_static:
            return {"momentum": (mom, mags), "div_B": _div_eq(D, s.B, pts)}
        rho, v = _val(s.rho, pts), _val(s.V, pts)
        curl_v = curl_from_jacobian(D.jac(s.V, pts))
        grad_v2 = D.grad(0.5 * s.V.norm2(), pts)
        flow = rho[:, None] * (np.cross(v, curl_v) - grad_v2)
        mags = mags + [np.abs(rho) * _norm(v) * _norm(curl_v), np.abs(rho) * _norm(grad_v2)]
        return {
            "momentum": (flow + mom, mags),
            "mass": _mass_eq(D, s.rho, s.V, pts),
            "div_B": _div_eq(D, s.B, pts),
            "induction": _induction_eq(D, s.V, s.B, pts),
        }

    return _run(system, samples, kernel, mode, h, s.label)


# -- structural checks --------------------------------------------------------

def check_surface(s, samples, mode="fd", h=None, psi: Optional[ScalarField] = None) -> ResidualReport:
    """Pointwise ``|B . grad psi| / (|B| |grad psi| + eps)``, and the same for V.

    ``psi`` defaults to the state's own surface label.
    """
    psi = s.surface() if psi is None else psi
    V = getattr(s, "V", None)

    def kernel(pts, D):
        g = D.grad(psi, pts)
        ng = _norm(g)
        out = {}
        for name, fld in (("B", s.B), ("V", V)):
            if fld is None:
                continue
            f = _val(fld, pts)
            ratio = np.abs(np.einsum("ni,ni->n", f, g)) / (_norm(f) * ng + ORTHO_EPS)
            out[f"{name}_dot_grad_psi"] = (ratio, [])
        return out

    return _run(System.SURFACE_ORTHO, samples, kernel, mode, h, getattr(s, "label", ""),
                pointwise=True)


def check_parallel_gradients(a: ScalarField, b: ScalarField, samples, mode="analytic", h=None,
                             label="") -> ResidualReport:
    """Pointwise ``|grad a x grad b| / (|grad a| |grad b| + eps)``.

    Zero when ``a`` is a function of ``b`` (or constant).
    """

    def kernel(pts, D):
        ga, gb = D.grad(a, pts), D.grad(b, pts)
        ratio = _norm(np.cross(ga, gb)) / (_norm(ga) * _norm(gb) + ORTHO_EPS)
        return {f"grad_{a.name}_x_grad_{b.name}": (ratio, [])}

    return _run(System.SURFACE_ORTHO, samples, kernel, mode, h, label, pointwise=True)


def check_rescaled_field_identity(base: VectorField, func, psi: ScalarField, samples,
                                  mode="fd", h=None) -> ResidualReport:
    """``(f B) x curl(f B) = f^2 B x curl B + f f' B^2 grad psi`` with ``f = func(psi)``.

    Holds whenever ``B . grad psi = 0``.
    """
    scaled = base * func(psi)

    def kernel(pts, D):
        b = _val(base, pts)
        s = _val(psi, pts)
        fv, dfv = func(s), func.derivative(s)
        sb = fv[:, None] * b
        lhs = np.cross(sb, curl_from_jacobian(D.jac(scaled, pts)))
        curl_b = curl_from_jacobian(D.jac(base, pts))
        g = D.grad(psi, pts)
        b2 = np.einsum("ni,ni->n", b, b)
        t1 = (fv * fv)[:, None] * np.cross(b, curl_b)
        t2 = (fv * dfv * b2)[:, None] * g
        mags = [_norm(lhs), fv * fv * _norm(b) * _norm(curl_b), _norm(t2)]
        return {"rescaled_cross_curl": (lhs - t1 - t2, mags)}

    return _run(System.RESCALED_CURL, samples, kernel, mode, h)


def _tensor_values(p_perp, p_par, B, pts):
    pp, pl, b = _val(p_perp, pts), _val(p_par, pts), _val(B, pts)
    tau = (pl - pp) / np.einsum("ni,ni->n", b, b)
    return pp[:, None, None] * np.eye(3) + tau[:, None, None] * b[:, :, None] * b[:, None, :]


def check_pressure_divergence_identity(p_perp: ScalarField, p_par: ScalarField, B: VectorField,
                                       samples, mode="fd", h=None) -> ResidualReport:
    """Divergence of the CGL tensor against its expanded vector form.

    The expanded form assumes ``div B = 0``.
    """
    tau_f = (p_par - p_perp) / B.norm2()

    def kernel(pts, D):
        if D.mode == "fd":
            dT = fd_apply(lambda q: _tensor_values(p_perp, p_par, B, q), pts, D.h)
            lhs = np.einsum("niji->nj", dT)
        else:
            b, tau = _val(B, pts), _val(tau_f, pts)
            Jb = D.jac(B, pts)
            gt = D.grad(tau_f, pts)
            lhs = (D.grad(p_perp, pts) + b * np.einsum("ni,ni->n", b, gt)[:, None]
                   + tau[:, None] * (b * np.trace(Jb, axis1=1, axis2=2)[:, None]
                                     + np.einsum("nji,ni->nj", Jb, b)))
        b, tau = _val(B, pts), _val(tau_f, pts)
        curl_b = curl_from_jacobian(D.jac(B, pts))
        g_pp = D.grad(p_perp, pts)
        g_b2 = D.grad(0.5 * B.norm2(), pts)
        g_tau = D.grad(tau_f, pts)
        nb = _norm(b)
        rhs = (g_pp + tau[:, None] * np.cross(curl_b, b) + tau[:, None] * g_b2
               + b * np.einsum("ni,ni->n", b, g_tau)[:, None])
        mags = [_norm(lhs), _norm(g_pp), np.abs(tau) * _norm(curl_b) * nb,
                np.abs(tau) * _norm(g_b2), nb * nb * _norm(g_tau)]
        return {"tensor_divergence": (lhs - rhs, mags)}

    return _run(System.PRESSURE_DIVERGENCE, samples, kernel, mode, h)


def check_rescaled_curl_identity(f: ScalarField, a: VectorField, samples, mode="fd", h=None) -> ResidualReport:
    """``(f a) x curl(f a) = f^2 a x curl a + (a^2/2) grad f^2 - f (a . grad f) a``."""
    fa = a * f
    f2 = f * f

    def kernel(pts, D):
        fv, av = _val(f, pts), _val(a, pts)
        fav = fv[:, None] * av
        curl_fa = curl_from_jacobian(D.jac(fa, pts))
        curl_a = curl_from_jacobian(D.jac(a, pts))
        g_f2 = D.grad(f2, pts)
        g_f = D.grad(f, pts)
        a2 = np.einsum("ni,ni->n", av, av)
        lhs = np.cross(fav, curl_fa)
        t1 = (fv * fv)[:, None] * np.cross(av, curl_a)
        t2 = 0.5 * a2[:, None] * g_f2
        t3 = -(fv * np.einsum("ni,ni->n", av, g_f))[:, None] * av
        na = _norm(av)
        mags = [_norm(fav) * _norm(curl_fa), fv * fv * na * _norm(curl_a),
                0.5 * a2 * _norm(g_f2), np.abs(fv) * na * na * _norm(g_f)]
        return {"identity": (lhs - (t1 + t2 + t3), mags)}

    return _run(System.RESCALED_CURL, samples, kernel, mode, h)


def check_helper_invariant(inp: AnisotropicState, out: AnisotropicState, C: float,
                              samples) -> ResidualReport:
    """``rho1 V1^2 - (1-tau1) B1^2 = C (rho V^2 - (1-tau) B^2)``, values only."""

    def sq(fld, pts):
        v = _val(fld, pts)
        return np.einsum("ni,ni->n", v, v)

    def kernel(pts, D):
        a1 = _val(out.rho, pts) * sq(out.V, pts)
        m1 = (1.0 - _val(out.tau, pts)) * sq(out.B, pts)
        a0 = C * _val(inp.rho, pts) * sq(inp.V, pts)
        m0 = C * (1.0 - _val(inp.tau, pts)) * sq(inp.B, pts)
        return {"A2_minus_M2": ((a1 - m1) - (a0 - m0), [np.abs(a1), np.abs(m1), np.abs(a0), np.abs(m0)])}

    return _run(System.HELPER_INVARIANT, samples, kernel, "analytic", None, out.label)


# -- dispatch ----------------------------------------------------------------

def governing_system(state) -> System:
    if isinstance(state, VacuumState):
        return System.VACUUM
    if isinstance(state, StaticIsotropicState):
        return System.FORCE_FREE if state.force_free else System.PLASMA
    if isinstance(state, FlowingIsotropicState):
        return System.MHD
    if isinstance(state, AnisotropicState):
        return System.ANISO_STATIC if state.is_static else System.AMHD
    raise TypeError(f"not an equilibrium state: {state!r}")


_CHECKERS: dict = {
    System.VACUUM: residual_vacuum,
    System.FORCE_FREE: residual_force_free,
    System.PLASMA: residual_plasma,
    System.MHD: residual_mhd,
    System.ANISO_STATIC: residual_amhd,
    System.AMHD: residual_amhd,
}


def verify_state(state, samples, mode="fd", h=None) -> ResidualReport:
    """Residual of ``state`` against the system it claims to solve."""
    return _CHECKERS[governing_system(state)](state, samples, mode=mode, h=h)


def surface_label(state) -> Optional[ScalarField]:
    if isinstance(state, VacuumState):
        return state.p_label
    return getattr(state, "psi", None)
