"""
State-to-state transforms producing anisotropic equilibria.

``rescale_flowing`` maps a flowing isotropic equilibrium to an anisotropic
one by rescaling B and V with functions of the surface label.
``rescale_static`` and ``rescale_vacuum`` are the static variants starting
from a plasma equilibrium and from a vacuum field respectively.
``symmetry_transform`` is the symmetry group acting on anisotropic equilibria:
it mixes ``sqrt(rho) V`` and ``sqrt(1 - tau) B`` through a pair ``(a, b)``
with ``a^2 - b^2 = C`` and rescales density and ``1 - tau``.

Every free function is composed with the state's surface label (or the
pressure / field-line label for the static variants), so outputs carry
exact derivatives. Each transform checks its preconditions on a sample
set before building anything.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from anisoeq.errors import (
    DensityError,
    FirehoseViolationError,
    PreconditionError,
    SingularAnisotropyError,
    UnsupportedMetadataError,
    PhysicalityWarning,
    _fmt_point,
)
from anisoeq.fields import ScalarField, as_points
from anisoeq.freefunc import AbPair, FreeFunction
from anisoeq.sampling import SampleSet
from anisoeq.seeds import embed_as_anisotropic
from anisoeq import verify
from anisoeq.states import (
    AnisotropicState,
    FlowingIsotropicState,
    StaticIsotropicState,
    VacuumState,
)

DEFAULT_CHECK_SAMPLES = SampleSet(count=2048)
# analytic-jacobian precondition checks on inputs
INPUT_TOL = 1e-7
SURFACE_TOL = 1e-10


def p_parallel(s: AnisotropicState) -> ScalarField:
    """``p_par = p_perp + tau B^2``."""
    return s.p_perp + s.tau * s.B.norm2()


def pressure_tensor(s: AnisotropicState, p) -> np.ndarray:
    """CGL pressure tensor ``p_perp I + tau B B`` at ``p`` (shape (3, 3) or (N, 3, 3))."""
    pts, single = as_points(p)
    b = s.B(pts)
    b2 = np.einsum("ni,ni->n", b, b)
    if np.any(b2 == 0.0):
        raise SingularAnisotropyError(
            f"|B| = 0 at {tuple(pts[np.argmax(b2 == 0.0)])}; anisotropy is undefined"
        )
    pp = s.p_perp(pts)
    tau = (p_parallel(s)(pts) - pp) / b2
    out = pp[:, None, None] * np.eye(3) + tau[:, None, None] * b[:, :, None] * b[:, None, :]
    return out[0] if single else out


# -- checks -------------------------------------------------------------------

def _pts(samples) -> np.ndarray:
    if samples is None:
        samples = DEFAULT_CHECK_SAMPLES
    return samples.points() if isinstance(samples, SampleSet) else np.asarray(samples, float)


def _require_positive_C0(C0):
    if not C0 > 0:
        raise FirehoseViolationError(
            f"C0 = {C0!r} must be positive, otherwise 1 - tau = C0 / f^2 is not positive"
        )


def _require_report(report: verify.ResidualReport, tol: float, what: str):
    if not report.passed(tol):
        name, eq = report.worst()
        raise PreconditionError(
            f"input fails {what}: {name} residual {eq.linf:.3e} > {tol:g}", eq.worst_point
        )


def _warn_negative(name: str, fld: ScalarField, pts: np.ndarray):
    vals = fld(pts)
    i = int(np.argmin(vals))
    if vals[i] < 0:
        warnings.warn(
            f"{name} is negative (min {vals[i]:.4g} at {_fmt_point(pts[i])})",
            PhysicalityWarning,
            stacklevel=3,
        )


def _physicality(s: AnisotropicState, pts):
    _warn_negative("p_perp", s.p_perp, pts)
    _warn_negative("p_par", p_parallel(s), pts)


# -- isotropic -> anisotropic ----------------------------------------------

def rescale_flowing(
    s: FlowingIsotropicState,
    f: FreeFunction,
    g: FreeFunction,
    C0: float = 1.0,
    C1: float = 0.0,
    samples=None,
    check_input: bool = True,
) -> AnisotropicState:
    """Flowing isotropic equilibrium to anisotropic equilibrium.

    ``B1 = f(psi) B``, ``V1 = g(psi) V``, ``rho1 = C0 rho / g^2``,
    ``tau1 = 1 - C0 / f^2`` and ``p_perp = C0 P + C1 + (C0 - f^2) B^2 / 2``.
    """
    if not isinstance(s, FlowingIsotropicState):
        raise TypeError(f"expected a FlowingIsotropicState, got {type(s).__name__}")
    _require_positive_C0(C0)
    pts = _pts(samples)
    psi = s.psi
    psi_vals = psi(pts)
    f.require_nonvanishing(psi_vals, "f")
    g.require_nonvanishing(psi_vals, "g")
    if check_input:
        _require_report(verify.residual_mhd(s, pts, mode="analytic"), INPUT_TOL, "isotropic MHD")
        _require_report(verify.check_surface(s, pts, mode="analytic"), SURFACE_TOL, "surface check")
        _require_report(
            verify.check_parallel_gradients(s.rho, psi, pts), SURFACE_TOL, "density = rho(psi)"
        )
        bern = s.P + 0.5 * s.rho * s.V.norm2()
        bern.name = "bernoulli"
        _require_report(
            verify.check_parallel_gradients(bern, psi, pts), SURFACE_TOL, "P + rho V^2/2 = M(psi)"
        )
    fpsi, gpsi = f(psi), g(psi)
    f2 = fpsi * fpsi
    out = AnisotropicState(
        B=s.B * fpsi,
        V=s.V * gpsi,
        density=C0 * s.rho / (gpsi * gpsi),
        tau=1.0 - C0 / f2,
        p_perp=C0 * s.P + C1 + 0.5 * (C0 - f2) * s.B.norm2(),
        psi=psi,
        label=f"flow_rescale[{s.label}]",
    )
    _physicality(out, pts)
    return out


def _static_transform(B, p_label, f, C0, C1, with_p_term, psi, label, pts):
    _require_positive_C0(C0)
    f.require_nonvanishing(p_label(pts), "f")
    fp = f(p_label)
    f2 = fp * fp
    p_perp = 0.5 * (C0 - f2) * B.norm2() + C1
    if with_p_term:
        p_perp = C0 * p_label + p_perp
    return AnisotropicState(
        B=B * fp, p_perp=p_perp, tau=1.0 - C0 / f2, V=None, density=None, psi=psi, label=label
    )


def rescale_static(
    s: StaticIsotropicState,
    f: FreeFunction,
    C0: float = 1.0,
    C1: float = 0.0,
    samples=None,
    check_input: bool = True,
) -> AnisotropicState:
    """Static plasma equilibrium to static anisotropic equilibrium, ``B1 = f(p) B``."""
    if not isinstance(s, StaticIsotropicState):
        raise TypeError(f"expected a StaticIsotropicState, got {type(s).__name__}")
    pts = _pts(samples)
    if check_input:
        _require_report(verify.residual_plasma(s, pts, mode="analytic"), INPUT_TOL, "plasma equilibrium")
    out = _static_transform(s.B, s.p, f, C0, C1, True, s.psi, f"static_rescale[{s.label}]", pts)
    _physicality(out, pts)
    return out


def rescale_vacuum(
    s: VacuumState,
    f: FreeFunction,
    C0: float = 1.0,
    C1: float = 0.0,
    samples=None,
    check_input: bool = True,
) -> AnisotropicState:
    """Vacuum field to static anisotropic equilibrium, ``B1 = f(p) B``.

    ``p`` is the state's field-line label; the perpendicular pressure has
    no ``C0 p`` term here.
    """
    if not isinstance(s, VacuumState):
        raise TypeError(f"expected a VacuumState, got {type(s).__name__}")
    if s.p_label is None:
        raise UnsupportedMetadataError(f"vacuum state {s.label!r} has no field-line label")
    pts = _pts(samples)
    if check_input:
        _require_report(verify.residual_vacuum(s, pts, mode="analytic"), INPUT_TOL, "vacuum field")
        _require_report(verify.check_surface(s, pts, mode="analytic"), SURFACE_TOL, "field-line label")
    out = _static_transform(s.B, s.p_label, f, C0, C1, False, s.p_label, f"vacuum_rescale[{s.label}]", pts)
    _physicality(out, pts)
    return out


# -- symmetry group ------------------------------------------------------------

def symmetry_transform(
    s: AnisotropicState,
    ab: AbPair,
    m: Optional[FreeFunction] = None,
    n: Optional[FreeFunction] = None,
    sign: int = 1,
    samples=None,
    check_input: bool = True,
) -> AnisotropicState:
    """Symmetry transform of anisotropic equilibria.

    With ``X = sqrt(rho) V`` and ``Y = sqrt(1 - tau) B`` the new fields
    satisfy ``sqrt(rho1) V1 = a X + b Y`` and
    ``sqrt(1 - tau1) B1 = sign (b X + a Y)``, where ``rho1 = m^2 rho`` and
    ``1 - tau1 = n^2 (1 - tau)``. All of ``a, b, m, n`` are functions of
    the surface label. ``p_perp1 = C p_perp + (C B^2 - B1^2) / 2``.
    """
    if not isinstance(s, AnisotropicState):
        raise TypeError(f"expected an AnisotropicState, got {type(s).__name__}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if s.V is None or s.density is None:
        raise UnsupportedMetadataError(
            f"{s.label!r} is a static anisotropic state without density; "
            "the symmetry transform needs rho and V"
        )
    psi = s.surface()
    m = FreeFunction.constant(1.0) if m is None else m
    n = FreeFunction.constant(1.0) if n is None else n
    pts = _pts(samples)
    psi_vals = psi(pts)
    ab.validate(psi_vals)
    m.require_nonvanishing(psi_vals, "m")
    n.require_nonvanishing(psi_vals, "n")
    rho_vals, tau_vals = s.rho(pts), s.tau(pts)
    if np.any(rho_vals <= 0):
        raise DensityError(f"density is non-positive at {tuple(pts[np.argmax(rho_vals <= 0)])}")
    if np.any(tau_vals >= 1):
        raise FirehoseViolationError(f"tau >= 1 at {tuple(pts[np.argmax(tau_vals >= 1)])}")
    if check_input:
        _require_report(verify.residual_amhd(s, pts, mode="analytic"), INPUT_TOL, "anisotropic equilibrium")
        _require_report(verify.check_surface(s, pts, mode="analytic"), SURFACE_TOL, "surface check")
        for name, fld in (("rho", s.rho), ("tau", s.tau)):
            _require_report(
                verify.check_parallel_gradients(fld, psi, pts), SURFACE_TOL, f"{name} = {name}(psi)"
            )

    a, b = ab.a(psi), ab.b(psi)
    mp, np_ = m(psi), n(psi)
    sqrt_rho = s.rho.sqrt()
    sqrt_omt = (1.0 - s.tau).sqrt()
    B, V = s.B, s.V
    V1 = B * (b * sqrt_omt / (mp * sqrt_rho)) + V * (a / mp)
    B1 = (B * (a / np_) + V * (b * sqrt_rho / (np_ * sqrt_omt))) * float(sign)
    out = AnisotropicState(
        B=B1,
        V=V1,
        density=mp * mp * s.rho,
        tau=1.0 - np_ * np_ * (1.0 - s.tau),
        p_perp=ab.C * s.p_perp + 0.5 * (ab.C * B.norm2() - B1.norm2()),
        psi=psi,
        label=f"symmetry[{s.label}]",
    )
    _physicality(out, pts)
    return out


def inverse_parameters(ab: AbPair, m: FreeFunction, n: FreeFunction, sign: int = 1):
    """Parameters of the transform undoing ``symmetry_transform(., ab, m, n, sign)``."""
    return ab.inverse(sign), m.reciprocal(), n.reciprocal(), sign


def helper_fields(s: AnisotropicState):
    """``(sqrt(rho) V, sqrt(1 - tau) B)`` of a flowing anisotropic state."""
    return s.V * s.rho.sqrt(), s.B * (1.0 - s.tau).sqrt()


# -- pipeline stage description -----------------------------------------------

TRANSFORMS = ("flow_rescale", "static_rescale", "vacuum_rescale", "symmetry", "embed")

# accepted input kinds (see anisoeq.states.state_kind) and resulting kind
STAGE_KINDS = {
    "flow_rescale": ({"flowing"}, "aniso_flow"),
    "static_rescale": ({"static", "static_nopsi"}, "aniso_static"),
    "vacuum_rescale": ({"vacuum"}, "aniso_static"),
    "symmetry": ({"aniso_flow"}, "aniso_flow"),
    "embed": ({"static"}, "aniso_flow"),
}


@dataclass(frozen=True)
class TransformSpec:
    """Which transform to apply and with what parameters."""

    transform: str
    f: Optional[FreeFunction] = None
    g: Optional[FreeFunction] = None
    C0: float = 1.0
    C1: float = 0.0
    ab: Optional[AbPair] = None
    m: Optional[FreeFunction] = None
    n: Optional[FreeFunction] = None
    sign: int = 1
    rho: Optional[FreeFunction] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}; expected one of {TRANSFORMS}")

    def accepts(self, kind: str) -> bool:
        return kind in STAGE_KINDS[self.transform][0]

    def output_kind(self) -> str:
        return STAGE_KINDS[self.transform][1]

    def apply(self, state, samples=None):
        one = FreeFunction.constant(1.0)
        if self.transform == "flow_rescale":
            return rescale_flowing(state, self.f or one, self.g or one, self.C0, self.C1, samples)
        if self.transform == "static_rescale":
            return rescale_static(state, self.f or one, self.C0, self.C1, samples)
        if self.transform == "vacuum_rescale":
            return rescale_vacuum(state, self.f or one, self.C0, self.C1, samples)
        if self.transform == "symmetry":
            return symmetry_transform(state, self.ab or AbPair.identity(), self.m, self.n, self.sign, samples)
        return embed_as_anisotropic(state, self.rho)
