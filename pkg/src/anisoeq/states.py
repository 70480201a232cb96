"""
Equilibrium state containers.

Four kinds of state are produced and consumed by the seeds and transforms:

* :class:`VacuumState` -- curl-free, divergence-free magnetic field.
* :class:`StaticIsotropicState` -- motionless plasma with scalar pressure
  (optionally force-free, in which case ``alpha`` is present).
* :class:`FlowingIsotropicState` -- isotropic equilibrium with flow.
* :class:`AnisotropicState` -- CGL-type equilibrium described by the
  perpendicular pressure and the anisotropy factor ``tau``. Static
  anisotropic states have neither flow nor density.

All states are immutable. ``psi`` is a surface label (constant on field
lines and streamlines) when the state has one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from anisoeq.errors import UnsupportedMetadataError
from anisoeq.fields import ScalarField, VectorField
from anisoeq.freefunc import FreeFunction


def _require_psi(state, psi):
    if psi is None:
        raise UnsupportedMetadataError(
            f"{type(state).__name__} {getattr(state, 'label', '')!r} carries no surface function"
        )
    return psi


@dataclass(frozen=True)
class VacuumState:
    B: VectorField
    p_label: Optional[ScalarField] = None
    label: str = "vacuum"

    kind = "vacuum"

    def surface(self) -> ScalarField:
        return _require_psi(self, self.p_label)

    def fields(self) -> dict:
        out = {"B": self.B}
        if self.p_label is not None:
            out["p_label"] = self.p_label
        return out


@dataclass(frozen=True)
class StaticIsotropicState:
    B: VectorField
    p: ScalarField
    psi: Optional[ScalarField] = None
    alpha: Optional[ScalarField] = None
    label: str = "static"

    kind = "static"

    @property
    def force_free(self) -> bool:
        return self.alpha is not None

    def surface(self) -> ScalarField:
        return _require_psi(self, self.psi)

    def fields(self) -> dict:
        out = {"B": self.B, "p": self.p}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.psi is not None:
            out["psi"] = self.psi
        return out


@dataclass(frozen=True)
class FlowingIsotropicState:
    """Isotropic equilibrium with flow, ``P = M(psi) - rho V^2 / 2``.

    ``M`` is the Bernoulli-type function of the surface label; it is kept
    for reference only, the transforms work from ``P`` directly.
    """

    B: VectorField
    V: VectorField
    rho: ScalarField
    P: ScalarField
    psi: ScalarField
    M: Optional[FreeFunction] = None
    label: str = "flowing"

    kind = "flowing"

    def surface(self) -> ScalarField:
        return self.psi

    def fields(self) -> dict:
        return {"B": self.B, "V": self.V, "rho": self.rho, "P": self.P, "psi": self.psi}


@dataclass(frozen=True)
class AnisotropicState:
    """Anisotropic equilibrium.

    ``V`` and ``density`` are both ``None`` for static states; reading
    :attr:`rho` on such a state raises instead of assuming a value.
    The parallel pressure is derived, see :func:`anisoeq.transforms.p_parallel`.
    """

    B: VectorField
    p_perp: ScalarField
    tau: ScalarField
    V: Optional[VectorField] = None
    density: Optional[ScalarField] = None
    psi: Optional[ScalarField] = None
    label: str = "anisotropic"

    kind = "anisotropic"

    @property
    def is_static(self) -> bool:
        return self.V is None

    @property
    def rho(self) -> ScalarField:
        if self.density is None:
            raise UnsupportedMetadataError(
                f"static anisotropic state {self.label!r} has no density"
            )
        return self.density

    def surface(self) -> ScalarField:
        return _require_psi(self, self.psi)

    def fields(self) -> dict:
        from anisoeq.transforms import p_parallel

        out = {"B": self.B}
        if self.V is not None:
            out["V"] = self.V
        if self.density is not None:
            out["rho"] = self.density
        out["p_perp"] = self.p_perp
        out["tau"] = self.tau
        out["p_par"] = p_parallel(self)
        if self.psi is not None:
            out["psi"] = self.psi
        return out


def state_kind(state) -> str:
    """Type tag used for chain type-checking.

    ``aniso_flow`` means an anisotropic state carrying density and a surface
    label (valid input to the symmetry transform); ``aniso_static`` anything
    else anisotropic. Static isotropic states without a surface label are
    tagged ``static_nopsi``.
    """
    if isinstance(state, VacuumState):
        return "vacuum"
    if isinstance(state, StaticIsotropicState):
        return "static" if state.psi is not None else "static_nopsi"
    if isinstance(state, FlowingIsotropicState):
        return "flowing"
    if isinstance(state, AnisotropicState):
        if state.density is not None and state.psi is not None:
            return "aniso_flow"
        return "aniso_static"
    raise TypeError(f"not an equilibrium state: {state!r}")
