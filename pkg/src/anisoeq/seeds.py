"""
Catalog of closed-form isotropic equilibria used as transform inputs.

Each constructor returns a state with hand-derived jacobians and, where
one exists in closed form, a surface label. All seeds are smooth on the
whole of R^3, so no sample exclusions are required.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from anisoeq.errors import UnsupportedMetadataError
from anisoeq.fields import ScalarField, VectorField, constant, coordinate, zero_vector
from anisoeq.freefunc import FreeFunction
from anisoeq.states import (
    AnisotropicState,
    FlowingIsotropicState,
    StaticIsotropicState,
    VacuumState,
)


def _analytic_planar(kind: str, n: int):
    """Return ``(F, F', F'')`` of an entire function of ``x + i y``."""
    if kind == "power":
        if int(n) != n or n < 1:
            raise ValueError("power kind needs an integer n >= 1")
        n = int(n)

        def F(w):
            return w**n

        def dF(w):
            return n * w ** (n - 1)

        def d2F(w):
            return n * (n - 1) * w ** (n - 2) if n >= 2 else np.zeros_like(w)

        return F, dF, d2F
    if kind == "exp-trig":
        return np.exp, np.exp, np.exp
    raise ValueError(f"unknown planar harmonic kind {kind!r}")


def make_vacuum_planar_harmonic(
    kind: str = "power", n: int = 2, Bz0: float = 0.0, q: Optional[FreeFunction] = None
) -> VacuumState:
    """Vacuum field ``B = (d_x phi, d_y phi, Bz0)`` with ``phi = Re F(x + i y)``.

    ``F`` is ``(x+iy)**n`` for ``kind="power"`` and ``exp(x+iy)`` for
    ``kind="exp-trig"``. The field-line label is ``q(Im F)``; ``Im F`` is
    the harmonic conjugate of ``phi``, so ``B . grad(Im F) = 0``.
    """
    F, dF, d2F = _analytic_planar(kind, n)
    Bz0 = float(Bz0)

    def w(p):
        return p[:, 0] + 1j * p[:, 1]

    def value(p):
        d = dF(w(p))
        return np.stack([d.real, -d.imag, np.full(p.shape[0], Bz0)], axis=1)

    def jac(p):
        d2 = d2F(w(p))
        out = np.zeros((p.shape[0], 3, 3))
        out[:, 0, 0] = d2.real
        out[:, 0, 1] = -d2.imag
        out[:, 1, 0] = -d2.imag
        out[:, 1, 1] = -d2.real
        return out

    def conj_value(p):
        return F(w(p)).imag

    def conj_grad(p):
        d = dF(w(p))
        return np.stack([d.imag, d.real, np.zeros(p.shape[0])], axis=1)

    label = f"vacuum_planar_harmonic[{kind}{'' if kind != 'power' else f',n={n}'}]"
    B = VectorField(value, jac, name="B")
    conj = ScalarField(conj_value, conj_grad, name="ImF")
    p_label = conj if q is None else q(conj)
    return VacuumState(B=B, p_label=p_label, label=label)


def _helical_field(B0: float, alpha: float) -> VectorField:
    B0, alpha = float(B0), float(alpha)

    def value(p):
        z = p[:, 2]
        return np.stack(
            [B0 * np.sin(alpha * z), B0 * np.cos(alpha * z), np.zeros_like(z)], axis=1
        )

    def jac(p):
        z = p[:, 2]
        out = np.zeros((p.shape[0], 3, 3))
        out[:, 0, 2] = B0 * alpha * np.cos(alpha * z)
        out[:, 1, 2] = -B0 * alpha * np.sin(alpha * z)
        return out

    return VectorField(value, jac, name="B")


def make_force_free_helical(
    B0: float = 1.0, alpha: float = 1.0, p0: float = 1.0, psi: Optional[FreeFunction] = None
) -> StaticIsotropicState:
    """Beltrami field ``B0 (sin az, cos az, 0)`` with ``curl B = a B``.

    The surface label defaults to ``z``; any function of ``z`` is equally
    valid and may be supplied as ``psi``.
    """
    if B0 == 0:
        raise ValueError("B0 must be non-zero")
    z = coordinate(2)
    return StaticIsotropicState(
        B=_helical_field(B0, alpha),
        p=constant(p0),
        psi=z if psi is None else psi(z),
        alpha=constant(alpha),
        label=f"force_free_helical[B0={B0:g},alpha={alpha:g}]",
    )


def make_abc_beltrami(A: float = 1.0, Bc: float = 1.0, Cc: float = 1.0, p0: float = 1.0):
    """Arnold-Beltrami-Childress field, ``curl B = B``. Carries no surface label."""
    A, Bc, Cc = float(A), float(Bc), float(Cc)

    def value(p):
        x, y, z = p.T
        return np.stack(
            [
                A * np.sin(z) + Cc * np.cos(y),
                Bc * np.sin(x) + A * np.cos(z),
                Cc * np.sin(y) + Bc * np.cos(x),
            ],
            axis=1,
        )

    def jac(p):
        x, y, z = p.T
        out = np.zeros((p.shape[0], 3, 3))
        out[:, 0, 1] = -Cc * np.sin(y)
        out[:, 0, 2] = A * np.cos(z)
        out[:, 1, 0] = Bc * np.cos(x)
        out[:, 1, 2] = -A * np.sin(z)
        out[:, 2, 0] = -Bc * np.sin(x)
        out[:, 2, 1] = Cc * np.cos(y)
        return out

    return StaticIsotropicState(
        B=VectorField(value, jac, name="B"),
        p=constant(p0),
        psi=None,
        alpha=constant(1.0),
        label=f"abc_beltrami[A={A:g},B={Bc:g},C={Cc:g}]",
    )


def make_theta_pinch(Bz_profile: Optional[FreeFunction] = None, p0: float = 1.0):
    """Axial field ``(0, 0, Bz(r^2))`` balanced by ``p = p0 - Bz^2 / 2``.

    The surface label is ``r^2`` (smooth on the axis). Default profile is
    ``exp(-r^2 / 2)``.
    """
    if Bz_profile is None:
        Bz_profile = FreeFunction.exp(rate=-0.5)
    x, y = coordinate(0), coordinate(1)
    r2 = x * x + y * y
    r2.name = "r2"
    Bz = Bz_profile(r2)
    B = VectorField.from_components(0.0, 0.0, Bz, name="B")
    p = float(p0) - 0.5 * Bz * Bz
    return StaticIsotropicState(B=B, p=p, psi=r2, alpha=None, label="theta_pinch")


def make_field_aligned_flow(
    B0: float = 1.0,
    alpha: float = 1.0,
    lam: Optional[FreeFunction] = None,
    rho0: float = 1.0,
    P0: float = 1.0,
) -> FlowingIsotropicState:
    """Flow ``V = lam(z) B`` along the helical Beltrami field.

    Density and pressure are uniform, the surface label is ``z`` and the
    Bernoulli function is ``M(s) = P0 + rho0 lam(s)^2 B0^2 / 2``.
    """
    if B0 == 0:
        raise ValueError("B0 must be non-zero")
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    if lam is None:
        lam = FreeFunction.identity()
    z = coordinate(2)
    B = _helical_field(B0, alpha)
    V = B * lam(z)
    M = P0 + (0.5 * rho0 * B0 * B0) * lam * lam
    return FlowingIsotropicState(
        B=B,
        V=V,
        rho=constant(rho0),
        P=constant(P0),
        psi=z,
        M=M,
        label=f"field_aligned_flow[B0={B0:g},alpha={alpha:g}]",
    )


def embed_as_anisotropic(s: StaticIsotropicState, rho: Optional[FreeFunction] = None):
    """View a static isotropic state as an anisotropic one with ``tau = 0``.

    The flow is identically zero and the density is ``rho(psi)``, so the
    result can be fed to the symmetry transform.
    """
    if s.psi is None:
        raise UnsupportedMetadataError(
            f"cannot embed {s.label!r}: it carries no surface function"
        )
    if rho is None:
        rho = FreeFunction.constant(1.0)
    return AnisotropicState(
        B=s.B,
        p_perp=s.p,
        tau=constant(0.0),
        V=zero_vector(),
        density=rho(s.psi),
        psi=s.psi,
        label=f"embedded[{s.label}]",
    )


@dataclass(frozen=True)
class SeedEntry:
    name: str
    builder: Callable
    kind: str
    params: dict
    feeds: tuple
    note: str = ""


def _ff(spec):
    return None if spec is None else FreeFunction.from_spec(spec)


def _build_vacuum(kind="exp-trig", n=2, Bz0=1.0, q=None):
    return make_vacuum_planar_harmonic(kind=kind, n=n, Bz0=Bz0, q=_ff(q))


def _build_helical(B0=1.0, alpha=1.0, p0=1.0, psi=None):
    return make_force_free_helical(B0=B0, alpha=alpha, p0=p0, psi=_ff(psi))


def _build_theta(Bz=None, p0=1.0):
    return make_theta_pinch(_ff(Bz), p0=p0)


def _build_flow(B0=1.0, alpha=1.0, lam=None, rho0=1.0, P0=1.0):
    return make_field_aligned_flow(B0=B0, alpha=alpha, lam=_ff(lam), rho0=rho0, P0=P0)


SEEDS = {
    e.name: e
    for e in [
        SeedEntry(
            "abc_beltrami",
            make_abc_beltrami,
            "static_nopsi",
            {"A": "real (1.0)", "Bc": "real (1.0)", "Cc": "real (1.0)", "p0": "real (1.0)"},
            ("static_rescale",),
            "no Ψ: static rescale with constant f only",
        ),
        SeedEntry(
            "field_aligned_flow",
            _build_flow,
            "flowing",
            {
                "B0": "real (1.0)",
                "alpha": "real (1.0)",
                "lam": "free function of z (identity)",
                "rho0": "real > 0 (1.0)",
                "P0": "real (1.0)",
            },
            ("flow_rescale",),
        ),
        SeedEntry(
            "force_free_helical",
            _build_helical,
            "static",
            {
                "B0": "real != 0 (1.0)",
                "alpha": "real (1.0)",
                "p0": "real (1.0)",
                "psi": "free function of z (identity)",
            },
            ("static_rescale", "embed -> symmetry"),
        ),
        SeedEntry(
            "theta_pinch",
            _build_theta,
            "static",
            {"Bz": "free function of r^2 (exp(-r^2/2))", "p0": "real (1.0)"},
            ("static_rescale", "embed -> symmetry"),
        ),
        SeedEntry(
            "vacuum_planar_harmonic",
            _build_vacuum,
            "vacuum",
            {
                "kind": "'power' | 'exp-trig' ('exp-trig')",
                "n": "integer >= 1, power kind only (2)",
                "Bz0": "real (1.0)",
                "q": "free function of the harmonic conjugate (identity)",
            },
            ("vacuum_rescale",),
        ),
    ]
}


def build_seed(name: str, **params):
    if name not in SEEDS:
        raise KeyError(f"unknown seed {name!r}; known: {', '.join(sorted(SEEDS))}")
    return SEEDS[name].builder(**params)
