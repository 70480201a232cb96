"""
One-dimensional differentiable functions of a surface label.

These are the arbitrary functions the transforms take as parameters
(scalings of B and V, the hyperbolic pair, density and anisotropy
multipliers). Each carries an analytic derivative, supports the usual
arithmetic, and can be composed with a :class:`~anisoeq.fields.ScalarField`
by calling it on one.

Elementary kinds are parameterised as ``offset + amplitude * base(rate*s + shift)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from anisoeq.errors import ConfigError, InvariantError, ParameterDomainError
from anisoeq.fields import ScalarField

_BASES: dict[str, tuple[Callable, Callable]] = {
    "exp": (np.exp, np.exp),
    "sin": (np.sin, np.cos),
    "cos": (np.cos, lambda u: -np.sin(u)),
    "cosh": (np.cosh, np.sinh),
    "sinh": (np.sinh, np.cosh),
}


class FreeFunction:
    """Scalar function ``s -> f(s)`` with analytic derivative ``f'(s)``."""

    __slots__ = ("_f", "_df", "label", "spec")

    def __init__(self, f, df, label: str = "f", spec: dict | None = None):
        self._f = f
        self._df = df
        self.label = label
        self.spec = spec

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> "FreeFunction":
        c = float(c)
        return cls(
            lambda s: np.full(np.shape(s), c),
            lambda s: np.zeros(np.shape(s)),
            f"{c:g}",
            {"kind": "constant", "value": c},
        )

    @classmethod
    def identity(cls) -> "FreeFunction":
        return cls.polynomial([0.0, 1.0])

    @classmethod
    def polynomial(cls, coeffs) -> "FreeFunction":
        """Polynomial with ascending coefficients ``c0 + c1 s + c2 s^2 + ...``."""
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("polynomial needs at least one coefficient")
        dc = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1)
        return cls(
            lambda s: np.polynomial.polynomial.polyval(s, c),
            lambda s: np.polynomial.polynomial.polyval(s, dc) + np.zeros(np.shape(s)),
            "poly" + str(c.tolist()),
            {"kind": "polynomial", "coeffs": c.tolist()},
        )

    @classmethod
    def elementary(cls, kind, amplitude=1.0, rate=1.0, shift=0.0, offset=0.0) -> "FreeFunction":
        if kind not in _BASES:
            raise ValueError(f"unknown elementary kind {kind!r}")
        base, dbase = _BASES[kind]
        A, k, s0, c = float(amplitude), float(rate), float(shift), float(offset)
        return cls(
            lambda s: c + A * base(k * np.asarray(s, dtype=float) + s0),
            lambda s: A * k * dbase(k * np.asarray(s, dtype=float) + s0),
            f"{c:g}+{A:g}*{kind}({k:g}s+{s0:g})",
            {"kind": kind, "amplitude": A, "rate": k, "shift": s0, "offset": c},
        )

    @classmethod
    def exp(cls, **kw):
        return cls.elementary("exp", **kw)

    @classmethod
    def sin(cls, **kw):
        return cls.elementary("sin", **kw)

    @classmethod
    def cos(cls, **kw):
        return cls.elementary("cos", **kw)

    @classmethod
    def cosh(cls, **kw):
        return cls.elementary("cosh", **kw)

    @classmethod
    def sinh(cls, **kw):
        return cls.elementary("sinh", **kw)

    @classmethod
    def from_spec(cls, spec) -> "FreeFunction":
        """Build from a config mapping such as ``{"kind": "cosh", "rate": 1}``.

        A bare number is read as a constant. Composite kinds ``sum``,
        ``product`` (key ``terms``) and ``reciprocal`` (key ``of``) nest.
        """
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return cls.constant(spec)
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigError(f"free function needs a 'kind': {spec!r}")
        kind = spec["kind"]
        rest = {k: v for k, v in spec.items() if k != "kind"}
        try:
            if kind == "constant":
                return cls.constant(rest["value"])
            if kind == "identity":
                return cls.identity()
            if kind == "polynomial":
                return cls.polynomial(rest["coeffs"])
            if kind in _BASES:
                return cls.elementary(kind, **rest)
            if kind == "sum":
                out = cls.from_spec(rest["terms"][0])
                for t in rest["terms"][1:]:
                    out = out + cls.from_spec(t)
                return out
            if kind == "product":
                out = cls.from_spec(rest["terms"][0])
                for t in rest["terms"][1:]:
                    out = out * cls.from_spec(t)
                return out
            if kind == "reciprocal":
                return cls.from_spec(rest["of"]).reciprocal()
        except (KeyError, TypeError, IndexError) as exc:
            raise ConfigError(f"bad parameters for free function {spec!r}: {exc}") from exc
        raise ConfigError(f"unknown free function kind {kind!r}")

    # -- evaluation -------------------------------------------------------
    def __call__(self, s):
        if isinstance(s, ScalarField):
            return self.compose(s)
        return self._f(np.asarray(s, dtype=float))

    def derivative(self, s) -> np.ndarray:
        return self._df(np.asarray(s, dtype=float))

    def compose(self, field: ScalarField) -> ScalarField:
        """``f(field)`` as a scalar field, gradient ``f'(field) * grad field``."""
        f, df = self._f, self._df

        def fn(pts, order):
            v, g = field.evaluate(pts, order)
            if order == 0:
                return f(v), None
            return f(v), df(v)[:, None] * g

        return ScalarField._from_eval(fn, f"{self.label}({field.name})")

    # -- algebra ----------------------------------------------------------
    def _combine(self, other, op, dop, sym):
        other = _as_free(other)
        f1, d1, f2, d2 = self._f, self._df, other._f, other._df
        spec = None
        if self.spec is not None and other.spec is not None:
            spec = {"kind": "sum" if sym == "+" else "product", "terms": [self.spec, other.spec]}
        return FreeFunction(
            lambda s: op(f1(s), f2(s)),
            lambda s: dop(f1(s), d1(s), f2(s), d2(s)),
            f"({self.label} {sym} {other.label})",
            spec,
        )

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b, lambda a, da, b, db: da + db, "+")

    __radd__ = __add__

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b, lambda a, da, b, db: a * db + b * da, "*")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-_as_free(other))

    def __rsub__(self, other):
        return _as_free(other) + (-self)

    def reciprocal(self) -> "FreeFunction":
        f, df = self._f, self._df
        return FreeFunction(
            lambda s: 1.0 / f(s),
            lambda s: -df(s) / f(s) ** 2,
            f"1/{self.label}",
            None if self.spec is None else {"kind": "reciprocal", "of": self.spec},
        )

    def __truediv__(self, other):
        return self * _as_free(other).reciprocal()

    def __rtruediv__(self, other):
        return _as_free(other) * self.reciprocal()

    def require_nonvanishing(self, s, what: str = "free function") -> None:
        """Raise if ``f`` hits zero or changes sign over the values ``s``."""
        vals = self(np.asarray(s, dtype=float))
        if not np.all(np.isfinite(vals)):
            raise ParameterDomainError(f"{what} {self.label} is non-finite on the sampled range")
        if np.any(vals == 0.0) or (np.any(vals > 0) and np.any(vals < 0)):
            raise ParameterDomainError(
                f"{what} {self.label} vanishes on the sampled range "
                f"[{np.min(s):.6g}, {np.max(s):.6g}]"
            )

    def __repr__(self):
        return f"FreeFunction({self.label})"


def _as_free(x) -> FreeFunction:
    if isinstance(x, FreeFunction):
        return x
    return FreeFunction.constant(float(x))


@dataclass(frozen=True)
class AbPair:
    """Pair of free functions with ``a(s)**2 - b(s)**2 == C`` on the range of use."""

    a: FreeFunction
    b: FreeFunction
    C: float

    @classmethod
    def hyperbolic(cls, C: float = 1.0, rate: float = 1.0, shift: float = 0.0, sign_b: float = 1.0):
        """``a = sqrt(C) cosh(rate*s + shift)``, ``b = +-sqrt(C) sinh(rate*s + shift)``."""
        if C <= 0:
            raise ValueError("hyperbolic pair needs C > 0")
        r = float(np.sqrt(C))
        return cls(
            FreeFunction.cosh(amplitude=r, rate=rate, shift=shift),
            FreeFunction.sinh(amplitude=sign_b * r, rate=rate, shift=shift),
            float(C),
        )

    @classmethod
    def identity(cls) -> "AbPair":
        return cls(FreeFunction.constant(1.0), FreeFunction.constant(0.0), 1.0)

    def inverse(self, sign: int = 1) -> "AbPair":
        """Pair undoing this one's action on (sqrt(rho) V, sqrt(1-tau) B).

        ``sign`` is the global sign used with the forward pair; the inverse
        transform must be applied with the same sign.
        """
        return AbPair(self.a / self.C, -float(sign) * self.b / self.C, 1.0 / self.C)

    def validate(self, s, atol: float = 1e-10) -> None:
        s = np.asarray(s, dtype=float)
        dev = self.a(s) ** 2 - self.b(s) ** 2 - self.C
        worst = float(np.max(np.abs(dev))) if dev.size else 0.0
        scale = max(1.0, abs(self.C), float(np.max(self.a(s) ** 2)) if s.size else 0.0)
        if not worst <= atol * scale:
            raise InvariantError(
                f"a^2 - b^2 deviates from C={self.C:g} by {worst:.3e} on the sampled range"
            )
