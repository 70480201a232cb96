"""
Closed-form scalar and vector fields on R^3 with exact first derivatives.

Every field is a pure function of an ``(N, 3)`` array of points. Leaves
carry hand-written value and derivative closures; arithmetic, products,
cross/dot products and composition with free functions propagate the
derivative analytically (product and chain rule). The finite-difference
differentiators at the bottom of the module only ever look at values and
are meant to be used as an independent check of the analytic path.

Conventions
-----------
* ``ScalarField.gradient(p)`` has shape ``(N, 3)``.
* ``VectorField.jacobian(p)[n, i, j]`` is ``d v_i / d x_j`` at point ``n``.
* ``div`` is the trace of the jacobian, ``curl`` its antisymmetric part.

A single point of shape ``(3,)`` may be passed anywhere a point array is
accepted; outputs are then squeezed accordingly.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from anisoeq.errors import ConstructionError, EvaluationDomainError, StencilError

# fn(points, order) -> (value, derivative or None)
EvalFn = Callable[[np.ndarray, int], tuple]


def as_points(p) -> tuple[np.ndarray, bool]:
    """Return ``(points (N,3), was_single)`` for a point or point array."""
    arr = np.asarray(p, dtype=float)
    if arr.shape == (3,):
        return arr.reshape(1, 3), True
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected a point (3,) or points (N, 3), got shape {arr.shape}")
    return arr, False


def _first_bad(arr: np.ndarray, pts: np.ndarray):
    flat = arr.reshape(arr.shape[0], -1)
    bad = ~np.all(np.isfinite(flat), axis=1)
    if np.any(bad):
        return pts[np.argmax(bad)]
    return None


def _require_finite(arr: np.ndarray, pts: np.ndarray, what: str) -> np.ndarray:
    bad = _first_bad(arr, pts)
    if bad is not None:
        raise EvaluationDomainError(f"non-finite {what}", bad)
    return arr


def _leaf_eval(value, derivative, shape, name):
    def fn(pts, order):
        n = pts.shape[0]
        val = np.broadcast_to(np.asarray(value(pts), dtype=float), (n,) + shape).copy()
        if order == 0:
            return val, None
        if derivative is None:
            raise ConstructionError(f"field {name!r} has no analytic derivative")
        der = np.broadcast_to(
            np.asarray(derivative(pts), dtype=float), (n,) + shape + (3,)
        ).copy()
        return val, der

    return fn


class ScalarField:
    """Scalar field with an analytic gradient.

    Parameters
    ----------
    value : callable
        ``value(points) -> (N,)``.
    gradient : callable, optional
        ``gradient(points) -> (N, 3)``. Fields built without a gradient can
        be evaluated and finite-differenced but not differentiated
        analytically.
    name : str, optional
        Label used in error messages.
    """

    __slots__ = ("_fn", "name")

    def __init__(self, value, gradient=None, *, name: Optional[str] = None):
        self.name = name or "scalar"
        self._fn = _leaf_eval(value, gradient, (), self.name)

    @classmethod
    def _from_eval(cls, fn: EvalFn, name: str) -> "ScalarField":
        obj = cls.__new__(cls)
        obj._fn = fn
        obj.name = name
        return obj

    def evaluate(self, pts: np.ndarray, order: int = 1):
        return self._fn(pts, order)

    def __call__(self, p) -> np.ndarray:
        pts, single = as_points(p)
        val = self._fn(pts, 0)[0]
        return val[0] if single else val

    def gradient(self, p) -> np.ndarray:
        pts, single = as_points(p)
        g = self._fn(pts, 1)[1]
        return g[0] if single else g

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = as_scalar_field(other)
        a, b = self, other

        def fn(pts, order):
            va, ga = a._fn(pts, order)
            vb, gb = b._fn(pts, order)
            return va + vb, (None if order == 0 else ga + gb)

        return ScalarField._from_eval(fn, f"({a.name} + {b.name})")

    __radd__ = __add__

    def __neg__(self):
        a = self

        def fn(pts, order):
            v, g = a._fn(pts, order)
            return -v, (None if order == 0 else -g)

        return ScalarField._from_eval(fn, f"-{a.name}")

    def __sub__(self, other):
        return self + (-as_scalar_field(other))

    def __rsub__(self, other):
        return as_scalar_field(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, VectorField):
            return other * self
        other = as_scalar_field(other)
        a, b = self, other

        def fn(pts, order):
            va, ga = a._fn(pts, order)
            vb, gb = b._fn(pts, order)
            if order == 0:
                return va * vb, None
            return va * vb, va[:, None] * gb + vb[:, None] * ga

        return ScalarField._from_eval(fn, f"({a.name} * {b.name})")

    __rmul__ = __mul__

    def reciprocal(self) -> "ScalarField":
        a = self

        def fn(pts, order):
            v, g = a._fn(pts, order)
            inv = 1.0 / v
            return inv, (None if order == 0 else -(inv * inv)[:, None] * g)

        return ScalarField._from_eval(fn, f"1/{a.name}")

    def __truediv__(self, other):
        return self * as_scalar_field(other).reciprocal()

    def __rtruediv__(self, other):
        return as_scalar_field(other) * self.reciprocal()

    def __pow__(self, k):
        k = float(k)
        a = self

        def fn(pts, order):
            v, g = a._fn(pts, order)
            out = v**k
            if order == 0:
                return out, None
            return out, (k * v ** (k - 1.0))[:, None] * g

        return ScalarField._from_eval(fn, f"{a.name}**{k:g}")

    def sqrt(self) -> "ScalarField":
        a = self

        def fn(pts, order):
            v, g = a._fn(pts, order)
            r = np.sqrt(v)
            return r, (None if order == 0 else (0.5 / r)[:, None] * g)

        return ScalarField._from_eval(fn, f"sqrt({a.name})")

    def __repr__(self):
        return f"ScalarField({self.name})"


class VectorField:
    """Vector field with an analytic jacobian ``J[i, j] = d v_i / d x_j``.

    Parameters
    ----------
    value : callable
        ``value(points) -> (N, 3)``.
    jacobian : callable, optional
        ``jacobian(points) -> (N, 3, 3)``.
    name : str, optional
        Label used in error messages.
    """

    __slots__ = ("_fn", "name")

    def __init__(self, value, jacobian=None, *, name: Optional[str] = None):
        self.name = name or "vector"
        self._fn = _leaf_eval(value, jacobian, (3,), self.name)

    @classmethod
    def _from_eval(cls, fn: EvalFn, name: str) -> "VectorField":
        obj = cls.__new__(cls)
        obj._fn = fn
        obj.name = name
        return obj

    @classmethod
    def from_components(cls, sx, sy, sz, *, name: Optional[str] = None) -> "VectorField":
        comps = [as_scalar_field(c) for c in (sx, sy, sz)]

        def fn(pts, order):
            parts = [c._fn(pts, order) for c in comps]
            val = np.stack([p[0] for p in parts], axis=1)
            if order == 0:
                return val, None
            return val, np.stack([p[1] for p in parts], axis=1)

        return cls._from_eval(fn, name or "(" + ", ".join(c.name for c in comps) + ")")

    def evaluate(self, pts: np.ndarray, order: int = 1):
        return self._fn(pts, order)

    def __call__(self, p) -> np.ndarray:
        pts, single = as_points(p)
        val = self._fn(pts, 0)[0]
        return val[0] if single else val

    def jacobian(self, p) -> np.ndarray:
        pts, single = as_points(p)
        j = self._fn(pts, 1)[1]
        return j[0] if single else j

    def component(self, i: int) -> ScalarField:
        a = self

        def fn(pts, order):
            v, j = a._fn(pts, order)
            return v[:, i], (None if order == 0 else j[:, i, :])

        return ScalarField._from_eval(fn, f"{a.name}[{i}]")

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        a, b = self, other

        def fn(pts, order):
            va, ja = a._fn(pts, order)
            vb, jb = b._fn(pts, order)
            return va + vb, (None if order == 0 else ja + jb)

        return VectorField._from_eval(fn, f"({a.name} + {b.name})")

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        """Scale by a number or a :class:`ScalarField`."""
        if isinstance(other, VectorField):
            return NotImplemented
        s = as_scalar_field(other)
        v = self

        def fn(pts, order):
            vv, jv = v._fn(pts, order)
            vs, gs = s._fn(pts, order)
            val = vs[:, None] * vv
            if order == 0:
                return val, None
            return val, vs[:, None, None] * jv + vv[:, :, None] * gs[:, None, :]

        return VectorField._from_eval(fn, f"({s.name} * {v.name})")

    __rmul__ = __mul__

    def dot(self, other: "VectorField") -> ScalarField:
        a, b = self, other

        def fn(pts, order):
            va, ja = a._fn(pts, order)
            vb, jb = b._fn(pts, order)
            val = np.einsum("ni,ni->n", va, vb)
            if order == 0:
                return val, None
            return val, np.einsum("nij,ni->nj", ja, vb) + np.einsum("nij,ni->nj", jb, va)

        return ScalarField._from_eval(fn, f"({a.name} . {b.name})")

    def norm2(self) -> ScalarField:
        return self.dot(self)

    def cross(self, other: "VectorField") -> "VectorField":
        a, b = self, other

        def fn(pts, order):
            va, ja = a._fn(pts, order)
            vb, jb = b._fn(pts, order)
            val = np.cross(va, vb)
            if order == 0:
                return val, None
            # column j of the jacobian is d/dx_j (a x b)
            da = np.cross(np.swapaxes(ja, 1, 2), vb[:, None, :])
            db = np.cross(va[:, None, :], np.swapaxes(jb, 1, 2))
            return val, np.swapaxes(da + db, 1, 2)

        return VectorField._from_eval(fn, f"({a.name} x {b.name})")

    def __repr__(self):
        return f"VectorField({self.name})"


def as_scalar_field(x) -> ScalarField:
    if isinstance(x, ScalarField):
        return x
    if isinstance(x, VectorField):
        raise TypeError("expected a scalar, got a VectorField")
    return constant(float(x))


def constant(c: float) -> ScalarField:
    c = float(c)
    return ScalarField(lambda p: c, lambda p: 0.0, name=f"{c:g}")


def constant_vector(c) -> VectorField:
    c = np.asarray(c, dtype=float).reshape(3)
    return VectorField(lambda p: c, lambda p: 0.0, name=f"const{tuple(c.tolist())}")


def zero_vector() -> VectorField:
    return VectorField(lambda p: 0.0, lambda p: 0.0, name="0")


def coordinate(i: int) -> ScalarField:
    e = np.eye(3)[i]
    return ScalarField(lambda p: p[:, i], lambda p: e, name="xyz"[i])


def directional_derivative(v: VectorField, s: ScalarField) -> ScalarField:
    """``(v . grad) s`` as a value-only field (no second derivatives are kept)."""

    def value(p):
        return np.einsum("ni,ni->n", v._fn(p, 0)[0], s._fn(p, 1)[1])

    return ScalarField(value, None, name=f"({v.name} . grad {s.name})")


def polynomial(coeffs: dict) -> ScalarField:
    """Polynomial ``sum c * x**i * y**j * z**k`` from ``{(i, j, k): c}``."""
    terms = [(tuple(int(e) for e in k), float(c)) for k, c in coeffs.items() if c != 0.0]

    def value(p):
        out = np.zeros(p.shape[0])
        for (i, j, k), c in terms:
            out += c * p[:, 0] ** i * p[:, 1] ** j * p[:, 2] ** k
        return out

    def gradient(p):
        out = np.zeros((p.shape[0], 3))
        for e, c in terms:
            for d in range(3):
                if e[d] == 0:
                    continue
                ee = list(e)
                ee[d] -= 1
                out[:, d] += c * e[d] * p[:, 0] ** ee[0] * p[:, 1] ** ee[1] * p[:, 2] ** ee[2]
        return out

    return ScalarField(value, gradient, name="poly")


# -- derivative operators -------------------------------------------------

def divergence_from_jacobian(jac: np.ndarray) -> np.ndarray:
    return np.trace(jac, axis1=-2, axis2=-1)


def curl_from_jacobian(jac: np.ndarray) -> np.ndarray:
    return np.stack(
        [
            jac[..., 2, 1] - jac[..., 1, 2],
            jac[..., 0, 2] - jac[..., 2, 0],
            jac[..., 1, 0] - jac[..., 0, 1],
        ],
        axis=-1,
    )


def grad(s: ScalarField, p) -> np.ndarray:
    """Analytic gradient of ``s`` at ``p``."""
    pts, single = as_points(p)
    g = _require_finite(s.evaluate(pts, 1)[1], pts, f"gradient of {s.name}")
    return g[0] if single else g


def div(v: VectorField, p) -> np.ndarray:
    """Divergence of ``v`` from its analytic jacobian."""
    pts, single = as_points(p)
    j = _require_finite(v.evaluate(pts, 1)[1], pts, f"jacobian of {v.name}")
    d = divergence_from_jacobian(j)
    return d[0] if single else d


def curl(v: VectorField, p) -> np.ndarray:
    """Curl of ``v`` from its analytic jacobian."""
    pts, single = as_points(p)
    j = _require_finite(v.evaluate(pts, 1)[1], pts, f"jacobian of {v.name}")
    c = curl_from_jacobian(j)
    return c[0] if single else c


def default_fd_step(box=((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))) -> float:
    """``1e-3`` times the box diagonal over sqrt(3); 1e-3 on the unit box."""
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    return 1e-3 * float(np.linalg.norm(hi - lo)) / np.sqrt(3.0)


def _fd(fn, pts: np.ndarray, h: float, exclusion=None) -> np.ndarray:
    """Central differences of ``fn`` (values only). Derivative axis is last."""
    if not h > 0:
        raise ValueError("fd step must be positive")
    n = pts.shape[0]
    shifts = np.concatenate([np.eye(3) * h, -np.eye(3) * h])
    stencil = (pts[None, :, :] + shifts[:, None, :]).reshape(6 * n, 3)
    if exclusion is not None:
        hit = np.asarray(exclusion(stencil), dtype=bool)
        if np.any(hit):
            idx = int(np.argmax(hit)) % n
            raise StencilError("stencil point falls in excluded region", pts[idx])
    vals = np.asarray(fn(stencil), dtype=float)
    vals = vals.reshape((6, n) + vals.shape[1:])
    bad = ~np.all(np.isfinite(vals.reshape(6, n, -1)), axis=(0, 2))
    if np.any(bad):
        raise StencilError("non-finite value on stencil", pts[np.argmax(bad)])
    d = (vals[:3] - vals[3:]) / (2.0 * h)
    return np.moveaxis(d, 0, -1)


def fd_jacobian(v: VectorField, p, h: Optional[float] = None, exclusion=None) -> np.ndarray:
    """Second-order central-difference jacobian of ``v``; uses values only."""
    pts, single = as_points(p)
    j = _fd(lambda q: v.evaluate(q, 0)[0], pts, default_fd_step() if h is None else h, exclusion)
    return j[0] if single else j


def fd_gradient(s: ScalarField, p, h: Optional[float] = None, exclusion=None) -> np.ndarray:
    """Second-order central-difference gradient of ``s``; uses values only."""
    pts, single = as_points(p)
    g = _fd(lambda q: s.evaluate(q, 0)[0], pts, default_fd_step() if h is None else h, exclusion)
    return g[0] if single else g


def fd_apply(fn, p, h: Optional[float] = None, exclusion=None) -> np.ndarray:
    """Central differences of an arbitrary ``fn(points) -> (N, ...)`` callable."""
    pts, single = as_points(p)
    d = _fd(fn, pts, default_fd_step() if h is None else h, exclusion)
    return d[0] if single else d
