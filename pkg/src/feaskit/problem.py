"""Convex-inequality oracles, ellipsoid instances and their generation.

A feasibility instance is a list of convex functions ``f_i`` over R^n; the
target set is ``{x : f_i(x) <= 0 for all i}``. Solvers only ever see values
and one subgradient per function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CannotEscape, DimensionMismatch, InvalidParams, ParseError

SCHEMA = "cfp-ellipsoids-v1"
SYMMETRY_RTOL = 1e-12
MAX_DOUBLINGS = 60
# a start must violate some constraint by more than rounding noise
START_VIOLATION_FLOOR = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator backed by the counter-based Philox bit generator."""
    return np.random.Generator(np.random.Philox(int(seed)))


class ConvexInequalityOracle:
    """Interface for a convex constraint ``f(x) <= 0``.

    Subclasses provide `dim`, `value` and `subgradient`.
    """

    dim: int

    def value(self, x) -> float:
        raise NotImplementedError

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError


class Ellipsoid(ConvexInequalityOracle):
    """``f(x) = x^T A x + 2 x^T b - c`` with A symmetric positive definite, c > 0."""

    def __init__(self, A, b, c):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        c = float(c)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise DimensionMismatch(f"A must be square and non-empty, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise DimensionMismatch(f"b has shape {b.shape}, expected ({A.shape[0]},)")
        scale = max(1.0, float(np.max(np.abs(A))))
        if float(np.max(np.abs(A - A.T))) > SYMMETRY_RTOL * scale:
            raise ValueError("A is not symmetric")
        try:
            np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            raise ValueError("A is not positive definite") from None
        if not (c > 0.0 and math.isfinite(c)):
            raise ValueError(f"c must be a positive finite scalar, got {c!r}")
        A.setflags(write=False)
        b.setflags(write=False)
        self.A, self.b, self.c = A, b, c
        self.dim = A.shape[0]

    def value(self, x) -> float:
        x = _check_dim(x, self.dim)
        return float(x @ (self.A @ x) + 2.0 * (x @ self.b) - self.c)

    def subgradient(self, x) -> np.ndarray:
        x = _check_dim(x, self.dim)
        return 2.0 * (self.A @ x + self.b)

    def __repr__(self):
        return f"Ellipsoid(dim={self.dim}, c={self.c!r})"


class AffineOracle(ConvexInequalityOracle):
    """``f(x) = a^T x - beta``; a halfspace written as a constraint function."""

    def __init__(self, a, beta):
        a = np.atleast_1d(np.array(a, dtype=float))
        a.setflags(write=False)
        self.a = a
        self.beta = float(beta)
        self.dim = a.size

    def value(self, x) -> float:
        x = _check_dim(x, self.dim)
        return float(self.a @ x - self.beta)

    def subgradient(self, x) -> np.ndarray:
        _check_dim(x, self.dim)
        return self.a.copy()

    def __repr__(self):
        return f"AffineOracle(a={self.a.tolist()}, beta={self.beta!r})"


def _check_dim(x, n) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatch(f"expected a point of dimension {n}, got shape {x.shape}")
    return x


class CfpInstance:
    """A convex feasibility instance: m oracles over R^n.

    Parameters
    ----------
    oracles : sequence of ConvexInequalityOracle
        All of the same dimension; at least one.
    slater_point : array_like, optional
        A point with ``f_i(slater_point) < 0`` for every i. Its margin
        ``min_i -f_i(slater_point)`` is computed and stored.
    id : str
        Free-form identifier.
    """

    def __init__(self, oracles, slater_point=None, id="instance"):
        oracles = tuple(oracles)
        if not oracles:
            raise ValueError("an instance needs at least one oracle")
        n = oracles[0].dim
        for i, o in enumerate(oracles):
            if o.dim != n:
                raise DimensionMismatch(f"oracle {i} has dimension {o.dim}, expected {n}")
        self.oracles = oracles
        self.n = n
        self.m = len(oracles)
        self.id = str(id)

        self.slater_point = None
        self.slater_margin = None
        if slater_point is not None:
            s = _check_dim(slater_point, n).copy()
            s.setflags(write=False)
            margin = -max(o.value(s) for o in oracles)
            if not margin > 0.0:
                raise ValueError(f"slater point is not strictly feasible (margin {margin!r})")
            self.slater_point = s
            self.slater_margin = margin

        # stacked data lets all-ellipsoid instances evaluate in one shot
        self._stack = None
        if all(isinstance(o, Ellipsoid) for o in oracles):
            A = np.stack([o.A for o in oracles])
            self._stack = (
                A.reshape(self.m * n, n),
                np.stack([o.b for o in oracles]),
                np.array([o.c for o in oracles]),
            )

    def __repr__(self):
        return f"CfpInstance(id={self.id!r}, n={self.n}, m={self.m})"

    def values(self, x) -> np.ndarray:
        """All constraint values ``(f_1(x), ..., f_m(x))``."""
        return self.evaluate(x)[0]

    def evaluate(self, x):
        """Return ``(values, subgradients)`` with shapes ``(m,)`` and ``(m, n)``."""
        x = _check_dim(x, self.n)
        if self._stack is not None:
            A_flat, B, c = self._stack
            Ax = (A_flat @ x).reshape(self.m, self.n)
            vals = Ax @ x + 2.0 * (B @ x) - c
            return vals, 2.0 * (Ax + B)
        vals = np.array([o.value(x) for o in self.oracles])
        grads = np.stack([o.subgradient(x) for o in self.oracles])
        return vals, grads


def max_violation(inst: CfpInstance, x) -> float:
    """``max_i f_i(x)``; x is feasible iff this is <= 0."""
    return float(np.max(inst.values(x)))


def is_feasible(inst: CfpInstance, x, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return max_violation(inst, x) <= tol


@dataclass(frozen=True)
class GenParams:
    """Ranges for random ellipsoid generation. ``b_scale=None`` means 1/sqrt(n)."""

    eig_lo: float = 0.5
    eig_hi: float = 2.0
    b_scale: float | None = None
    c_lo: float = 1.0
    c_hi: float = 2.0

    def validate(self):
        if not (0 < self.eig_lo <= self.eig_hi and math.isfinite(self.eig_hi)):
            raise InvalidParams(f"need 0 < eig_lo <= eig_hi, got {self.eig_lo}, {self.eig_hi}")
        if not (0 < self.c_lo <= self.c_hi and math.isfinite(self.c_hi)):
            raise InvalidParams(f"need 0 < c_lo <= c_hi, got {self.c_lo}, {self.c_hi}")
        if self.b_scale is not None and not (self.b_scale >= 0 and math.isfinite(self.b_scale)):
            raise InvalidParams(f"b_scale must be finite and nonnegative, got {self.b_scale}")


def _random_spd(rng, n, eig_lo, eig_hi):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    # fix the sign ambiguity of QR so Q depends only on the Gaussian draw
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    eigs = np.exp(rng.uniform(math.log(eig_lo), math.log(eig_hi), size=n))
    A = (Q.T * eigs) @ Q
    return 0.5 * (A + A.T)


def generate_ellipsoid_instance(n: int, m: int, seed: int, params: GenParams | None = None) -> CfpInstance:
    """Random intersection of m ellipsoids with the origin as Slater point.

    Each ``A_i = Q^T diag(lambda) Q`` with Q from the QR factor of a Gaussian
    matrix and log-uniform eigenvalues; ``c_i > 0`` makes ``f_i(0) = -c_i``.
    Output is a deterministic function of ``(n, m, seed, params)``.
    """
    params = params or GenParams()
    params.validate()
    if n < 1 or m < 1:
        raise InvalidParams(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    b_scale = 1.0 / math.sqrt(n) if params.b_scale is None else params.b_scale
    rng = make_rng(seed)
    oracles = []
    for _ in range(m):
        A = _random_spd(rng, n, params.eig_lo, params.eig_hi)
        b = b_scale * rng.standard_normal(n)
        c = rng.uniform(params.c_lo, params.c_hi)
        oracles.append(Ellipsoid(A, b, c))
    return CfpInstance(oracles, slater_point=np.zeros(n), id=f"ell-n{n}-m{m}-s{seed}")


def sample_infeasible_start(inst: CfpInstance, seed: int, radius: float = 1.0) -> np.ndarray:
    """Infeasible start point along a random ray from the Slater point.

    The distance starts at `radius` and doubles until some constraint is
    violated by more than `START_VIOLATION_FLOOR`.
    """
    if inst.slater_point is None:
        raise ValueError("instance has no Slater point")
    if not radius > 0:
        raise ValueError("radius must be positive")
    rng = make_rng(seed)
    d = rng.standard_normal(inst.n)
    d /= np.linalg.norm(d)
    r = float(radius)
    for _ in range(MAX_DOUBLINGS + 1):
        x = inst.slater_point + r * d
        if max_violation(inst, x) > START_VIOLATION_FLOOR:
            return x
        r *= 2.0
    raise CannotEscape(f"no violated constraint within {MAX_DOUBLINGS} doublings of the radius")


def write_instance(inst: CfpInstance) -> bytes:
    """Serialize an all-ellipsoid instance to the ``cfp-ellipsoids-v1`` JSON format."""
    if not all(isinstance(o, Ellipsoid) for o in inst.oracles):
        raise TypeError("only ellipsoid instances can be serialized")
    doc = {
        "schema": SCHEMA,
        "id": inst.id,
        "n": inst.n,
        "m": inst.m,
        "slater_point": None if inst.slater_point is None else inst.slater_point.tolist(),
        "ellipsoids": [{"A": o.A.tolist(), "b": o.b.tolist(), "c": o.c} for o in inst.oracles],
    }
    # json writes floats with repr, which round-trips exactly
    return (json.dumps(doc, indent=1, allow_nan=False) + "\n").encode()


def _field(doc, key, path):
    if key not in doc:
        raise ParseError("missing field", field=f"{path}{key}")
    return doc[key]


def _float_array(value, shape, path):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("expected numbers", field=path) from None
    if arr.shape != shape:
        raise ParseError(f"expected shape {shape}, got {arr.shape}", field=path)
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite number", field=path)
    return arr


def read_instance(data) -> CfpInstance:
    """Parse bytes produced by `write_instance`; raises ParseError on bad input."""
    if isinstance(data, bytes):
        data = data.decode()
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if _field(doc, "schema", "") != SCHEMA:
        raise ParseError(f"unsupported schema {doc['schema']!r}", field="schema")
    n, m = _field(doc, "n", ""), _field(doc, "m", "")
    if not isinstance(n, int) or n < 1:
        raise ParseError("n must be a positive integer", field="n")
    if not isinstance(m, int) or m < 1:
        raise ParseError("m must be a positive integer", field="m")
    ells = _field(doc, "ellipsoids", "")
    if not isinstance(ells, list) or len(ells) != m:
        raise ParseError(f"expected a list of {m} ellipsoids", field="ellipsoids")
    oracles = []
    for i, e in enumerate(ells):
        path = f"ellipsoids[{i}]."
        if not isinstance(e, dict):
            raise ParseError("expected an object", field=path[:-1])
        A = _float_array(_field(e, "A", path), (n, n), path + "A")
        b = _float_array(_field(e, "b", path), (n,), path + "b")
        c = _field(e, "c", path)
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise ParseError("c must be a number", field=path + "c")
        try:
            oracles.append(Ellipsoid(A, b, c))
        except ValueError as exc:
            bad = "c" if "c must" in str(exc) else "A"
            raise ParseError(str(exc), field=path + bad) from None
    slater = doc.get("slater_point")
    if slater is not None:
        slater = _float_array(slater, (n,), "slater_point")
    try:
        return CfpInstance(oracles, slater_point=slater, id=doc.get("id", "instance"))
    except ValueError as exc:
        raise ParseError(str(exc), field="slater_point") from None
