"""Scalar expression trees over a fixed semialgebraic vocabulary.

Every function handled by the library is a tree of the node kinds below:
rational constants, variables, arithmetic, guarded quotients, integer
powers, square roots of nonnegative arguments, absolute value, max/min,
clamp-to-zero, a zero-gated product (extension by zero past a gate
function's support), and entries of guarded matrix computations (solve,
inverse, column-span projector, Cholesky factor, definite/indefinite
pencil sign-projectors).

Evaluation is vectorized over an (N, dim) batch of points and memoized per
node object, so shared subtrees are computed once.  Evaluating outside a
declared guard raises :class:`GuardViolation` with a witness point; it is
never a silent NaN.

Each node carries a smoothness lower bound: how many continuous
derivatives the function is guaranteed to have on its guarded domain.  The
bound of a composite is the minimum over its children; kinked nodes (abs,
max, min, clamp, sqrt) bound it by zero, except that an integer power of a
clamp or abs raises the kink bound to ``exponent - 1``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, GuardViolation

SMOOTH = math.inf

_DEFAULT_GUARD_TOL = 1e-12


class EvalContext:
    """Holds one batch of points plus per-node result caches."""

    def __init__(self, points: np.ndarray):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2:
            raise DimensionMismatch(f"points must be (N, dim), got shape {points.shape}")
        self.points = points
        self.cache: dict[int, np.ndarray] = {}
        self.group_cache: dict[int, np.ndarray] = {}
        self.sub_contexts: dict[tuple[int, bytes], EvalContext] = {}

    def sub(self, gate_id: int, mask: np.ndarray) -> "EvalContext":
        key = (gate_id, mask.tobytes())
        ctx = self.sub_contexts.get(key)
        if ctx is None:
            ctx = EvalContext(self.points[mask])
            self.sub_contexts[key] = ctx
        return ctx


class Expr:
    """Base expression node.  Nodes are immutable and identity-hashed."""

    __slots__ = ()

    def eval(self, ctx: EvalContext) -> np.ndarray:
        key = id(self)
        hit = ctx.cache.get(key)
        if hit is None:
            hit = self._eval(ctx)
            ctx.cache[key] = hit
        return hit

    def _eval(self, ctx: EvalContext) -> np.ndarray:
        raise NotImplementedError

    def children(self) -> tuple["Expr", ...]:
        return ()

    def smoothness(self) -> float:
        memo: dict[int, float] = {}
        return _smoothness(self, memo)

    def _own_smoothness(self, child_bounds: list[float]) -> float:
        return min(child_bounds, default=SMOOTH)

    # Operator sugar.  Division builds a guarded quotient with the default
    # guard tolerance; callers with domain knowledge construct Div directly.
    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Sub(Const(0.0), self)

    def __pow__(self, k):
        return Pow(self, int(k))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.integer, np.floating)):
        return Const(float(value))
    raise TypeError(f"cannot interpret {value!r} as an expression")


def _smoothness(node: Expr, memo: dict[int, float]) -> float:
    key = id(node)
    hit = memo.get(key)
    if hit is None:
        bounds = [_smoothness(c, memo) for c in node.children()]
        hit = node._own_smoothness(bounds)
        memo[key] = hit
    return hit


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        object.__setattr__(self, "value", float(value))

    def __setattr__(self, *a):
        raise AttributeError("Const is immutable")

    def _eval(self, ctx):
        return np.full(ctx.points.shape[0], self.value)

    def __repr__(self):
        return repr(self.value)


class Var(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise DimensionMismatch("variable index must be nonnegative")
        object.__setattr__(self, "index", int(index))

    def __setattr__(self, *a):
        raise AttributeError("Var is immutable")

    def _eval(self, ctx):
        if self.index >= ctx.points.shape[1]:
            raise DimensionMismatch(
                f"expression uses x{self.index} but points have dimension {ctx.points.shape[1]}"
            )
        return ctx.points[:, self.index]

    def __repr__(self):
        return f"x{self.index}"


class _Binary(Expr):
    __slots__ = ("a", "b")

    def __init__(self, a: Expr, b: Expr):
        object.__setattr__(self, "a", as_expr(a))
        object.__setattr__(self, "b", as_expr(b))

    def __setattr__(self, *a):
        raise AttributeError("nodes are immutable")

    def children(self):
        return (self.a, self.b)


class Add(_Binary):
    __slots__ = ()

    def _eval(self, ctx):
        return self.a.eval(ctx) + self.b.eval(ctx)

    def __repr__(self):
        return f"({self.a!r} + {self.b!r})"


class Sub(_Binary):
    __slots__ = ()

    def _eval(self, ctx):
        return self.a.eval(ctx) - self.b.eval(ctx)

    def __repr__(self):
        return f"({self.a!r} - {self.b!r})"


class Mul(_Binary):
    __slots__ = ()

    def _eval(self, ctx):
        return self.a.eval(ctx) * self.b.eval(ctx)

    def __repr__(self):
        return f"({self.a!r} * {self.b!r})"


class Div(_Binary):
    """Guarded quotient: the denominator must be nonvanishing on the chart
    the expression is used on.  |den| <= guard_tol at a point is an error."""

    __slots__ = ("guard_tol",)

    def __init__(self, num: Expr, den: Expr, guard_tol: float = _DEFAULT_GUARD_TOL):
        super().__init__(num, den)
        object.__setattr__(self, "guard_tol", float(guard_tol))

    def _eval(self, ctx):
        den = self.b.eval(ctx)
        bad = np.abs(den) <= self.guard_tol
        if bad.any():
            i = int(np.argmax(bad))
            raise GuardViolation(
                f"quotient denominator {abs(den[i]):.3e} within guard {self.guard_tol:.1e}",
                point=ctx.points[i],
            )
        return self.a.eval(ctx) / den

    def __repr__(self):
        return f"({self.a!r} / {self.b!r})"


class Pow(Expr):
    """Integer power, exponent >= 1."""

    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        if exponent < 1:
            raise ValueError("Pow exponent must be a positive integer")
        object.__setattr__(self, "base", as_expr(base))
        object.__setattr__(self, "exponent", int(exponent))

    def __setattr__(self, *a):
        raise AttributeError("Pow is immutable")

    def children(self):
        return (self.base,)

    def _eval(self, ctx):
        return self.base.eval(ctx) ** self.exponent

    def _own_smoothness(self, child_bounds):
        # clamp(u)^(r+1) is C^r wherever u is smooth; same for |u|^(r+1).
        if isinstance(self.base, (Clamp, Abs)):
            inner = [
                _smoothness(c, {}) for c in self.base.children()
            ]
            return min([self.exponent - 1, *inner])
        return min(child_bounds, default=SMOOTH)

    def __repr__(self):
        return f"({self.base!r})^{self.exponent}"


class Sqrt(Expr):
    """Square root; the argument must be nonnegative on the declared domain.
    Values in [-guard_tol, 0) are treated as exact zeros."""

    __slots__ = ("arg", "guard_tol")

    def __init__(self, arg: Expr, guard_tol: float = _DEFAULT_GUARD_TOL):
        object.__setattr__(self, "arg", as_expr(arg))
        object.__setattr__(self, "guard_tol", float(guard_tol))

    def __setattr__(self, *a):
        raise AttributeError("Sqrt is immutable")

    def children(self):
        return (self.arg,)

    def _eval(self, ctx):
        v = self.arg.eval(ctx)
        bad = v < -self.guard_tol
        if bad.any():
            i = int(np.argmax(bad))
            raise GuardViolation(
                f"sqrt argument {v[i]:.3e} is negative", point=ctx.points[i]
            )
        return np.sqrt(np.maximum(v, 0.0))

    def _own_smoothness(self, child_bounds):
        return 0.0

    def __repr__(self):
        return f"sqrt({self.arg!r})"


class Abs(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", as_expr(arg))

    def __setattr__(self, *a):
        raise AttributeError("Abs is immutable")

    def children(self):
        return (self.arg,)

    def _eval(self, ctx):
        return np.abs(self.arg.eval(ctx))

    def _own_smoothness(self, child_bounds):
        return 0.0

    def __repr__(self):
        return f"abs({self.arg!r})"


class Max(_Binary):
    __slots__ = ()

    def _eval(self, ctx):
        return np.maximum(self.a.eval(ctx), self.b.eval(ctx))

    def _own_smoothness(self, child_bounds):
        return 0.0

    def __repr__(self):
        return f"max({self.a!r}, {self.b!r})"


class Min(_Binary):
    __slots__ = ()

    def _eval(self, ctx):
        return np.minimum(self.a.eval(ctx), self.b.eval(ctx))

    def _own_smoothness(self, child_bounds):
        return 0.0

    def __repr__(self):
        return f"min({self.a!r}, {self.b!r})"


class Clamp(Expr):
    """clamp-to-zero: max(arg, 0)."""

    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        object.__setattr__(self, "arg", as_expr(arg))

    def __setattr__(self, *a):
        raise AttributeError("Clamp is immutable")

    def children(self):
        return (self.arg,)

    def _eval(self, ctx):
        return np.maximum(self.arg.eval(ctx), 0.0)

    def _own_smoothness(self, child_bounds):
        return 0.0

    def __repr__(self):
        return f"clamp({self.arg!r})"


class ZeroGate(Expr):
    """gate > 0  ->  gate * payload;  gate <= 0  ->  0.

    The payload is only evaluated where the gate is positive, so payload
    guards need to hold only there.  Used to extend chart-local data by
    zero past the support of a partition-of-unity weight, mirroring the
    piecewise extension in the section and coefficient constructions.  The
    smoothness bound min(gate, payload) relies on the construction
    discipline that the gate's support closure sits inside the payload's
    domain.
    """

    __slots__ = ("gate", "payload")

    def __init__(self, gate: Expr, payload: Expr):
        object.__setattr__(self, "gate", as_expr(gate))
        object.__setattr__(self, "payload", as_expr(payload))

    def __setattr__(self, *a):
        raise AttributeError("ZeroGate is immutable")

    def children(self):
        return (self.gate, self.payload)

    def _eval(self, ctx):
        gate = self.gate.eval(ctx)
        out = np.zeros_like(gate)
        mask = gate > 0.0
        if mask.any():
            sub = ctx.sub(id(self.gate), mask)
            out[mask] = gate[mask] * self.payload.eval(sub)
        return out

    def __repr__(self):
        return f"zerogate({self.gate!r}, {self.payload!r})"


# ---------------------------------------------------------------------------
# Guarded matrix computations.  A MatrixGroup owns the child expressions of
# one or two matrices and an operation tag; MatEntry nodes select single
# entries of the result.  The whole group is computed once per batch.

SOLVE = "solve"            # X = A^-1 B          guard: min sv(A)
INV = "inv"                # X = A^-1            guard: min sv(A)
COLSPAN_PROJ = "colproj"   # P = A (A^T A)^-1 A^T  guard: min sv(A)
CHOL = "chol"              # lower L, S = L L^T  guard: S SPD
PENCIL_PROJ_POS = "pencil+"  # positive sign-projector of pencil (S, G)
PENCIL_PROJ_NEG = "pencil-"  # negative sign-projector of pencil (S, G)
PENCIL_SQRT = "pencilsqrt"   # principal sqrt of G^-1 S, both SPD


class MatrixGroup:
    """Shared payload of MatEntry nodes: matrices of Exprs plus an op tag."""

    __slots__ = ("op", "a", "b", "a_shape", "b_shape", "guard_tol", "out_shape")

    def __init__(self, op, a, b=None, guard_tol=1e-9):
        a = _freeze_matrix(a)
        b = _freeze_matrix(b) if b is not None else None
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a_shape", (len(a), len(a[0])))
        object.__setattr__(self, "b_shape", (len(b), len(b[0])) if b else None)
        object.__setattr__(self, "guard_tol", float(guard_tol))
        object.__setattr__(self, "out_shape", self._out_shape())

    def __setattr__(self, *a):
        raise AttributeError("MatrixGroup is immutable")

    def _out_shape(self):
        n, m = self.a_shape
        if self.op == SOLVE:
            if n != m:
                raise DimensionMismatch("solve needs a square left matrix")
            return (n, self.b_shape[1])
        if self.op == INV:
            if n != m:
                raise DimensionMismatch("inverse needs a square matrix")
            return (n, n)
        if self.op == COLSPAN_PROJ:
            return (n, n)
        if self.op == CHOL:
            return (n, n)
        if self.op in (PENCIL_PROJ_POS, PENCIL_PROJ_NEG, PENCIL_SQRT):
            return (n, n)
        raise ValueError(f"unknown matrix op {self.op!r}")

    def child_exprs(self):
        out = [e for row in self.a for e in row]
        if self.b is not None:
            out.extend(e for row in self.b for e in row)
        return out

    def compute(self, ctx: EvalContext) -> np.ndarray:
        key = id(self)
        hit = ctx.group_cache.get(key)
        if hit is not None:
            return hit
        a = _eval_matrix(self.a, ctx)
        if self.op == SOLVE:
            b = _eval_matrix(self.b, ctx)
            self._guard_sv(a, ctx)
            out = np.linalg.solve(a, b)
        elif self.op == INV:
            self._guard_sv(a, ctx)
            out = np.linalg.inv(a)
        elif self.op == COLSPAN_PROJ:
            self._guard_sv(a, ctx)
            gram = np.swapaxes(a, 1, 2) @ a
            out = a @ np.linalg.solve(gram, np.swapaxes(a, 1, 2))
        elif self.op == CHOL:
            self._guard_spd(a, ctx)
            out = np.linalg.cholesky(a)
        elif self.op in (PENCIL_PROJ_POS, PENCIL_PROJ_NEG):
            g = _eval_matrix(self.b, ctx)
            self._guard_spd(g, ctx, name="pencil metric")
            out = _pencil_projector(a, g, self.op == PENCIL_PROJ_POS,
                                    self.guard_tol, ctx)
        elif self.op == PENCIL_SQRT:
            g = _eval_matrix(self.b, ctx)
            self._guard_spd(a, ctx, name="pencil sqrt argument")
            self._guard_spd(g, ctx, name="pencil sqrt metric")
            out = _pencil_sqrt(a, g)
        else:  # pragma: no cover - constructor rejects unknown ops
            raise ValueError(self.op)
        ctx.group_cache[key] = out
        return out

    def _guard_sv(self, a, ctx):
        sv = np.linalg.svd(a, compute_uv=False)
        bad = sv[:, -1] <= self.guard_tol
        if bad.any():
            i = int(np.argmax(bad))
            raise GuardViolation(
                f"matrix {self.op} guard: smallest singular value "
                f"{sv[i, -1]:.3e} <= {self.guard_tol:.1e}",
                point=ctx.points[i],
            )

    def _guard_spd(self, s, ctx, name="cholesky argument"):
        w = np.linalg.eigvalsh(0.5 * (s + np.swapaxes(s, 1, 2)))
        bad = w[:, 0] <= self.guard_tol
        if bad.any():
            i = int(np.argmax(bad))
            raise GuardViolation(
                f"{name} not positive definite: min eigenvalue {w[i, 0]:.3e}",
                point=ctx.points[i],
            )


def _pencil_projector(s, g, positive, tol, ctx):
    """Spectral projector onto the positive/negative eigenspace of the
    G-self-adjoint pencil G^-1 S, via the Cholesky-whitened symmetric form."""
    ell = np.linalg.cholesky(g)
    # white = L^-1 S L^-T, symmetric with the pencil's eigenvalues
    tmp = np.linalg.solve(ell, s)
    white = np.linalg.solve(ell, np.swapaxes(tmp, 1, 2))
    white = 0.5 * (white + np.swapaxes(white, 1, 2))
    w, z = np.linalg.eigh(white)
    bad = np.abs(w).min(axis=1) <= tol
    if bad.any():
        i = int(np.argmax(bad))
        raise GuardViolation(
            f"pencil eigenvalue {np.abs(w[i]).min():.3e} within guard {tol:.1e}",
            point=ctx.points[i],
        )
    mask = (w > 0.0) if positive else (w < 0.0)
    zsel = z * mask[:, None, :]
    # projector in original coordinates: L^-T Z_sel Z_sel^T L^T
    lt = np.swapaxes(ell, 1, 2)
    return np.linalg.solve(lt, zsel @ np.swapaxes(zsel, 1, 2) @ lt)


def _pencil_sqrt(s, g):
    """Principal square root of G^-1 S for SPD S and G.

    Congruence-covariant, so chartwise values glue into a bundle morphism:
    if S, G transform by h^T . h then the square root conjugates by h^-1 . h.
    """
    ell = np.linalg.cholesky(g)
    tmp = np.linalg.solve(ell, s)
    white = np.linalg.solve(ell, np.swapaxes(tmp, 1, 2))
    white = 0.5 * (white + np.swapaxes(white, 1, 2))
    w, z = np.linalg.eigh(white)
    root = (z * np.sqrt(w)[:, None, :]) @ np.swapaxes(z, 1, 2)
    lt = np.swapaxes(ell, 1, 2)
    return np.linalg.solve(lt, root @ lt)


def _freeze_matrix(rows):
    frozen = tuple(tuple(as_expr(e) for e in row) for row in rows)
    if not frozen or any(len(r) != len(frozen[0]) for r in frozen):
        raise DimensionMismatch("matrix rows must be nonempty and equal length")
    return frozen


def _eval_matrix(rows, ctx) -> np.ndarray:
    n, m = len(rows), len(rows[0])
    out = np.empty((ctx.points.shape[0], n, m))
    for i in range(n):
        for j in range(m):
            out[:, i, j] = rows[i][j].eval(ctx)
    return out


class MatEntry(Expr):
    """One entry of a guarded matrix computation."""

    __slots__ = ("group", "row", "col")

    def __init__(self, group: MatrixGroup, row: int, col: int):
        n, m = group.out_shape
        if not (0 <= row < n and 0 <= col < m):
            raise DimensionMismatch("matrix entry index out of range")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "row", int(row))
        object.__setattr__(self, "col", int(col))

    def __setattr__(self, *a):
        raise AttributeError("MatEntry is immutable")

    def children(self):
        return tuple(self.group.child_exprs())

    def _eval(self, ctx):
        return self.group.compute(ctx)[:, self.row, self.col]

    def __repr__(self):
        return f"{self.group.op}[{self.row},{self.col}]"


# ---------------------------------------------------------------------------
# Public helpers.


def evaluate(expression: Expr, points) -> np.ndarray:
    """Evaluate an expression on an (N, dim) batch; returns shape (N,)."""
    return expression.eval(EvalContext(points))


def evaluate_at(expression: Expr, point) -> float:
    """Evaluate at a single point given as a sequence of coordinates."""
    arr = np.asarray(point, dtype=float).reshape(1, -1)
    return float(expression.eval(EvalContext(arr))[0])


def max_var_index(expression: Expr) -> int:
    """Largest variable index appearing, or -1 for constant expressions."""
    seen: set[int] = set()
    best = -1
    stack = [expression]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Var):
            best = max(best, node.index)
        stack.extend(node.children())
    return best


def substitute(expression: Expr, mapping: dict[int, Expr]) -> Expr:
    """Replace variables by expressions, rebuilding shared nodes once."""
    memo: dict[int, Expr] = {}
    group_memo: dict[int, MatrixGroup] = {}
    return _subst(expression, mapping, memo, group_memo)


def _subst(node, mapping, memo, group_memo):
    key = id(node)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(node, Var):
        out = mapping.get(node.index, node)
    elif isinstance(node, Const):
        out = node
    elif isinstance(node, Add):
        out = Add(_subst(node.a, mapping, memo, group_memo),
                  _subst(node.b, mapping, memo, group_memo))
    elif isinstance(node, Sub):
        out = Sub(_subst(node.a, mapping, memo, group_memo),
                  _subst(node.b, mapping, memo, group_memo))
    elif isinstance(node, Mul):
        out = Mul(_subst(node.a, mapping, memo, group_memo),
                  _subst(node.b, mapping, memo, group_memo))
    elif isinstance(node, Div):
        out = Div(_subst(node.a, mapping, memo, group_memo),
                  _subst(node.b, mapping, memo, group_memo),
                  guard_tol=node.guard_tol)
    elif isinstance(node, Pow):
        out = Pow(_subst(node.base, mapping, memo, group_memo), node.exponent)
    elif isinstance(node, Sqrt):
        out = Sqrt(_subst(node.arg, mapping, memo, group_memo),
                   guard_tol=node.guard_tol)
    elif isinstance(node, Abs):
        out = Abs(_subst(node.arg, mapping, memo, group_memo))
    elif isinstance(node, Max):
        out = Max(_subst(node.a, mapping, memo, group_memo),
                  _subst(node.b, mapping, memo, group_memo))
    elif isinstance(node, Min):
        out = Min(_subst(node.a, mapping, memo, group_memo),
                  _subst(node.b, mapping, memo, group_memo))
    elif isinstance(node, Clamp):
        out = Clamp(_subst(node.arg, mapping, memo, group_memo))
    elif isinstance(node, ZeroGate):
        out = ZeroGate(_subst(node.gate, mapping, memo, group_memo),
                       _subst(node.payload, mapping, memo, group_memo))
    elif isinstance(node, MatEntry):
        g = node.group
        gout = group_memo.get(id(g))
        if gout is None:
            a = tuple(tuple(_subst(e, mapping, memo, group_memo) for e in row)
                      for row in g.a)
            b = None
            if g.b is not None:
                b = tuple(tuple(_subst(e, mapping, memo, group_memo) for e in row)
                          for row in g.b)
            gout = MatrixGroup(g.op, a, b, guard_tol=g.guard_tol)
            group_memo[id(g)] = gout
        out = MatEntry(gout, node.row, node.col)
    else:  # pragma: no cover
        raise TypeError(f"unknown node type {type(node)!r}")
    memo[key] = out
    return out
