"""Bilinear form fields over cocycle bundles.

A form field is one symmetric matrix of expressions per chart, compatible
across overlaps through the transitions.  Diagonalization runs a pivoted
congruence Gram-Schmidt (columns normalized by |s(w,w)|^(-1/2)); where all
candidate diagonals vanish a hyperbolic-pair fix restores a usable pivot.
The positive/negative splitting uses the sign-projectors of the pencil
G^-1 S against a positive reference form, which is chart-free up to
conjugation; the two-chart convex-blend construction is kept as a separate
operation for cross-validation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .bundles import (
    BundleRep,
    CheckReport,
    MorphismField,
    ProjectorField,
    check_isomorphism,
    dual,
    gauss_embedding,
    whitney_sum,
)
from .errors import (
    BaseMismatch,
    BundleformsError,
    DimensionMismatch,
    InconsistentSignature,
    NearSingular,
    NotPositive,
    OmegaViolation,
)
from .matexpr import (
    em_add,
    em_block_diag,
    em_chol,
    em_colspan_proj,
    em_const,
    em_eval,
    em_hstack,
    em_identity,
    em_inv,
    em_kron,
    em_mul,
    em_pencil_proj,
    em_pencil_sqrt,
    em_scale,
    em_shape,
    em_solve,
    em_sub,
    em_submatrix,
    em_transpose,
    em_vstack,
)
from .semialg import Condition, GT, SamplePlan, SemialgebraicSet

NEARLY_SINGULAR = 1e-12
PIVOT_RATIO = 1e-10


@dataclass(frozen=True)
class SignatureType:
    pos: int
    neg: int

    @property
    def rank(self) -> int:
        return self.pos + self.neg

    @property
    def difference(self) -> int:
        return self.pos - self.neg

    def __iter__(self):
        return iter((self.pos, self.neg))

    def __repr__(self):
        return f"({self.pos},{self.neg})"


def j_matrix(sig: SignatureType) -> np.ndarray:
    return np.diag([1.0] * sig.pos + [-1.0] * sig.neg)


class FormField:
    """Per-chart symmetric matrices of expressions over a bundle."""

    def __init__(self, bundle: BundleRep, mats, name: str = ""):
        self.bundle = bundle
        self.mats = [tuple(tuple(ex.as_expr(e) for e in row) for row in m)
                     for m in mats]
        self.name = name
        d = bundle.rank
        if len(self.mats) != bundle.cover.n_charts:
            raise DimensionMismatch("need one matrix field per chart")
        for m in self.mats:
            if d and em_shape(m) != (d, d):
                raise DimensionMismatch("form matrix size differs from rank")

    @classmethod
    def from_upper(cls, bundle: BundleRep, uppers, name: str = "") -> "FormField":
        """Build from upper-triangle entries so symmetry holds structurally."""
        d = bundle.rank
        mats = []
        for upper in uppers:
            grid = [[None] * d for _ in range(d)]
            k = 0
            for i in range(d):
                for j in range(i, d):
                    e = ex.as_expr(upper[k])
                    grid[i][j] = e
                    grid[j][i] = e
                    k += 1
            if k != len(upper):
                raise DimensionMismatch("upper triangle length mismatch")
            mats.append(tuple(tuple(row) for row in grid))
        return cls(bundle, mats, name)

    @classmethod
    def constant(cls, bundle: BundleRep, matrix, name: str = "") -> "FormField":
        matrix = np.asarray(matrix, dtype=float)
        if not np.allclose(matrix, matrix.T):
            raise DimensionMismatch("constant form must be symmetric")
        sym = 0.5 * (matrix + matrix.T)
        return cls(bundle, [em_const(sym)] * bundle.cover.n_charts, name)

    @property
    def rank(self) -> int:
        return self.bundle.rank

    def eval_chart(self, i: int, pts: np.ndarray) -> np.ndarray:
        return em_eval(self.mats[i], pts)

    def __repr__(self):
        return f"FormField({self.name or '?'}, rank={self.rank})"


def validate_form(form: FormField, plan: SamplePlan | None = None,
                  tol: float = 1e-9, det_floor: float = 1e-9) -> CheckReport:
    """Certify symmetry, nondegeneracy, and overlap compatibility at samples."""
    plan = plan or SamplePlan()
    cover = form.bundle.cover
    from .bundles import _ResidualStat
    stat = _ResidualStat()
    for i in range(cover.n_charts):
        pts = cover.chart_samples(i, plan)
        if pts.shape[0] == 0:
            continue
        s = form.eval_chart(i, pts)
        sym = np.abs(s - np.swapaxes(s, 1, 2)).max(axis=(1, 2))
        stat.add_residuals(sym, pts)
        stat.add_dets(np.abs(np.linalg.det(s)), pts, floor=det_floor)
    for i, j in itertools.permutations(range(cover.n_charts), 2):
        pts = cover.overlap_samples(i, j, plan)
        if pts.shape[0] == 0:
            continue
        si = form.eval_chart(i, pts)
        sj = form.eval_chart(j, pts)
        gji = em_eval(form.bundle.transition(j, i), pts)
        res = np.abs(np.swapaxes(gji, 1, 2) @ sj @ gji - si).max(axis=(1, 2))
        stat.add_residuals(res, pts)
    passed = stat.max < tol and stat.min_det >= det_floor
    return CheckReport("form", passed, stat.max, stat.min_det, stat.witness,
                       mean_residual=stat.mean)


def standard_positive_form(bundle: BundleRep, r: int = 1,
                           plan: SamplePlan | None = None,
                           proj: ProjectorField | None = None) -> FormField:
    """Restrict the ambient inner product through the Gauss embedding:
    s_i = A_i^T A_i with A_i the chart frame in the ambient trivial bundle."""
    plan = plan or SamplePlan()
    proj = proj or gauss_embedding(bundle, r, plan)
    mats = [em_mul(em_transpose(a), a) for a in proj.frames]
    form = FormField(bundle, mats, name=f"pos({bundle.name})")
    form.proj = proj
    return form


# ---------------------------------------------------------------------------
# Congruence Gram-Schmidt diagonalization.


def gram_schmidt_frame(s: np.ndarray, near_singular: float = NEARLY_SINGULAR):
    """Congruence frame g with g^T S g = diag(+1...,-1...) and the type.

    Pivots greedily on the largest |s(w, w)|; when every remaining diagonal
    is below PIVOT_RATIO * scale the hyperbolic-pair fix (w_a += w_b for the
    largest off-diagonal pair) restores a pivot.
    """
    s = np.asarray(s, dtype=float)
    d = s.shape[0]
    if s.shape != (d, d) or not np.allclose(s, s.T, atol=1e-12):
        raise DimensionMismatch("gram_schmidt_frame needs a symmetric matrix")
    if d == 0:
        return np.zeros((0, 0)), SignatureType(0, 0)
    if abs(np.linalg.det(s)) <= near_singular:
        raise NearSingular(f"determinant {np.linalg.det(s):.3e} too close to zero")
    scale = max(np.abs(s).max(), 1e-30)
    events, g, signs = _gs_events(s, scale)
    pos = [g[:, k] for k in range(d) if signs[k] > 0]
    neg = [g[:, k] for k in range(d) if signs[k] < 0]
    frame = np.stack(pos + neg, axis=1)
    return frame, SignatureType(len(pos), len(neg))


def _gs_events(s: np.ndarray, scale: float):
    """Shared pivoted-GS engine: returns (events, frame columns, signs).

    Events replay deterministically: ("fix", a, b) adds slot b's vector to
    slot a's; ("pivot", slot, sign) normalizes and orthogonalizes the rest.
    """
    d = s.shape[0]
    work = np.eye(d)
    unused = list(range(d))
    events = []
    cols = np.zeros((d, d))
    signs = np.zeros(d)
    out_idx = 0
    for _ in range(d):
        for _fix_round in range(d + 1):
            diags = np.array([work[:, j] @ s @ work[:, j] for j in unused])
            best = int(np.argmax(np.abs(diags)))
            if np.abs(diags[best]) > PIVOT_RATIO * scale:
                break
            off_best, off_val = None, 0.0
            for a, b in itertools.combinations(range(len(unused)), 2):
                v = abs(work[:, unused[a]] @ s @ work[:, unused[b]])
                if v > abs(off_val):
                    off_best, off_val = (a, b), v
            if off_best is None or off_val <= PIVOT_RATIO * scale:
                raise NearSingular("no usable pivot or hyperbolic pair")
            a, b = off_best
            work[:, unused[a]] += work[:, unused[b]]
            events.append(("fix", unused[a], unused[b]))
        slot = unused[best]
        val = work[:, slot] @ s @ work[:, slot]
        sign = 1.0 if val > 0 else -1.0
        v = work[:, slot] / np.sqrt(abs(val))
        events.append(("pivot", slot, sign))
        cols[:, out_idx] = v
        signs[out_idx] = sign
        out_idx += 1
        unused.remove(slot)
        for j in unused:
            work[:, j] = work[:, j] - sign * (work[:, j] @ s @ v) * v
    return events, cols, signs


def eigenvalue_signature(s: np.ndarray) -> SignatureType:
    """Independent oracle: count eigenvalue signs."""
    w = np.linalg.eigvalsh(np.asarray(s, dtype=float))
    return SignatureType(int((w > 0).sum()), int((w < 0).sum()))


def signature(form: FormField, plan: SamplePlan | None = None) -> SignatureType:
    """Per-sample diagonalization type, required constant on the base."""
    plan = plan or SamplePlan()
    if not form.bundle.base.connected:
        raise InconsistentSignature(
            "signature needs a base declared connected", [], []
        )
    seen: dict[tuple, tuple] = {}
    for i in range(form.bundle.cover.n_charts):
        pts = form.bundle.cover.chart_samples(i, plan)
        if pts.shape[0] == 0:
            continue
        mats = form.eval_chart(i, pts)
        for k in range(pts.shape[0]):
            _, sig = gram_schmidt_frame(mats[k])
            key = (sig.pos, sig.neg)
            if key not in seen:
                seen[key] = tuple(pts[k])
    if len(seen) != 1:
        raise InconsistentSignature(
            f"sampled types disagree: {sorted(seen)}",
            types=[SignatureType(*k) for k in sorted(seen)],
            points=[seen[k] for k in sorted(seen)],
        )
    ((pos, neg),) = seen.keys()
    return SignatureType(pos, neg)


# ---------------------------------------------------------------------------
# Local trivializing frames as expression fields.


@dataclass
class TrivializingChart:
    chart: SemialgebraicSet       # parent chart cut by pivot-validity guards
    parent: int                   # index of the form's chart
    frame: tuple                  # d x d ExprMatrix, g^T s g = J(sig)
    sig: SignatureType


@dataclass
class TrivializingCover:
    form: FormField
    charts: list


def local_trivializing_cover(form: FormField,
                             plan: SamplePlan | None = None) -> TrivializingCover:
    """Frame fields diagonalizing the form, one chart per pivot pattern.

    The pivot pattern observed numerically at each sample fixes the symbolic
    replay; samples with different patterns split the chart.  Each output
    chart carries guard conditions keeping its pivots nonzero.
    """
    plan = plan or SamplePlan()
    out = []
    for i in range(form.bundle.cover.n_charts):
        pts = form.bundle.cover.chart_samples(i, plan)
        if pts.shape[0] == 0:
            continue
        mats = form.eval_chart(i, pts)
        groups: dict[tuple, int] = {}
        for k in range(pts.shape[0]):
            scale = max(np.abs(mats[k]).max(), 1e-30)
            events, _, _ = _gs_events(mats[k], scale)
            groups.setdefault(tuple(events), k)
        for pattern in sorted(groups):
            frame, sig, guards = _symbolic_gs(form.mats[i], pattern)
            chart = form.bundle.cover.charts[i]
            for guard in guards:
                chart = chart.with_condition(Condition(guard, GT))
            out.append(TrivializingChart(chart, i, frame, sig))
    if not out:
        raise NearSingular("no sampled chart points to diagonalize on")
    return TrivializingCover(form, out)


def _symbolic_gs(s_mat, events):
    """Replay a pivot pattern on the expression matrix."""
    d = em_shape(s_mat)[0]
    cols = {j: tuple((ex.Const(1.0 if a == j else 0.0),) for a in range(d))
            for j in range(d)}

    def quad(u, w):
        # u^T S w as a scalar expression
        sw = em_mul(s_mat, w)
        acc = ex.Mul(u[0][0], sw[0][0])
        for a in range(1, d):
            acc = ex.Add(acc, ex.Mul(u[a][0], sw[a][0]))
        return acc

    pos_cols, neg_cols, guards = [], [], []
    for event in events:
        if event[0] == "fix":
            _, a, b = event
            cols[a] = tuple((ex.Add(cols[a][r][0], cols[b][r][0]),)
                            for r in range(d))
            continue
        _, slot, sign = event
        w = cols[slot]
        val = quad(w, w)
        # pin both the magnitude and the recorded sign of the pivot
        guards.append(ex.Sub(ex.Mul(ex.Const(float(sign)), val), ex.Const(1e-10)))
        denom = ex.Sqrt(ex.Abs(val), guard_tol=1e-14)
        v = tuple((ex.Div(w[r][0], denom, guard_tol=1e-14),) for r in range(d))
        (pos_cols if sign > 0 else neg_cols).append(v)
        del cols[slot]
        for j in list(cols):
            coeff = quad(cols[j], v)
            shift = ex.Const(float(sign))
            cols[j] = tuple(
                (ex.Sub(cols[j][r][0], ex.Mul(shift, ex.Mul(coeff, v[r][0]))),)
                for r in range(d))
    ordered = pos_cols + neg_cols
    frame = ordered[0]
    for col in ordered[1:]:
        frame = em_hstack(frame, col)
    return frame, SignatureType(len(pos_cols), len(neg_cols)), guards


# ---------------------------------------------------------------------------
# Positive/negative decomposition.


@dataclass
class FiberProjectorPair:
    """Per-chart fiberwise projectors splitting the form's bundle."""

    form: FormField
    reference: FormField
    plus: list      # per chart d x d ExprMatrix
    minus: list
    sig: SignatureType

    def check(self, plan: SamplePlan | None = None, tol: float = 1e-8) -> CheckReport:
        plan = plan or SamplePlan()
        bundle = self.form.bundle
        max_res, witness = 0.0, None
        for i in range(bundle.cover.n_charts):
            pts = bundle.cover.chart_samples(i, plan)
            if pts.shape[0] == 0:
                continue
            p = em_eval(self.plus[i], pts)
            q = em_eval(self.minus[i], pts)
            res = np.abs(p + q - np.eye(bundle.rank)).max(axis=(1, 2))
            res = np.maximum(res, np.abs(p @ p - p).max(axis=(1, 2)))
            res = np.maximum(res, np.abs(q @ q - q).max(axis=(1, 2)))
            if res.max() > max_res:
                max_res = float(res.max())
                witness = tuple(pts[int(res.argmax())])
        for i, j in itertools.permutations(range(bundle.cover.n_charts), 2):
            pts = bundle.cover.overlap_samples(i, j, plan)
            if pts.shape[0] == 0:
                continue
            gij = em_eval(bundle.transition(i, j), pts)
            for mats in (self.plus, self.minus):
                pi = em_eval(mats[i], pts)
                pj = em_eval(mats[j], pts)
                res = np.abs(pi @ gij - gij @ pj).max(axis=(1, 2))
                if res.max() > max_res:
                    max_res = float(res.max())
                    witness = tuple(pts[int(res.argmax())])
        return CheckReport("decomposition", max_res < tol, max_res, witness=witness)

    def restricted_definiteness(self, plan: SamplePlan | None = None):
        """(min eig on range P+, max eig on range P-) over all samples."""
        plan = plan or SamplePlan()
        bundle = self.form.bundle
        min_pos, max_neg = float("inf"), float("-inf")
        for i in range(bundle.cover.n_charts):
            pts = bundle.cover.chart_samples(i, plan)
            if pts.shape[0] == 0:
                continue
            s = self.form.eval_chart(i, pts)
            for mats, positive in ((self.plus, True), (self.minus, False)):
                proj = em_eval(mats[i], pts)
                rank = self.sig.pos if positive else self.sig.neg
                if rank == 0:
                    continue
                u, sv, _ = np.linalg.svd(proj)
                basis = u[:, :, :rank]
                restr = np.swapaxes(basis, 1, 2) @ s @ basis
                w = np.linalg.eigvalsh(restr)
                if positive:
                    min_pos = min(min_pos, float(w.min()))
                else:
                    max_neg = max(max_neg, float(w.max()))
        return min_pos, max_neg

    def to_ambient(self) -> tuple[ProjectorField, ProjectorField]:
        """Glue chartwise A_i Pi A_i^+ into global ambient projectors."""
        proj = getattr(self.reference, "proj", None)
        if proj is None or proj.pou is None:
            raise BundleformsError("decomposition reference lacks an embedding")
        outs = []
        n = proj.ambient
        pinvs = [em_solve(em_mul(em_transpose(f), f), em_transpose(f),
                          guard_tol=1e-12) for f in proj.frames]
        for mats, rank in ((self.plus, self.sig.pos), (self.minus, self.sig.neg)):
            locals_k = [em_mul(f, em_mul(m, p))
                        for f, m, p in zip(proj.frames, mats, pinvs)]
            glued_rows = []
            for a in range(n):
                row = []
                for b in range(n):
                    acc = None
                    for k, local in enumerate(locals_k):
                        term = ex.ZeroGate(proj.pou.weights[k], local[a][b])
                        acc = term if acc is None else ex.Add(acc, term)
                    row.append(acc)
                glued_rows.append(tuple(row))
            outs.append(ProjectorField(proj.base, tuple(glued_rows), rank))
        return outs[0], outs[1]


def decompose(form: FormField, plan: SamplePlan | None = None,
              reference: FormField | None = None) -> FiberProjectorPair:
    """Split the bundle into positive/negative subbundles of the form.

    Chart-free spectral construction: the sign-projectors of the pencil
    G^-1 S against the positive reference G conjugate correctly across
    charts, so the chartwise formulas agree where charts overlap.
    """
    plan = plan or SamplePlan()
    reference = reference or standard_positive_form(form.bundle, plan=plan)
    sig = signature(form, plan)
    plus, minus = [], []
    for i in range(form.bundle.cover.n_charts):
        s_i = form.mats[i]
        g_i = reference.mats[i]
        plus.append(em_pencil_proj(s_i, g_i, True, guard_tol=1e-9))
        minus.append(em_pencil_proj(s_i, g_i, False, guard_tol=1e-9))
    return FiberProjectorPair(form, reference, plus, minus, sig)


def blend_positive_subbundle(frame_field, r_plus: int, nu_plus, mu: ex.Expr,
                             overlap_pts: np.ndarray | None = None):
    """Convex blend of a positive subbundle across a two-chart cover.

    `frame_field` trivializes the form on chart U (g^T s g = J); `nu_plus`
    is a positive subbundle frame on chart V.  In the trivialized
    coordinates the V-side subspace is the graph of theta with operator
    norm < 1, so scaling theta by the weight mu stays inside the convex
    set of positive graphs.  Returns the blended subspace projector (valid
    on U; where mu = 0 it is the standard positive coordinate subspace).
    """
    d = em_shape(frame_field)[0]
    r_minus = d - r_plus
    coords = em_solve(frame_field, nu_plus, guard_tol=1e-12)  # d x r_plus
    top = em_submatrix(coords, range(r_plus), range(r_plus))
    bottom = em_submatrix(coords, range(r_plus, d), range(r_plus))
    theta = em_mul(bottom, em_inv(top, guard_tol=1e-12))       # r_minus x r_plus
    if overlap_pts is not None and overlap_pts.shape[0]:
        th = em_eval(theta, overlap_pts)
        norms = np.linalg.svd(th, compute_uv=False)[:, 0]
        if (norms >= 1.0).any():
            bad = overlap_pts[int(np.argmax(norms >= 1.0))]
            raise OmegaViolation(
                f"graph operator norm {norms.max():.3f} >= 1 at {tuple(bad)}"
            )
    # ZeroGate(mu, theta) = mu * theta where mu > 0 and exactly 0 elsewhere,
    # so the graph matrix is valid on all of U even where nu_plus is not
    gated = tuple(tuple(ex.ZeroGate(mu, e) for e in row) for row in theta)
    graph = em_vstack(em_identity(r_plus), gated)
    columns = em_mul(frame_field, graph)
    return em_colspan_proj(columns, guard_tol=1e-12)


# ---------------------------------------------------------------------------
# Orthogonal sum, tensor, hyperbolic spaces.


def _lifted_mats(f1: FormField, f2: FormField, bundle_out: BundleRep):
    parents = getattr(bundle_out.cover, "parents", None)
    if parents is None:
        return f1.mats, f2.mats
    m1 = [f1.mats[i] for i, _ in parents]
    m2 = [f2.mats[j] for _, j in parents]
    return m1, m2


def orthogonal_sum(f1: FormField, f2: FormField) -> FormField:
    if f1.bundle.base.sset is not f2.bundle.base.sset:
        raise BaseMismatch("orthogonal sum needs forms over one base")
    if f2.rank == 0:
        return f1
    if f1.rank == 0:
        return f2
    bundle = whitney_sum(f1.bundle, f2.bundle)
    m1, m2 = _lifted_mats(f1, f2, bundle)
    mats = [em_block_diag(a, b) for a, b in zip(m1, m2)]
    return FormField(bundle, mats, name=f"({f1.name})perp({f2.name})")


def tensor_form(f1: FormField, f2: FormField) -> FormField:
    if f1.bundle.base.sset is not f2.bundle.base.sset:
        raise BaseMismatch("tensor needs forms over one base")
    from .bundles import tensor as tensor_bundle
    bundle = tensor_bundle(f1.bundle, f2.bundle)
    m1, m2 = _lifted_mats(f1, f2, bundle)
    mats = [em_kron(a, b) for a, b in zip(m1, m2)]
    return FormField(bundle, mats, name=f"({f1.name})ox({f2.name})")


def negate_form(form: FormField) -> FormField:
    mats = [em_scale(ex.Const(-1.0), m) for m in form.mats]
    return FormField(form.bundle, mats, name=f"-({form.name})")


def hyperbolic_space(bundle: BundleRep) -> tuple[BundleRep, FormField]:
    """H(b): form [[0, I], [I, 0]] on b + dual(b) in dual-paired frames."""
    d = bundle.rank
    total = whitney_sum(bundle, dual(bundle))
    block = np.zeros((2 * d, 2 * d))
    block[:d, d:] = np.eye(d)
    block[d:, :d] = np.eye(d)
    mats = [em_const(block)] * total.cover.n_charts
    form = FormField(total, mats, name=f"H({bundle.name})")
    form.hyperbolic_of = bundle
    return total, form


# ---------------------------------------------------------------------------
# Isometries.


@dataclass
class IsometryWitness:
    morphism: MorphismField
    source_form: FormField
    target_form: FormField


def check_isometry(witness: IsometryWitness, plan: SamplePlan | None = None,
                   tol: float = 1e-8) -> CheckReport:
    """Intertwining + invertibility + u^T s' u = s, all at samples."""
    plan = plan or SamplePlan()
    iso = check_isomorphism(witness.morphism.source, witness.morphism.target,
                            witness.morphism, plan, tol)
    cover = witness.morphism.source.cover
    from .bundles import _ResidualStat
    stat = _ResidualStat()
    stat.max, stat.witness = iso.max_residual, iso.witness
    for i in range(cover.n_charts):
        pts = cover.chart_samples(i, plan)
        if pts.shape[0] == 0:
            continue
        u = em_eval(witness.morphism.fields[i], pts)
        s = em_eval(witness.source_form.mats[i], pts)
        sp = em_eval(witness.target_form.mats[i], pts)
        res = np.abs(np.swapaxes(u, 1, 2) @ sp @ u - s).max(axis=(1, 2))
        stat.add_residuals(res, pts)
    passed = stat.max < tol and iso.min_abs_det > tol
    return CheckReport("isometry", passed, stat.max, iso.min_abs_det,
                       stat.witness, mean_residual=stat.mean)


def _require_spd(form: FormField, plan: SamplePlan):
    for i in range(form.bundle.cover.n_charts):
        pts = form.bundle.cover.chart_samples(i, plan)
        if pts.shape[0] == 0:
            continue
        w = np.linalg.eigvalsh(form.eval_chart(i, pts))
        if (w[:, 0] <= 0).any():
            bad = pts[int(np.argmax(w[:, 0] <= 0))]
            raise NotPositive(
                f"form {form.name or '?'} not positive definite at {tuple(bad)}"
            )


def positive_isometry(form: FormField, target: FormField,
                      plan: SamplePlan | None = None,
                      method: str = "auto") -> IsometryWitness:
    """Isometry (bundle, form) -> (bundle, target) for positive forms.

    Chartwise triangular square roots give u = C'^-1 C; their gluing is
    checked on overlaps, and if the Cholesky frames fail to glue (they are
    only orthogonally canonical) the congruence-covariant principal square
    root of the pencil target^-1 form is used instead.
    """
    plan = plan or SamplePlan()
    if form.bundle is not target.bundle:
        raise BaseMismatch("positive isometry needs both forms on one bundle")
    _require_spd(form, plan)
    _require_spd(target, plan)
    bundle = form.bundle
    if method in ("auto", "cholesky"):
        fields = []
        for i in range(bundle.cover.n_charts):
            c_src = em_transpose(em_chol(form.mats[i]))
            c_tgt = em_transpose(em_chol(target.mats[i]))
            fields.append(em_solve(c_tgt, c_src, guard_tol=1e-12))
        witness = IsometryWitness(MorphismField(bundle, bundle, fields),
                                  form, target)
        if method == "cholesky":
            return witness
        if check_isometry(witness, plan, tol=1e-8).passed:
            return witness
    fields = [em_pencil_sqrt(form.mats[i], target.mats[i])
              for i in range(bundle.cover.n_charts)]
    return IsometryWitness(MorphismField(bundle, bundle, fields), form, target)


def isometry_same_bundle(form: FormField, target: FormField,
                         plan: SamplePlan | None = None,
                         reference: FormField | None = None) -> IsometryWitness:
    """Isometry between two forms of equal signature on one bundle.

    Split both forms against a common positive reference; the projector
    swap phi = P+' P+ + P-' P- aligns the decompositions, the pulled-back
    form then block-diagonalizes along the source split, and the principal
    pencil square root of the blockwise absolute values corrects the
    definite parts.  Every factor is congruence-covariant, so the fields
    glue into a bundle morphism.
    """
    plan = plan or SamplePlan()
    if form.bundle is not target.bundle:
        raise BaseMismatch("same-bundle isometry needs a shared bundle")
    reference = reference or standard_positive_form(form.bundle, plan=plan)
    src = decompose(form, plan, reference)
    tgt = decompose(target, plan, reference)
    if src.sig != tgt.sig:
        raise InconsistentSignature(
            f"signatures differ: {src.sig} vs {tgt.sig}",
            types=[src.sig, tgt.sig],
        )
    bundle = form.bundle
    fields = []
    for i in range(bundle.cover.n_charts):
        phi = em_add(em_mul(tgt.plus[i], src.plus[i]),
                     em_mul(tgt.minus[i], src.minus[i]))
        pulled = em_mul(em_transpose(phi), em_mul(target.mats[i], phi))
        # blockwise absolute values along the source split are SPD
        refl = em_sub(src.plus[i], src.minus[i])
        abs_src = em_mul(form.mats[i], refl)
        abs_pulled = em_mul(pulled, refl)
        correction = em_pencil_sqrt(abs_src, abs_pulled)
        fields.append(em_mul(phi, correction))
    witness = MorphismField(bundle, bundle, fields)
    return IsometryWitness(witness, form, target)


# ---------------------------------------------------------------------------
# Ambient transport of forms (for subbundle restrictions).


def ambient_form(form: FormField, proj: ProjectorField):
    """n x n expression matrix representing the form on range(P) in eps^n."""
    if proj.pou is None:
        raise BundleformsError("ambient form needs an embedding with a partition")
    n = proj.ambient
    locals_k = []
    for frame, mat in zip(proj.frames, form.mats):
        gram = em_mul(em_transpose(frame), frame)
        pinv = em_solve(gram, em_transpose(frame), guard_tol=1e-12)
        locals_k.append(em_mul(em_transpose(pinv), em_mul(mat, pinv)))
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            acc = None
            for k, local in enumerate(locals_k):
                term = ex.ZeroGate(proj.pou.weights[k], local[a][b])
                acc = term if acc is None else ex.Add(acc, term)
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


def restrict_form_to_range_bundle(ambient_mat, subbundle: BundleRep) -> FormField:
    """Pull an ambient form back through a minor-chart bundle's frames."""
    from .bundles import projector_frames
    mats = []
    for frame in projector_frames(subbundle):
        mats.append(em_mul(em_transpose(frame), em_mul(ambient_mat, frame)))
    return FormField(subbundle, mats, name=f"restr({subbundle.name})")
