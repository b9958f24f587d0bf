"""Homotopy witnesses: strip subdivision, clutching, endpoint transport.

Bundles over a cylinder base X x R containing X x [0,1] restrict at t = 0
and t = 1 to isomorphic bundles over X, and form fields restrict to
isometric forms.  The witnesses here are explicit expression fields,
certified by the generic checkers.

The endpoint transport composes the cylinder bundle's ambient projector
at a fixed ladder of t values; each chained projection is chart-free, so
the chart fields obtained by solving against the restricted frames
intertwine the restricted cocycles exactly.  Strip subdivision and
clutching are kept for product covers, where the t direction reduces to
interval combinatorics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .bundles import (
    BundleRep,
    CheckReport,
    MorphismField,
    check_isomorphism,
    common_cover,
    gauss_embedding,
    pullback,
    trivial_bundle,
)
from .catalog import cylinder_base
from .errors import (
    BandMismatch,
    BundleformsError,
    ContainmentFailure,
    ContractionEscapesBase,
    CoverageFailure,
    EndpointMismatch,
    ImageEscapesBase,
    NotCatalogBase,
    TCoverGap,
)
from .forms import (
    FormField,
    IsometryWitness,
    check_isometry,
    isometry_same_bundle,
)
from .matexpr import (
    em_eval,
    em_identity,
    em_inv,
    em_mul,
    em_solve,
    em_subst,
    em_transpose,
)
from .semialg import Base, Condition, Cover, Polynomial, SamplePlan, SemialgebraicSet
from .unity import shrink_cover

DEFAULT_TRANSPORT_STEPS = 16


def _require_cylinder(base: Base) -> tuple[Base, int]:
    if base.cylinder_base is None or base.t_index is None:
        raise NotCatalogBase("operation needs a declared cylinder base")
    return base.cylinder_base, base.t_index


# ---------------------------------------------------------------------------
# Product covers, strips, clutching.


def product_cylinder_cover(cyl: Base, base_charts, intervals,
                           name: str = "") -> Cover:
    """Cover of the cylinder by base-chart x open-t-interval product charts.

    `intervals` holds one (lo, hi) pair per chart; None means unbounded.
    """
    from .catalog import extend_set
    dim = cyl.dim
    t_poly = Polynomial.coordinate(dim, dim - 1)
    charts = []
    structure = []
    for chart, (lo, hi) in zip(base_charts, intervals):
        ext = extend_set(chart, dim)
        if lo is not None:
            ext = ext.with_condition(
                Condition.from_poly(t_poly - Polynomial.constant(dim, lo), ">"))
        if hi is not None:
            ext = ext.with_condition(
                Condition.from_poly(Polynomial.constant(dim, hi) - t_poly, ">"))
        charts.append(ext)
        structure.append((chart, (lo, hi)))
    cover = Cover(cyl, charts, name=name or f"{cyl.name}-product")
    cover.product_structure = structure
    return cover


@dataclass
class StripDecomposition:
    """Per base chart: constant breakpoints 0 = b_0 < ... < b_R = 1 and the
    cylinder chart assigned to each strip."""

    base_chart: SemialgebraicSet
    breakpoints: list[float]
    strip_charts: list[int]


def strip_subdivision(bundle: BundleRep, plan: SamplePlan | None = None,
                      margin: float = 1e-9) -> list[StripDecomposition]:
    """Cut [0,1] into strips per base chart, each inside one product chart.

    Breakpoints sit at the midpoints of consecutive chosen t-intervals'
    overlaps.  A sampled t value over some base point covered by no chart
    raises TCoverGap with the witness.
    """
    plan = plan or SamplePlan()
    cyl = bundle.base
    base_x, t_index = _require_cylinder(cyl)
    structure = getattr(bundle.cover, "product_structure", None)
    if structure is None:
        raise BundleformsError("strip subdivision needs declared product charts")
    groups: dict[int, list[tuple[int, tuple]]] = {}
    keyed: dict[bytes, int] = {}
    base_charts: list[SemialgebraicSet] = []
    for idx, (chart, interval) in enumerate(structure):
        key = repr([(c.op, repr(c.poly)) for piece in chart.pieces
                    for c in piece]).encode()
        gid = keyed.setdefault(key, len(base_charts))
        if gid == len(base_charts):
            base_charts.append(chart)
        groups.setdefault(gid, []).append((idx, interval))
    out = []
    for gid, members in groups.items():
        intervals = [( -np.inf if lo is None else lo, np.inf if hi is None else hi)
                     for _, (lo, hi) in members]
        order = sorted(range(len(members)), key=lambda k: (intervals[k][0],
                                                           intervals[k][1]))
        # greedy chain covering [0, 1]
        chain: list[int] = []
        reach = 0.0
        for _ in range(len(members) + 1):
            if reach >= 1.0 and chain:
                break
            best, best_hi = None, reach
            for k in order:
                lo, hi = intervals[k]
                if lo < reach + margin and hi > best_hi:
                    best, best_hi = k, hi
            if best is None or best_hi <= reach + margin:
                raise TCoverGap(
                    f"t = {reach:.6f} not covered over base chart {gid}",
                    point=None,
                )
            if chain and best == chain[-1]:
                raise TCoverGap(f"t coverage stalls at {reach:.6f}")
            chain.append(best)
            reach = best_hi
        breakpoints = [0.0]
        for a, b in zip(chain, chain[1:]):
            lo_next = intervals[b][0]
            hi_prev = intervals[a][1]
            if lo_next >= hi_prev - margin:
                raise TCoverGap(
                    f"gap between t-intervals {intervals[a]} and {intervals[b]}"
                )
            mid = 0.5 * (max(lo_next, 0.0) + min(hi_prev, 1.0))
            breakpoints.append(float(mid))
        breakpoints.append(1.0)
        if any(b2 <= b1 for b1, b2 in zip(breakpoints, breakpoints[1:])):
            raise TCoverGap(f"breakpoints not increasing: {breakpoints}")
        strip_charts = [members[k][0] for k in chain]
        decomp = StripDecomposition(base_charts[gid], breakpoints, strip_charts)
        _certify_strips(bundle, decomp, plan)
        out.append(decomp)
    return out


def _certify_strips(bundle: BundleRep, decomp: StripDecomposition,
                    plan: SamplePlan):
    from .semialg import sample
    cyl = bundle.base
    region = cyl.cylinder_base.sset.intersect(decomp.base_chart)
    pts, _ = sample(region, plan, cyl.cylinder_base.box, plan.n_overlap)
    if pts.shape[0] == 0:
        return
    for k, chart_idx in enumerate(decomp.strip_charts):
        lo, hi = decomp.breakpoints[k], decomp.breakpoints[k + 1]
        for t in np.linspace(lo, hi, 5):
            lifted = np.column_stack([pts, np.full(pts.shape[0], t)])
            inside = bundle.cover.charts[chart_idx].membership(lifted)
            if not inside.all():
                bad = lifted[~inside][0]
                raise TCoverGap(
                    f"strip {k} escapes its chart at t = {t:.4f}",
                    point=tuple(float(v) for v in bad),
                )


@dataclass
class ClutchedTrivialization:
    """Glued per-strip trivialization fields over base_chart x [0,1]."""

    strips: StripDecomposition
    fields: list          # per strip: d x d ExprMatrix in that strip's chart
    report: CheckReport


def clutch(bundle: BundleRep, strips: StripDecomposition,
           trivializations=None, plan: SamplePlan | None = None,
           tol: float = 1e-8) -> ClutchedTrivialization:
    """Glue per-strip trivializations by the frame change on breakpoint bands.

    The frame change between consecutive strips must be t-independent
    across the band at samples (it is a function of the base point only);
    residual variation beyond the tolerance raises BandMismatch.
    """
    plan = plan or SamplePlan()
    from .semialg import sample
    cyl = bundle.base
    base_x, t_index = _require_cylinder(cyl)
    d = bundle.rank
    trivializations = trivializations or [em_identity(d) for _ in strips.strip_charts]
    region = base_x.sset.intersect(strips.base_chart)
    pts, _ = sample(region, plan, base_x.box, plan.n_overlap)
    glued = [em_mul(em_identity(d), trivializations[0])]
    accumulated = em_identity(d)
    max_var = 0.0
    for k in range(len(strips.strip_charts) - 1):
        c_k, c_next = strips.strip_charts[k], strips.strip_charts[k + 1]
        bp = strips.breakpoints[k + 1]
        # frame change M(x, t) = T_{k+1} g_{next,k} T_k^-1 on the band
        g = bundle.transition(c_next, c_k)
        m_field = em_mul(trivializations[k + 1],
                         em_mul(g, em_inv(trivializations[k], guard_tol=1e-12)))
        if pts.shape[0]:
            band_ts = [bp - 1e-3, bp, bp + 1e-3]
            vals = []
            for t in band_ts:
                lifted = np.column_stack([pts, np.full(pts.shape[0], t)])
                vals.append(em_eval(m_field, lifted))
            spread = max(np.abs(vals[a] - vals[b]).max()
                         for a in range(3) for b in range(a + 1, 3))
            max_var = max(max_var, float(spread))
            if spread > tol:
                raise BandMismatch(
                    f"frame change varies by {spread:.3e} across the band at "
                    f"t = {bp}"
                )
        m_at_bp = em_subst(m_field, {t_index: ex.Const(bp)})
        accumulated = em_mul(accumulated, em_inv(m_at_bp, guard_tol=1e-12))
        glued.append(em_mul(accumulated, trivializations[k + 1]))
    report = CheckReport("clutch", True, max_var)
    if pts.shape[0]:
        # continuity of the glued map across each band
        worst = 0.0
        for k in range(len(strips.strip_charts) - 1):
            bp = strips.breakpoints[k + 1]
            lifted = np.column_stack([pts, np.full(pts.shape[0], bp)])
            low = em_eval(glued[k], lifted)
            g = em_eval(bundle.transition(strips.strip_charts[k],
                                          strips.strip_charts[k + 1]), lifted)
            high = em_eval(glued[k + 1], lifted)
            worst = max(worst, float(np.abs(low @ g - high).max()))
        report = CheckReport("clutch", worst < tol, max(max_var, worst))
    return ClutchedTrivialization(strips, glued, report)


# ---------------------------------------------------------------------------
# Restriction to a t-slice.


def restrict_cylinder(bundle: BundleRep, t_value: float,
                      plan: SamplePlan | None = None,
                      form: FormField | None = None):
    """Restrict a cylinder bundle (and optionally a form) to the slice t = c.

    Returns (bundle over the cylinder's base, kept-chart index map[, form]).
    Charts whose slice at t = c has no sampled points are dropped.
    """
    plan = plan or SamplePlan()
    cyl = bundle.base
    base_x, t_index = _require_cylinder(cyl)
    const_maps = [Polynomial.coordinate(base_x.dim, i) for i in range(base_x.dim)]
    const_maps.append(Polynomial.constant(base_x.dim, t_value))
    mapping = {t_index: ex.Const(float(t_value))}
    from .semialg import sample
    charts, kept = [], []
    for i, chart in enumerate(bundle.cover.charts):
        pieces = []
        for piece in chart.pieces:
            conds = []
            for cond in piece:
                if cond.poly is not None:
                    conds.append(Condition.from_poly(cond.poly.compose(const_maps),
                                                     cond.op))
                else:
                    conds.append(Condition(ex.substitute(cond.expression, mapping),
                                           cond.op))
            pieces.append(conds)
        sliced = SemialgebraicSet(base_x.dim, pieces)
        pts, warn = sample(base_x.sset.intersect(sliced), plan, base_x.box, 24)
        if warn or pts.shape[0] == 0:
            continue
        charts.append(sliced)
        kept.append(i)
    if not charts:
        raise CoverageFailure(f"no chart survives restriction to t = {t_value}")
    cover = Cover(base_x, charts, name=f"{bundle.cover.name}@t={t_value}")
    transitions = {}
    for (i, j), g in bundle.transitions.items():
        if i in kept and j in kept:
            transitions[(kept.index(i), kept.index(j))] = em_subst(g, mapping)
    restricted = BundleRep(cover, bundle.rank, transitions,
                           name=f"{bundle.name}@t={t_value}",
                           default_identity=bundle.default_identity)
    if form is None:
        return restricted, kept
    mats = [em_subst(form.mats[i], mapping) for i in kept]
    restricted_form = FormField(restricted, mats, name=f"{form.name}@t={t_value}")
    return restricted, kept, restricted_form


# ---------------------------------------------------------------------------
# Endpoint transport witnesses.


@dataclass
class HomotopyWitness:
    at_zero: BundleRep
    at_one: BundleRep
    morphism: MorphismField       # between common-cover lifts of the above
    report: CheckReport


def homotopy_isomorphism(bundle: BundleRep, plan: SamplePlan | None = None,
                         steps: int = DEFAULT_TRANSPORT_STEPS,
                         tol: float = 1e-6, path=None) -> HomotopyWitness:
    """Certified isomorphism between the t = 0 and t = 1 restrictions.

    An ambient projector for the bundle is chained over a fixed t ladder;
    the product maps the t = 0 fiber into the t = 1 fiber and is
    chart-free, so solving against the restricted frames yields fields
    with exact intertwining.  For t-independent bundles every factor is
    the same projector and the witness is identity-grade.

    When the cylinder bundle is a pullback along a homotopy, pass
    `path = (target_projector, h_component_exprs)`: the ladder then chains
    the target bundle's projector along the path, which moves at the
    geometry's own speed instead of the pullback partition's.
    """
    plan = plan or SamplePlan()
    cyl = bundle.base
    base_x, t_index = _require_cylinder(cyl)
    if getattr(bundle.cover, "product_structure", None) is not None:
        strip_subdivision(bundle, plan)          # certifies t-coverage
    else:
        _certify_slab_coverage(bundle, plan)
    shrink_cover(bundle.cover, plan=plan)   # one shrink pass must succeed

    if path is None:
        proj = gauss_embedding(bundle, plan=plan)

        def ladder_at(t: float):
            return em_subst(proj.entries, {t_index: ex.Const(t)})

        def frame_at(chart: int, t: float):
            return em_subst(proj.frames[chart], {t_index: ex.Const(t)})
    else:
        target_proj, h_exprs = path
        h_exprs = [ex.as_expr(h) for h in h_exprs]

        def maps_at(t: float):
            return {i: ex.substitute(h, {t_index: ex.Const(t)})
                    for i, h in enumerate(h_exprs)}

        def ladder_at(t: float):
            return em_subst(target_proj.entries, maps_at(t))

        def frame_at(chart: int, t: float):
            return em_subst(target_proj.frames[chart], maps_at(t))

    t_values = _adaptive_t_ladder(ladder_at, base_x, plan, steps)
    # balanced product keeps the expression tree logarithmically deep
    factors = [ladder_at(t) for t in t_values[1:]][::-1]
    while len(factors) > 1:
        reduced = []
        for k in range(0, len(factors) - 1, 2):
            reduced.append(em_mul(factors[k], factors[k + 1]))
        if len(factors) % 2:
            reduced.append(factors[-1])
        factors = reduced
    transport = factors[0]
    b0, kept0 = restrict_cylinder(bundle, 0.0, plan)
    b1, kept1 = restrict_cylinder(bundle, 1.0, plan)
    a, b = common_cover(b0, b1)
    parents = a.cover.parents if hasattr(a.cover, "parents") else [
        (i, i) for i in range(a.cover.n_charts)]
    fields = []
    for (i0, i1) in parents:
        f0 = frame_at(kept0[i0], 0.0)
        f1 = frame_at(kept1[i1], 1.0)
        gram = em_mul(em_transpose(f1), f1)
        rhs = em_mul(em_transpose(f1), em_mul(transport, f0))
        fields.append(em_solve(gram, rhs, guard_tol=1e-12))
    witness = MorphismField(a, b, fields)
    report = check_isomorphism(a, b, witness, plan, tol)
    return HomotopyWitness(a, b, witness, report)


def _adaptive_t_ladder(ladder_at, base_x: Base, plan: SamplePlan,
                       steps: int, gap: float = 0.35,
                       max_points: int = 1025) -> list[float]:
    """Uniform t ladder, doubled until consecutive projectors stay close.

    The chained product is invertible on the fibers when each consecutive
    projector pair is closer than 1 in operator norm.  Partition
    crossovers concentrate the subspace's rotation in narrow t bands whose
    position translates with the base point, so the ladder must be
    uniformly finer than the band width; probe points measure the worst
    consecutive jump and the resolution doubles until it clears the gap.
    """
    probes = base_x.sample_points(plan)
    if probes.shape[0] == 0:
        return [k / steps for k in range(steps + 1)]
    if probes.shape[0] > 512:
        stride = probes.shape[0] // 512 + 1
        probes = probes[::stride]
    cache: dict[float, np.ndarray] = {}

    def p_at(t: float) -> np.ndarray:
        hit = cache.get(t)
        if hit is None:
            hit = em_eval(ladder_at(t), probes)
            cache[t] = hit
        return hit

    n = steps
    while True:
        ts = [k / n for k in range(n + 1)]
        worst = max(float(np.abs(p_at(b) - p_at(a)).max())
                    for a, b in zip(ts, ts[1:]))
        if worst <= gap or 2 * n + 1 > max_points:
            return ts
        n *= 2


def _certify_slab_coverage(bundle: BundleRep, plan: SamplePlan,
                           n_t: int = 21):
    """Sampled check that the charts cover base x [0, 1]."""
    base_x, t_index = _require_cylinder(bundle.base)
    pts = base_x.sample_points(plan)
    if pts.shape[0] == 0:
        raise CoverageFailure("cylinder base yielded no samples")
    for t in np.linspace(0.0, 1.0, n_t):
        lifted = np.column_stack([pts, np.full(pts.shape[0], t)])
        covered = np.zeros(pts.shape[0], dtype=bool)
        for chart in bundle.cover.charts:
            covered |= chart.membership(lifted)
        if not covered.all():
            bad = lifted[~covered][0]
            raise TCoverGap(
                f"slab point uncovered at t = {t:.3f}",
                point=tuple(float(v) for v in bad),
            )


@dataclass
class HomotopyIsometry:
    at_zero: FormField
    at_one: FormField
    witness: IsometryWitness
    report: CheckReport


def homotopy_isometry(form: FormField, plan: SamplePlan | None = None,
                      steps: int = DEFAULT_TRANSPORT_STEPS,
                      tol: float = 1e-6) -> HomotopyIsometry:
    """Certified isometry between the t = 0 and t = 1 restrictions of a form.

    Composes the bundle transport witness with a same-bundle isometry
    between the t = 0 form and the pulled-back t = 1 form (split into
    definite parts against the standard positive reference).
    """
    plan = plan or SamplePlan()
    bundle = form.bundle
    hw = homotopy_isomorphism(bundle, plan, steps, tol)
    cyl = bundle.base
    _, t_index = _require_cylinder(cyl)
    _, kept0, f0 = restrict_cylinder(bundle, 0.0, plan, form)
    _, kept1, f1 = restrict_cylinder(bundle, 1.0, plan, form)
    parents = (hw.at_zero.cover.parents
               if hasattr(hw.at_zero.cover, "parents")
               else [(i, i) for i in range(hw.at_zero.cover.n_charts)])
    f0_mats = [f0.mats[i0] for i0, _ in parents]
    f1_mats = [f1.mats[i1] for _, i1 in parents]
    f0_lift = FormField(hw.at_zero, f0_mats, name=f"{form.name}@0")
    f1_lift = FormField(hw.at_one, f1_mats, name=f"{form.name}@1")
    pulled_mats = [em_mul(em_transpose(u), em_mul(m, u))
                   for u, m in zip(hw.morphism.fields, f1_mats)]
    pulled = FormField(hw.at_zero, pulled_mats, name=f"{form.name}@1-pulled")
    inner = isometry_same_bundle(f0_lift, pulled, plan)
    fields = [em_mul(u, c) for u, c in zip(hw.morphism.fields,
                                           inner.morphism.fields)]
    morphism = MorphismField(hw.at_zero, hw.at_one, fields)
    witness = IsometryWitness(morphism, f0_lift, f1_lift)
    report = check_isometry(witness, plan, tol)
    return HomotopyIsometry(f0_lift, f1_lift, witness, report)


# ---------------------------------------------------------------------------
# Contractible bases and induced isomorphisms.


@dataclass
class TrivializationWitness:
    presented: BundleRep          # the t = 1 restriction, matching the input
    trivial: BundleRep
    morphism: MorphismField
    report: CheckReport


def trivialize_contractible(bundle: BundleRep, plan: SamplePlan | None = None,
                            steps: int = DEFAULT_TRANSPORT_STEPS,
                            tol: float = 1e-6) -> TrivializationWitness:
    """Certified trivialization over a base star-shaped about a declared center.

    Pulls the bundle back along the scaling homotopy H(x, t) = c + t(x - c),
    transports t = 0 (a constant cocycle, trivialized by its own transition
    values at the center) to t = 1 (the bundle as presented).
    """
    plan = plan or SamplePlan()
    base = bundle.base
    if base.star_center is None:
        raise NotCatalogBase("trivialization needs a declared star center")
    center = np.asarray(base.star_center, dtype=float)
    dim = base.dim
    cyl = cylinder_base(base)
    maps = []
    for i in range(dim):
        xi = Polynomial.coordinate(dim + 1, i)
        t = Polynomial.coordinate(dim + 1, dim)
        ci = Polynomial.constant(dim + 1, center[i])
        maps.append(ci + t * (xi - ci))
    try:
        pulled = pullback(bundle, maps, cyl, plan, name=f"H*({bundle.name})")
    except ImageEscapesBase as err:
        raise ContractionEscapesBase(str(err)) from err
    target_proj = gauss_embedding(bundle, plan=plan)
    hw = homotopy_isomorphism(pulled, plan, steps, tol,
                              path=(target_proj, [m.to_expr() for m in maps]))
    # t = 0 restriction is the constant cocycle g(center); its cocycle values
    # transport every refined chart to chart 0's frame
    const_fields = []
    center_pt = center.reshape(1, -1)
    for r in range(hw.at_zero.cover.n_charts):
        if r == 0:
            const_fields.append(em_identity(bundle.rank))
            continue
        pts = hw.at_zero.cover.overlap_samples(0, r, plan)
        at = pts[:1] if pts.shape[0] else center_pt
        g = em_eval(hw.at_zero.transition(0, r), at)[0]
        const_fields.append(tuple(tuple(ex.Const(v) for v in row) for row in g))
    triv = trivial_bundle(hw.at_zero.cover, bundle.rank)
    to_trivial = MorphismField(hw.at_zero, triv, const_fields)
    zero_report = check_isomorphism(hw.at_zero, triv, to_trivial, plan, tol)
    if not zero_report.passed:
        raise ContainmentFailure(
            f"constant-cocycle trivialization failed: {zero_report.as_dict()}"
        )
    # compose: presented (t=1) -> t=0 via transport inverse -> trivial
    fields = [em_mul(c, em_inv(u, guard_tol=1e-12))
              for c, u in zip(const_fields, hw.morphism.fields)]
    triv1 = trivial_bundle(hw.at_one.cover, bundle.rank)
    morphism = MorphismField(hw.at_one, triv1, fields)
    report = check_isomorphism(hw.at_one, triv1, morphism, plan, tol)
    return TrivializationWitness(hw.at_one, triv1, morphism, report)


def induced_iso_from_homotopy(bundle: BundleRep, f_map, g_map, h_map,
                              domain: Base, plan: SamplePlan | None = None,
                              steps: int = DEFAULT_TRANSPORT_STEPS,
                              tol: float = 1e-6) -> HomotopyWitness:
    """Isomorphism between f*(bundle) and g*(bundle) from a homotopy H.

    H must restrict to f at t = 0 and to g at t = 1 (within 1e-9 at
    samples) and map into the bundle's base.
    """
    plan = plan or SamplePlan()

    def as_component_expr(c):
        return c.to_expr() if isinstance(c, Polynomial) else ex.as_expr(c)

    pts = domain.sample_points(plan)
    if pts.shape[0]:
        lifted0 = np.column_stack([pts, np.zeros(pts.shape[0])])
        lifted1 = np.column_stack([pts, np.ones(pts.shape[0])])
        for cf, cg, ch in zip(f_map, g_map, h_map):
            ef, eg, eh = (as_component_expr(c) for c in (cf, cg, ch))
            err0 = np.abs(ex.evaluate(eh, lifted0) - ex.evaluate(ef, pts)).max()
            err1 = np.abs(ex.evaluate(eh, lifted1) - ex.evaluate(eg, pts)).max()
            if err0 > 1e-9 or err1 > 1e-9:
                raise EndpointMismatch(
                    f"H restricts to the endpoints with errors {err0:.2e}, "
                    f"{err1:.2e}"
                )
    cyl = cylinder_base(domain)
    pulled = pullback(bundle, h_map, cyl, plan, name=f"H*({bundle.name})")
    target_proj = gauss_embedding(bundle, plan=plan)
    h_exprs = [as_component_expr(c) for c in h_map]
    return homotopy_isomorphism(pulled, plan, steps, tol,
                                path=(target_proj, h_exprs))
