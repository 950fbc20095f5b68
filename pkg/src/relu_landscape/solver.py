"""Newton solving and real-``d`` continuation of the cataloged families."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, SingularJacobianError, StructureError
from .families import FamilyId
from .fps import seed_expansion
from .symmetry import IsotropyDescriptor, ReducedPoint, field_at, jacobian_at

EPS = np.finfo(float).eps
COND_LIMIT = 1e12
# continuation starts here when asked for a smaller d; the series seeds are
# accurate enough at this size for every family
ANCHOR_D = 1e3


def attainable_tolerance(d, tol):
    """Residual floor for double precision.

    Individual terms of the field grow like ``d`` and cancel at a critical
    point, so residuals much below ``d * eps`` cannot be certified.
    """
    return max(tol, 16 * EPS * max(1.0, float(d)))


def equilibrated_condition(J):
    """1-norm condition number after row and column max-scaling."""
    r = np.abs(J).max(axis=1)
    if np.any(r == 0) or not np.all(np.isfinite(J)):
        return np.inf
    J = J / r[:, None]
    c = np.abs(J).max(axis=0)
    if np.any(c == 0):
        return np.inf
    return float(np.linalg.cond(J / c[None, :], 1))


def _field_or_none(xi, d, p, m):
    try:
        F = field_at(xi, d, p, m)
    except (DomainError, ValueError, ZeroDivisionError):
        return None
    return F if np.all(np.isfinite(F)) else None


def newton_solve(descriptor, xi0, tol=1e-12, max_iter=50):
    """Solve ``F_d(xi) = 0`` from ``xi0``.

    Returns a :class:`ReducedPoint` whose ``info`` records iterations, the
    residual history and the tolerance actually enforced.  Raises
    :class:`SingularJacobianError` when the equilibrated Jacobian condition
    exceeds ``1e12`` and :class:`ConvergenceError` after ``max_iter`` steps.
    """
    desc = descriptor
    d, p, m = desc.d, desc.p, desc.m
    tol_eff = attainable_tolerance(d, tol)
    xi = np.array(xi0, dtype=float)
    F = _field_or_none(xi, d, p, m)
    if F is None:
        raise DomainError("starting point is outside the smooth domain of the reduced field")
    history = [float(np.abs(F).max())]
    stalled = 0
    for it in range(max_iter + 1):
        res = history[-1]
        if res <= tol_eff:
            return ReducedPoint(desc, xi, info={"iterations": it, "residual": res, "history": history, "tol": tol_eff})
        if it == max_iter:
            break
        J, _ = jacobian_at(xi, d, p, m)
        cond = equilibrated_condition(J)
        if cond > COND_LIMIT:
            raise SingularJacobianError(
                f"Jacobian is numerically singular (condition {cond:.2e}) at d={d}", history, xi
            )
        step = np.linalg.solve(J, F)
        t = 1.0
        for _ in range(12):
            trial = xi - t * step
            F_new = _field_or_none(trial, d, p, m)
            if F_new is not None:
                break
            t *= 0.5
        else:
            raise ConvergenceError(f"Newton step left the smooth domain at d={d}", history, xi)
        xi, F = trial, F_new
        history.append(float(np.abs(F).max()))
        stalled = stalled + 1 if history[-1] > 0.5 * min(history[:-1]) else 0
        if stalled >= 6:
            break
    raise ConvergenceError(
        f"Newton did not reach {tol_eff:.1e} at d={d} (last residual {history[-1]:.2e})", history, xi
    )


def seed_point(family, d):
    """Truncated-series starting point for ``family`` at ``d``.

    ``info['low_confidence']`` is set when ``d`` is below the size at which
    the series seed is known to land in the right Newton basin.
    """
    if not isinstance(family, FamilyId):
        raise StructureError(f"unknown family {family!r}")
    xi = seed_expansion(family).evaluate(d)
    trusted = 1e3 if family.kappa == 4 else 50.0
    return ReducedPoint(family.descriptor(d), xi, info={"low_confidence": bool(d < trusted)})


def classify_type(pt):
    """``"I"`` if the leading diagonal coordinate is negative, ``"II"`` if positive."""
    a = float(pt.xi[0])
    if abs(a) <= 0.5:
        raise StructureError(f"leading coordinate {a:.3f} is too close to 0 to classify")
    return "I" if a < 0 else "II"


def single_row_permutation(family, xi):
    """Order of the single rows that puts ``xi`` in the representative form.

    Type II: the row whose last entry tends to -1 goes last, the others are
    ordered by increasing angle to the last target row.  Type I: largest
    last-column entry first, smallest second, the rest after.
    """
    n = family.m + 1
    rows = np.array([[float(xi[3 + 2 * a]), float(xi[4 + 2 * a])] for a in range(n)])
    if family.family_type == "II":
        last = int(np.argmin(rows[:, 1]))
        rest = [i for i in range(n) if i != last]
        # rows are x*1_q + y*e_d; the x scale is shared so it does not change the order
        cosines = [rows[i, 1] / np.hypot(rows[i, 0], rows[i, 1]) for i in rest]
        return [rest[i] for i in np.argsort(cosines)[::-1]] + [last]
    first = int(np.argmax(rows[:, 1]))
    second = int(np.argmin(rows[:, 1]))
    return [first, second] + [i for i in range(n) if i not in (first, second)]


def canonical_order(family, xi):
    """``xi`` with its single rows permuted into the representative ordering.

    Works for numpy arrays and for plain lists (e.g. of mpmath numbers).
    """
    if family.p == 0 or family.m == 0:
        return xi.copy() if isinstance(xi, np.ndarray) else list(xi)
    perm = single_row_permutation(family, xi)
    out = list(xi[:3])
    for a in perm:
        out.extend([xi[3 + 2 * a], xi[4 + 2 * a]])
    return np.array(out, dtype=float) if isinstance(xi, np.ndarray) else out


@dataclass
class PathSample:
    d: float
    xi: np.ndarray
    jacobian_min_abs_eig: float
    iterations: int
    residual: float


@dataclass
class ContinuationPath:
    family: FamilyId
    samples: list = field(default_factory=list)
    terminated: dict = None

    @property
    def ds(self):
        return np.array([s.d for s in self.samples])

    @property
    def xis(self):
        return np.array([s.xi for s in self.samples])

    def to_rows(self):
        return [
            {"d": s.d, "xi": [float(v) for v in s.xi], "jacobian_min_abs_eig": s.jacobian_min_abs_eig,
             "iterations": s.iterations, "residual": s.residual}
            for s in self.samples
        ]


def _tangent(xi, d, p, m):
    """``d xi / d log d`` along the solution curve."""
    J, dF = jacobian_at(xi, d, p, m)
    return -np.linalg.solve(J, dF) * d


def _sample(pt):
    J, _ = jacobian_at(pt.xi, pt.descriptor.d, pt.descriptor.p, pt.descriptor.m)
    ev = np.linalg.eigvals(J)
    return PathSample(
        float(pt.descriptor.d), pt.xi.copy(), float(np.abs(ev).min()),
        int(pt.info["iterations"]), float(pt.info["residual"]),
    )


def _march(family, pt, d_end, samples_per_decade, tol, record, max_halvings=10):
    """Continue from ``pt`` to ``d_end``, appending samples to ``record`` if given.

    Returns ``(report, last_point)``; ``report`` is ``None`` on success.
    """
    p, m = family.p, family.m
    xi, d = pt.xi.copy(), float(pt.descriptor.d)
    direction = 1.0 if d_end > d else -1.0
    base = np.log(10.0) / samples_per_decade
    h = base
    halvings = 0
    last = pt
    while (d_end - d) * direction > 1e-12 * d:
        step = min(h, abs(np.log(d_end / d)))
        d_new = d * np.exp(direction * step)
        if abs(d_new - d_end) < 1e-9 * d_end:
            d_new = d_end
        try:
            pred = xi + _tangent(xi, d, p, m) * np.log(d_new / d)
            new = newton_solve(IsotropyDescriptor(p, m, d_new), pred, tol=tol, max_iter=12)
        except (ConvergenceError, DomainError, np.linalg.LinAlgError) as exc:
            halvings += 1
            if halvings > max_halvings:
                return {"reason": f"step failed after {max_halvings} halvings: {exc}", "last_good_d": d}, last
            h *= 0.5
            continue
        xi, d, last = new.xi, d_new, new
        if record is not None:
            record.append(_sample(new))
        if halvings == 0 and h < base:
            h = min(base, 2 * h)
        halvings = 0
    return None, last


def _anchor_point(family, d, tol):
    seed = seed_point(family, d)
    return newton_solve(seed.descriptor, seed.xi, tol=tol)


def _robust_anchor(family, d, tol):
    """Solution at ``d``, anchoring further out and marching back if the seed misses."""
    try:
        return _anchor_point(family, d, tol)
    except ConvergenceError as exc:
        err = exc
    for far in (10 * d, 100 * d, 1000 * d):
        try:
            start = _anchor_point(family, far, tol)
        except ConvergenceError:
            continue
        report, pt = _march(family, start, d, 20, tol, None)
        if report is None:
            return pt
    raise err


def solve_family(family, d, tol=1e-12, anchor=ANCHOR_D):
    """Critical point of ``family`` at (real) ``d``.

    For ``d >= anchor`` Newton starts from the series seed; below it the
    branch is followed down from ``anchor`` so that the right solution is
    tracked.
    """
    d = float(d)
    if d >= anchor:
        pt = _robust_anchor(family, d, tol)
        pt.xi = canonical_order(family, pt.xi)
        return pt
    start = _robust_anchor(family, anchor, tol)
    report, pt = _march(family, start, d, 40, tol, None)
    if report is not None:
        raise ConvergenceError(f"continuation to d={d} failed: {report['reason']}", last_good=report["last_good_d"])
    pt.xi = canonical_order(family, pt.xi)
    return pt


def continue_family(family, d_start, d_end, samples_per_decade=40, tol=1e-12):
    """Sampled solution branch of ``family`` from ``d_start`` to ``d_end``.

    Steps are geometric in ``d`` and halved on Newton failure; after ten
    halvings in a row the path stops and ``terminated`` records the last good
    ``d``.
    """
    d_min = 3 if family.p == 1 else 2
    if not min(d_start, d_end) >= d_min:
        raise DomainError(f"continuation range must stay at d >= {d_min} for p={family.p}")
    path = ContinuationPath(family)
    start = solve_family(family, d_start, tol=tol)
    path.samples.append(_sample(start))
    path.terminated, _ = _march(family, start, float(d_end), samples_per_decade, tol, path.samples)
    return path
