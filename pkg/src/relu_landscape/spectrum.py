"""Hessian spectra organised by isotypic component.

Under ``S_q`` (``q = d - p``) acting on ``M(k, d)`` the Hessian at a
symmetric point splits over four irreducible representations:

* ``t``  trivial, degree 1, ``(p+1) m + 3p + 2`` copies;
* ``s``  standard, degree ``q - 1``, ``m + 2p + 3`` copies;
* ``x``  exterior square of the standard, degree ``(q-1)(q-2)/2``, one copy;
* ``y``  degree ``q(q-3)/2``, one copy.

Two routes are provided: a dense eigensolve whose clusters are labelled by
projecting eigenvectors onto the components, and small per-component blocks
built from Hessian-vector products that scale to large ``d``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructureError
from .kernel import HessianOperator, RowBlockOperator, WeightConfig, hessian
from .symmetry import IsotropyDescriptor, _coordinate_slices, reduced_jacobian

IRREPS = ("t", "s", "x", "y")
CLUSTER_RTOL = 1e-6
DENSE_LIMIT = 4000


def irrep_degree(irrep, q):
    q = int(q)
    return {"t": 1, "s": q - 1, "x": (q - 1) * (q - 2) // 2, "y": q * (q - 3) // 2}[irrep]


def copy_counts(p, m):
    """Number of copies of each irreducible representation in ``M(k, d)``."""
    return {"t": (p + 1) * m + 3 * p + 2, "s": m + 2 * p + 3, "x": 1, "y": 1}


def _as_W(cfg):
    return cfg.W if isinstance(cfg, WeightConfig) else np.asarray(cfg, dtype=float)


def _check_shape(W, desc):
    if W.shape != (desc.k, desc.int_d):
        raise StructureError(f"matrix shape {W.shape} does not match k={desc.k}, d={desc.int_d}")


# --- isotypic projections -------------------------------------------------------


def _split_vector(v):
    mean = v.mean()
    return np.full_like(v, mean), v - mean


def isotypic_parts(X, descriptor):
    """Orthogonal decomposition ``X = X_t + X_s + X_x + X_y``.

    The ``q x q`` block is split into its diagonal and off-diagonal averages
    (trivial), diagonal deviations plus row/column patterns (standard), and a
    remainder with zero row and column sums whose antisymmetric part is ``x``
    and symmetric part is ``y``.  Every other entry is either a length-``q``
    vector (trivial mean plus standard deviation) or a fixed scalar.
    """
    desc = descriptor
    X = np.asarray(X, dtype=float)
    _check_shape(X, desc)
    d = desc.int_d
    q = d - desc.p
    if q < 3:
        raise StructureError("isotypic decomposition needs q >= 3")
    parts = {name: np.zeros_like(X) for name in IRREPS}
    B = X[:q, :q]
    diag = np.diag(B).copy()
    off = B - np.diag(diag)
    a_bar = diag.mean()
    o_bar = off.sum() / (q * (q - 1))
    ones_off = np.ones((q, q)) - np.eye(q)
    parts["t"][:q, :q] = a_bar * np.eye(q) + o_bar * ones_off
    r = off.sum(axis=1)
    c = off.sum(axis=0)
    r -= r.mean()
    c -= c.mean()
    u = ((q - 1) * r + c) / (q * (q - 2))
    w = (r + (q - 1) * c) / (q * (q - 2))
    pattern = (u[:, None] + w[None, :]) * ones_off
    parts["s"][:q, :q] = np.diag(diag - a_bar) + pattern
    R = off - o_bar * ones_off - pattern
    parts["x"][:q, :q] = 0.5 * (R - R.T)
    parts["y"][:q, :q] = 0.5 * (R + R.T)
    vectors = [X[q:, :q][a] for a in range(X.shape[0] - q)]
    for a, v in enumerate(vectors):
        t, s = _split_vector(v)
        parts["t"][q + a, :q] = t
        parts["s"][q + a, :q] = s
    if desc.p:
        t, s = _split_vector(X[:q, q])
        parts["t"][:q, q] = t
        parts["s"][:q, q] = s
        parts["t"][q:, q] = X[q:, q]
    return parts


def isotypic_content(X, descriptor):
    """Squared norm of each isotypic part of ``X``."""
    return {k: float(np.sum(v * v)) for k, v in isotypic_parts(X, descriptor).items()}


# --- explicit representatives ---------------------------------------------------


@dataclass
class IrrepBasis:
    descriptor: IsotropyDescriptor
    irrep: str
    representatives: list
    degree: int

    @property
    def r(self):
        return len(self.representatives)

    def rows_used(self):
        mask = np.zeros(self.representatives[0].shape[0], dtype=bool)
        for R in self.representatives:
            mask |= np.any(R != 0, axis=1)
        return np.flatnonzero(mask)


def _orthonormalize(mats):
    shape = mats[0].shape
    A = np.array([M.ravel() for M in mats]).T
    Q, Rr = np.linalg.qr(A)
    keep = np.abs(np.diag(Rr)) > 1e-12
    if not np.all(keep):
        raise StructureError("representative matrices are linearly dependent")
    # fix signs so the first representative is unchanged up to scale
    Q = Q * np.sign(np.diag(Rr))[None, :]
    return [Q[:, i].reshape(shape) for i in range(Q.shape[1])]


def build_irrep_basis(descriptor, irrep, z=None):
    """One orthonormal representative per copy of ``irrep``.

    Standard copies are the images of a single zero-sum vector ``z`` under
    the equivariant embeddings (diagonal, row pattern, column pattern, the
    ``p`` column, each single row), orthonormalised.  Because every copy uses
    the same ``z``, the Hessian restricted to their span has the component's
    eigenvalues.
    """
    desc = descriptor
    d = desc.int_d
    q = d - desc.p
    if irrep not in IRREPS:
        raise StructureError(f"unknown representation {irrep!r}")
    if q < 3 or (irrep == "y" and q < 4):
        raise StructureError(f"representation {irrep} does not occur for q={q}")
    k = desc.k
    if irrep == "t":
        reps = []
        for mask in _coordinate_slices(desc):
            M = mask.astype(float)
            reps.append(M / np.linalg.norm(M))
    elif irrep == "s":
        if z is None:
            z = np.zeros(q)
            z[0], z[1] = 1.0, -1.0
        z = np.asarray(z, dtype=float)
        if z.shape != (q,) or abs(z.sum()) > 1e-12 or not np.any(z):
            raise StructureError("z must be a non-zero length-q vector summing to zero")
        z = z / np.linalg.norm(z)
        ones_off = np.ones((q, q)) - np.eye(q)
        raw = []
        for block in (np.diag(z), z[:, None] * ones_off, z[None, :] * ones_off):
            M = np.zeros((k, d))
            M[:q, :q] = block
            raw.append(M)
        if desc.p:
            M = np.zeros((k, d))
            M[:q, q] = z
            raw.append(M)
        for a in range(k - q):
            M = np.zeros((k, d))
            M[q + a, :q] = z
            raw.append(M)
        reps = _orthonormalize(raw)
    else:
        u = np.zeros(q)
        u[0], u[1] = 1.0, -1.0
        v = np.zeros(q)
        if q >= 4:
            v[2], v[3] = 1.0, -1.0
        else:
            v[:] = (1.0, 1.0, -2.0)
        outer = np.outer(u, v)
        block = outer - outer.T if irrep == "x" else outer + outer.T
        M = np.zeros((k, d))
        M[:q, :q] = block
        reps = [M / np.linalg.norm(M)]
    for R in reps:
        content = isotypic_content(R, desc)
        if abs(content[irrep] - 1.0) > 1e-10:
            raise StructureError(f"representative leaks out of the {irrep} component")
    return IrrepBasis(desc, irrep, reps, irrep_degree(irrep, q))


def isotypic_block(cfg, basis):
    """``r x r`` matrix ``<R_a, H R_b>`` and its eigenvalues."""
    W = _as_W(cfg)
    _check_shape(W, basis.descriptor)
    rows = basis.rows_used()
    if rows.size <= 8:
        op = RowBlockOperator(W, rows)
        vecs = [R[rows] for R in basis.representatives]
        images = [op.matvec(v) for v in vecs]
    else:
        op = HessianOperator(W)
        vecs = basis.representatives
        images = [op.matvec(v) for v in vecs]
    r = basis.r
    B = np.empty((r, r))
    for a in range(r):
        for b in range(r):
            B[a, b] = np.sum(vecs[a] * images[b])
    B = 0.5 * (B + B.T)
    return B, np.linalg.eigvalsh(B)


def trivial_eigenvalues(pt):
    """Trivial-component eigenvalues as the spectrum of the reduced Jacobian.

    The reduced Jacobian is similar to the Hessian restricted to the fixed
    space, so this works at real ``d`` and costs nothing in ``d``.
    """
    ev = np.linalg.eigvals(reduced_jacobian(pt))
    if np.abs(ev.imag).max() > 1e-8 * max(1.0, np.abs(ev).max()):
        raise StructureError("reduced Jacobian has complex eigenvalues; point is not critical")
    return np.sort(ev.real)


# --- reports --------------------------------------------------------------------


@dataclass
class SpectrumReport:
    descriptor: IsotropyDescriptor
    method: str
    groups: dict
    degrees: dict
    diagnostics: dict = field(default_factory=dict)

    def eigenvalues(self, irrep):
        """Sorted eigenvalues of ``irrep``, one entry per copy."""
        return np.array(sorted(self.groups.get(irrep, [])))

    def minimum(self):
        vals = [v for vs in self.groups.values() for v in vs]
        return float(min(vals))

    def to_json(self):
        desc = self.descriptor
        groups = []
        for irrep in IRREPS:
            if irrep not in self.groups:
                continue
            groups.append({
                "irrep": irrep,
                "degree": self.degrees[irrep],
                "eigenvalues": [
                    {"value": float(v), "multiplicity": self.degrees[irrep]} for v in self.eigenvalues(irrep)
                ],
            })
        return {
            "descriptor": {"p": desc.p, "m": desc.m, "d": desc.d},
            "method": self.method,
            "groups": groups,
            "diagnostics": self.diagnostics,
        }


def _degree_collisions(q):
    degs = {i: irrep_degree(i, q) for i in IRREPS}
    present = {i: v for i, v in degs.items() if v > 0}
    out = []
    names = list(present)
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            if present[names[a]] == present[names[b]]:
                out.append((names[a], names[b]))
    return out


def cluster_eigenvalues(evals, rtol=CLUSTER_RTOL):
    """Index groups of sorted eigenvalues closer than ``rtol * max(1, |lambda|)``."""
    order = np.argsort(evals)
    clusters = [[order[0]]]
    for i in order[1:]:
        prev = evals[clusters[-1][-1]]
        if evals[i] - prev <= rtol * max(1.0, abs(evals[i])):
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def full_spectrum(cfg, descriptor):
    """Dense eigensolve with clusters labelled by isotypic projection."""
    desc = descriptor
    W = _as_W(cfg)
    _check_shape(W, desc)
    k, d = W.shape
    if k * d > DENSE_LIMIT:
        raise DomainError(f"k*d={k * d} exceeds the dense limit {DENSE_LIMIT}; use adapted_spectrum")
    q = d - desc.p
    H = hessian(W)
    evals, Q = np.linalg.eigh(H)
    recon = float(np.linalg.norm(H - (Q * evals) @ Q.T) / max(np.linalg.norm(H), 1e-300))
    degrees = {i: irrep_degree(i, q) for i in IRREPS}
    groups = {i: [] for i in IRREPS if degrees[i] > 0}
    unassigned = []
    for idx in cluster_eigenvalues(evals):
        content = dict.fromkeys(IRREPS, 0.0)
        for j in idx:
            for name, v in isotypic_content(Q[:, j].reshape(k, d), desc).items():
                content[name] += v
        value = float(np.mean(evals[idx]))
        leftover = 0.0
        for name in groups:
            copies = content[name] / degrees[name]
            n = int(round(copies))
            leftover += abs(copies - n) * degrees[name]
            groups[name].extend([value] * n)
        if leftover > 1e-6:
            unassigned.append({"value": value, "size": len(idx), "content": content})
    counts = copy_counts(desc.p, desc.m)
    found = {name: len(v) for name, v in groups.items()}
    diagnostics = {
        "reconstruction_residual": recon,
        "total_multiplicity": int(len(evals)),
        "copies_found": found,
        "copies_expected": {n: counts[n] for n in groups},
        "unassigned_clusters": unassigned,
        "degree_collisions": _degree_collisions(q),
        "absent": [i for i in IRREPS if degrees[i] <= 0],
    }
    return SpectrumReport(desc, "dense", groups, degrees, diagnostics)


def adapted_spectrum(cfg, descriptor, irreps=IRREPS, trivial_from=None):
    """Per-component blocks from Hessian-vector products.

    ``trivial_from`` may be a :class:`ReducedPoint`, in which case the trivial
    eigenvalues come from the reduced Jacobian instead of ``N`` products.
    """
    desc = descriptor
    W = _as_W(cfg)
    _check_shape(W, desc)
    q = desc.int_d - desc.p
    degrees = {i: irrep_degree(i, q) for i in IRREPS}
    groups, blocks = {}, {}
    for irrep in irreps:
        if degrees[irrep] <= 0:
            continue
        if irrep == "t" and trivial_from is not None:
            groups["t"] = list(trivial_eigenvalues(trivial_from))
            continue
        B, ev = isotypic_block(W, build_irrep_basis(desc, irrep))
        groups[irrep] = list(ev)
        blocks[irrep] = B
    diagnostics = {"block_sizes": {k: v.shape[0] for k, v in blocks.items()}}
    return SpectrumReport(desc, "adapted", groups, degrees, diagnostics)


# --- x / y eigenvalues from series ----------------------------------------------


X_LIMIT = 0.25 - 1 / (2 * np.pi)
Y_LIMIT = 0.25 + 1 / (2 * np.pi)


@dataclass
class XYSeries:
    """``lambda = const + quarter d^(1/4) + half d^(1/2) + O(d^(-1/4))``."""

    x_constant: float
    y_constant: float
    quarter: float
    half: float
    gradient_terms: dict

    def evaluate(self, d):
        extra = self.quarter * d**0.25 + self.half * d**0.5
        return self.x_constant + extra, self.y_constant + extra


def _laurent_field_terms(expansion, dps=50):
    """Coefficients of ``d^(1/2), d^(1/4), d^0`` in the first two field components."""
    import mpmath

    from .highprec import chebyshev_nodes, polynomial_coefficients
    from .symmetry import field_mp

    fam = expansion.family
    s_nodes = chebyshev_nodes(24, 0.0, 1e-2)
    rows = []
    with mpmath.workdps(dps):
        for s in s_nodes:
            s = mpmath.mpf(s)
            d = s**-4
            xi = [sum(mpmath.mpf(float(c)) * s**j for j, c in enumerate(row)) for row in expansion.coeffs]
            F = field_mp(xi, d, fam.p, fam.m)
            rows.append([F[0] * s * s, F[1] * s * s])
    C = polynomial_coefficients(s_nodes, rows, 10, dps)
    return {
        "F1_half": float(C[0, 0]), "F1_quarter": float(C[1, 0]), "F1_zero": float(C[2, 0]),
        "F2_zero": float(C[2, 1]),
    }


def xy_eigenvalues_from_fps(expansion, tol=1e-6):
    """x/y eigenvalues of a ``d^(-1/4)`` family from gradient coefficients.

    The x eigenvalue equals ``1/4 - 1/(2 pi)`` plus a combination of the
    ``d^(1/2)``, ``d^(1/4)`` and ``d^0`` coefficients of the diagonal and
    off-diagonal gradient entries along the series, up to ``O(d^(-1/4))``;
    the y eigenvalue is the same with ``+1/(2 pi)``.  At a critical
    expansion the gradient coefficients vanish.
    """
    fam = expansion.family
    if fam.p != 1 or fam.m != 1 or expansion.kappa != 4:
        raise StructureError("the x/y gradient formula applies to the p=1, k=d+1, d^(-1/4) families")
    c = expansion.coeffs
    need_zero = [(0, 1), (1, 0), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2), (2, 3)]
    bad = [(i, j) for i, j in need_zero if abs(expansion.coefficient(i, j)) > tol]
    if bad or abs(abs(c[0, 0]) - 1) > tol:
        raise StructureError(f"expansion violates the required vanishing structure at {bad}")
    g = _laurent_field_terms(expansion)
    c2 = expansion.coefficient(0, 2)
    common = g["F1_zero"] - c2 * g["F1_half"] - g["F2_zero"]
    return XYSeries(X_LIMIT + common, Y_LIMIT + common, g["F1_quarter"], g["F1_half"], g)


def xy_asymptotic_constants(family, grid=None, degree=6):
    """Fitted ``d -> inf`` limits of the x and y eigenvalues along ``family``.

    Uses the one-dimensional x/y blocks on an integer grid (default 30
    points in ``[20, 1000]``) and a polynomial in ``d^(-1/kappa)``.  The
    ``d^(-1/4)`` families need the wide grid and the high degree because the
    correction terms are large over ``d <= 10^3``.
    """
    from .solver import solve_family
    from .symmetry import embed

    if grid is None:
        grid = sorted({int(round(v)) for v in np.geomspace(20, 1000, 30)})
    xs, ys = [], []
    for d in grid:
        pt = solve_family(family, d)
        rep = adapted_spectrum(_as_W(embed(pt)), pt.descriptor, irreps=("x", "y"))
        xs.append(rep.eigenvalues("x")[0])
        ys.append(rep.eigenvalues("y")[0])
    s = np.asarray(grid, dtype=float) ** (-1.0 / family.kappa)
    A = np.vstack([s**j for j in range(degree + 1)]).T
    cx = np.linalg.lstsq(A, np.array(xs), rcond=None)[0]
    cy = np.linalg.lstsq(A, np.array(ys), rcond=None)[0]
    return {"x": float(cx[0]), "y": float(cy[0]), "grid": list(grid), "x_values": xs, "y_values": ys}


# --- interlacing certificate ----------------------------------------------------


@dataclass
class InterlacingCertificate:
    block: np.ndarray
    eigenvalues: np.ndarray
    verdict: str
    submatrix_min: float = None
    hessian_min: float = None
    rows: list = None

    @property
    def inequality_holds(self):
        if self.submatrix_min is None or self.hessian_min is None:
            return None
        return self.hessian_min <= self.submatrix_min + 1e-10


def interlacing_certificate(cfg, descriptor, full_check=None):
    """2x2 standard block on two single student rows.

    For type II points the rows are the two single rows that do not converge
    to the negated target row (the canonical order puts that one last); for
    type I they are the last two rows.  Two rows carry exactly two standard
    copies (a zero-sum vector in either row).  A negative eigenvalue of the 2x2 block is an eigenvalue of
    the principal submatrix for those rows, so by interlacing the full
    Hessian has an eigenvalue at least as negative.  With ``full_check`` (the
    default when ``k d`` is small) both minima are computed densely.
    """
    desc = descriptor
    if desc.p != 1 or desc.m != 2:
        raise StructureError("the interlacing certificate needs p=1 and two extra rows (k=d+2)")
    W = _as_W(cfg)
    _check_shape(W, desc)
    k, d = W.shape
    q = d - 1
    z = np.zeros(d)
    z[0], z[1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    if W[k - 1, d - 1] < -0.5:
        rows = [q, q + 1]
    else:
        rows = [k - 2, k - 1]
    op = RowBlockOperator(W, rows)
    vecs = [np.vstack([z, np.zeros(d)]), np.vstack([np.zeros(d), z])]
    images = [op.matvec(v) for v in vecs]
    B = np.array([[np.sum(a * b) for b in images] for a in vecs])
    B = 0.5 * (B + B.T)
    ev = np.linalg.eigvalsh(B)
    verdict = "saddle" if ev[0] < 0 else "inconclusive"
    cert = InterlacingCertificate(B, ev, verdict, rows=rows)
    if full_check is None:
        full_check = k * d <= DENSE_LIMIT
    if full_check:
        cert.submatrix_min = float(np.linalg.eigvalsh(op.dense())[0])
        cert.hessian_min = float(np.linalg.eigvalsh(hessian(W))[0])
    return cert


def interlacing_constants(grid):
    """Fitted ``d -> inf`` limits of both 2x2 block eigenvalues along type II ``k = d+2``.

    Fits ``a + b d^(-1/2) + c d^(-1)`` to each eigenvalue over the integer
    ``grid``.  Returns ``(constants, samples)`` with ``constants`` ordered
    ``(larger, smaller)`` and one ``(d, lambda_min, lambda_max, verdict)`` per
    grid point.
    """
    from .families import FamilyId
    from .solver import solve_family
    from .symmetry import embed

    fam = FamilyId("II", 1, 2)
    E, samples = [], []
    for d in grid:
        pt = solve_family(fam, d)
        cert = interlacing_certificate(embed(pt), pt.descriptor, full_check=False)
        E.append(cert.eigenvalues)
        samples.append((int(d), float(cert.eigenvalues[0]), float(cert.eigenvalues[1]), cert.verdict))
    ds = np.asarray(grid, dtype=float)
    A = np.vstack([ds**0, ds**-0.5, ds**-1.0]).T[:, : min(3, len(grid))]
    const = np.linalg.lstsq(A, np.array(E), rcond=None)[0][0]
    return (float(const[1]), float(const[0])), samples


# --- tables ---------------------------------------------------------------------


@dataclass
class TableReport:
    family: object
    mode: str
    rows: list
    grid: list = None

    def rows_for(self, irrep):
        return [r for r in self.rows if r["irrep"] == irrep]

    def to_csv_rows(self):
        keys = ["irrep", "branch", "d", "value", "slope", "constant", "fit_rms", "flagged"]
        return keys, [[r.get(k, "") for k in keys] for r in self.rows]


def _point_spectrum(family, d, irreps=("t", "s")):
    """Eigenvalues per component at integer ``d``, dense when small enough."""
    from .solver import solve_family
    from .symmetry import embed

    pt = solve_family(family, d)
    W = _as_W(embed(pt))
    if W.size <= DENSE_LIMIT:
        rep = full_spectrum(W, pt.descriptor)
    else:
        rep = adapted_spectrum(W, pt.descriptor, irreps=irreps, trivial_from=pt)
    return {i: rep.eigenvalues(i) for i in irreps}


def fit_branch(ds, values, kappa, flag_rms=1e-4):
    """Fit a constant branch ``a + b s + c s^2`` or a linear one ``a d + b + c s + e s^2``.

    ``s = d^(-1/kappa)``.  A branch is treated as linear when it grows by more
    than ``0.05`` per unit of ``d``.  Rows are flagged when the rms residual
    exceeds ``flag_rms`` relative to the largest value.
    """
    ds = np.asarray(ds, dtype=float)
    values = np.asarray(values, dtype=float)
    s = ds ** (-1.0 / kappa)
    growth = (values[-1] - values[0]) / (ds[-1] - ds[0])
    linear = growth > 0.05
    cols = [np.ones_like(ds), s, s * s]
    if linear:
        cols = [ds] + cols
    A = np.vstack(cols).T
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - values) ** 2)))
    out = {"slope": float(coef[0]) if linear else 0.0, "constant": float(coef[1] if linear else coef[0])}
    out.update(fit_rms=rms, flagged=bool(rms > flag_rms * max(1.0, float(np.abs(values).max()))))
    return out


def table_report(family, mode="exact-d", d=None, grid=None, irreps=("t", "s"), trivial_grid=None):
    """Trivial and standard eigenvalues of ``family``, exactly at ``d`` or fitted over a grid.

    In fit mode the standard branches use Hessian-vector products on the
    integer ``grid``; trivial branches come from the reduced Jacobian on
    ``trivial_grid`` (real ``d``, default ``10^2..10^5``), which pins the
    constants of the linear branches far better than a decade of data.
    Branches are the sorted eigenvalues tracked by rank.
    """
    if mode == "exact-d":
        if d is None:
            raise ValueError("exact-d mode needs d")
        spec = _point_spectrum(family, d, irreps)
        rows = [
            {"irrep": i, "branch": j, "d": float(d), "value": float(v)}
            for i in irreps for j, v in enumerate(spec[i])
        ]
        return TableReport(family, mode, rows)
    if mode != "asymptotic-fit":
        raise ValueError(f"unknown mode {mode!r}")
    from .solver import solve_family

    if grid is None:
        grid = [int(round(v)) for v in np.geomspace(100, 1000, 8)]
    if trivial_grid is None:
        trivial_grid = list(np.geomspace(1e2, 1e5, 16))
    rows = []
    if "t" in irreps:
        V = np.array([trivial_eigenvalues(solve_family(family, g)) for g in trivial_grid])
        for j in range(V.shape[1]):
            rows.append({"irrep": "t", "branch": j, **fit_branch(trivial_grid, V[:, j], family.kappa)})
    rest = [i for i in irreps if i != "t"]
    if rest:
        spectra = [_point_spectrum(family, g, rest) for g in grid]
        for i in rest:
            V = np.array([sp[i] for sp in spectra])
            for j in range(V.shape[1]):
                rows.append({"irrep": i, "branch": j, **fit_branch(grid, V[:, j], family.kappa)})
    return TableReport(family, mode, rows, list(grid))


def match_reference(fitted, reference, tol):
    """Greedy nearest match of reference constants to fitted ones (unordered).

    Returns a list of ``(reference, fitted, ok)``.
    """
    pool = list(fitted)
    out = []
    for v in reference:
        j = int(np.argmin([abs(f - v) for f in pool]))
        f = pool.pop(j)
        out.append((v, f, abs(f - v) <= tol))
    return out
