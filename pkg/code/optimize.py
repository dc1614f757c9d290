"""This file contains the p-continuation density optimizer.

For a fixed p > 1 the optimal density in the class
{theta >= 0, ||theta||_{L^p} <= L} is an explicit function of the first
eigenfunction:

    theta_p = L |grad u_p|^(2/(p-1)) / || |grad u_p|^(2/(p-1)) ||_{L^p}.

fixed_point_solve alternates the eigen-solve with this update (relaxed by a
damping factor) until theta stops moving. continuation_solve drives p towards 1
with warm starts, then projects the last density onto the class int theta = L
and certifies it with the min-max bound

    lambda1(theta) <= (int |grad u|^2 + m L ||grad u||_inf^2) / int u^2,

valid for every admissible theta and every u.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from eigen import DEFAULT_MAX_ITER, DEFAULT_TOL, EigenPair, dirichlet_eigenpair
from errors import ContinuationError, NumericalError, ValidationError
from fem import DensityField, assemble_mass, gradient_norms, lp_mass

DEFAULT_P_VALUES = (3.0, 2.0, 1.5, 1.25, 1.1, 1.05)
MIN_DAMPING = 1.0 / 64.0


@dataclass(frozen=True)
class ContinuationSchedule:
    """Exponents to visit (strictly decreasing, all > 1) and the inner fixed-point controls."""
    p_values: tuple = DEFAULT_P_VALUES
    inner_tol: float = 1e-6
    inner_max_iter: int = 200
    damping: float = 0.5

    def __post_init__(self):
        p = tuple(float(v) for v in self.p_values)
        if not p:
            raise ValidationError("The p schedule is empty")
        if any(v <= 1.0 for v in p):
            raise ValidationError("Every exponent in the p schedule must exceed 1, got %s" % (p,))
        if any(b >= a for a, b in zip(p, p[1:])):
            raise ValidationError("The p schedule must be strictly decreasing, got %s" % (p,))
        if not 0.0 < self.damping <= 1.0:
            raise ValidationError("Damping must lie in (0, 1], got %r" % self.damping)
        if self.inner_tol <= 0:
            raise ValidationError("Fixed-point tolerance must be positive, got %r" % self.inner_tol)
        if self.inner_max_iter < 1:
            raise ValidationError("Fixed-point iteration limit must be >= 1, got %r" % self.inner_max_iter)
        object.__setattr__(self, "p_values", p)

    @classmethod
    def parse(cls, text, **kwargs):
        """Schedule from a comma separated list such as '3,2,1.5'."""
        try:
            p_values = tuple(float(s) for s in str(text).split(",") if s.strip())
        except ValueError:
            raise ValidationError("Could not parse p schedule %r" % text)
        return cls(p_values, **kwargs)

    def to_dict(self):
        return dict(p_values=list(self.p_values), inner_tol=self.inner_tol,
                    inner_max_iter=self.inner_max_iter, damping=self.damping)


@dataclass
class FixedPointResult:
    """Outcome of fixed_point_solve; pair is the exact eigenpair of theta."""
    theta: DensityField
    pair: EigenPair
    iterations: int
    theta_delta: float
    converged: bool


@dataclass
class StageRecord:
    """One p-stage of the continuation.

    upper_bound and gap compare lambda1 with the bound for the class
    ||theta||_{L^p} <= L; at a converged fixed point they coincide. The linf
    fields compare the bound for the class int theta = L at the stage
    eigenfunction with lambda1 of the stage density rescaled to int theta = L,
    and shrink as p approaches 1.
    """
    p: float
    iterations: int
    lambda1: float
    lp_mass: float
    theta_delta: float
    converged: bool
    upper_bound: float
    gap: float
    projected_lambda1: float = float("nan")
    linf_upper_bound: float = float("nan")
    linf_gap: float = float("nan")

    def to_dict(self):
        return dict(p=self.p, iters=self.iterations, lambda1=self.lambda1, lp_mass=self.lp_mass,
                    theta_delta=self.theta_delta, converged=self.converged,
                    upper_bound=self.upper_bound, gap=self.gap, projected_lambda1=self.projected_lambda1,
                    linf_upper_bound=self.linf_upper_bound, linf_gap=self.linf_gap)


@dataclass
class ContinuationReport:
    """Trace and result of continuation_solve.

    theta/pair are the final density (projected onto int theta = L) and its
    eigenpair; upper_bound is the min-max bound at pair.u and duality_gap is
    upper_bound - pair.lambda1. stage_theta/stage_pair hold the last p-stage.
    """
    m: float
    L: float
    schedule: ContinuationSchedule
    stages: list = field(default_factory=list)
    stage_theta: DensityField = None
    stage_pair: EigenPair = None
    theta: DensityField = None
    pair: EigenPair = None
    upper_bound: float = float("nan")
    duality_gap: float = float("nan")
    gradient_norm_ratio: float = float("nan")

    @property
    def lambda1(self):
        return self.pair.lambda1 if self.pair is not None else float("nan")

    @property
    def completed(self):
        return self.pair is not None

    def to_dict(self):
        return dict(
            params=dict(m=self.m, L=self.L, schedule=self.schedule.to_dict()),
            stages=[s.to_dict() for s in self.stages],
            final=dict(lambda1=self.lambda1, upper_bound=self.upper_bound, gap=self.duality_gap,
                       gradient_norm_ratio=self.gradient_norm_ratio,
                       eigen_residual=self.pair.residual if self.pair is not None else float("nan")),
        )


def _saturate(values, mesh, p, L):
    """Rescales nonnegative values so that their L^p mass is exactly L."""
    if L == 0:
        return np.zeros(mesh.num_triangles)
    s = lp_mass(DensityField(mesh, values, p))
    if s == 0.0:
        raise NumericalError("Cannot rescale a zero density to mass %r" % L)
    return values * (L / s)


def theta_update(grad_norms, mesh, p, L):
    """Optimal density of the class ||theta||_{L^p} <= L for a given |grad u|.

    Inputs:
      grad_norms: |grad u| per triangle, shape (F,)
      mesh: Mesh supplying the triangle areas
      p: exponent > 1
      L: mass >= 0

    Returns:
      DensityField with lp_mass exactly L; zero where grad u vanishes.
    """
    g = np.asarray(grad_norms, dtype=float)
    if g.shape != (mesh.num_triangles,):
        raise ValidationError("Gradient field has shape %s, expected (%i,)" % (g.shape, mesh.num_triangles))
    if not p > 1.0:
        raise ValidationError("Exponent p must exceed 1, got %r" % p)
    if L < 0:
        raise ValidationError("Mass L must be nonnegative, got %r" % L)
    if not np.all(np.isfinite(g)) or np.any(g < 0):
        raise ValidationError("Gradient norms must be finite and nonnegative")
    top = g.max()
    if top == 0.0:
        raise NumericalError("Gradient field vanishes everywhere; the eigenfunction is degenerate")
    if L == 0:
        return DensityField.zeros(mesh, p)
    # normalizing by the maximum keeps g^(2/(p-1)) in [0, 1] for p close to 1
    w = (g / top) ** (2.0 / (p - 1.0))
    values = L * w / np.dot(mesh.areas, w ** p) ** (1.0 / p)
    return DensityField(mesh, values, p)


def fixed_point_solve(mesh, m, L, p, tol=1e-6, max_iter=200, damping=0.5, theta0=None, u0=None,
                      eig_tol=DEFAULT_TOL, eig_max_iter=DEFAULT_MAX_ITER):
    """Optimal pair for a fixed exponent p by alternating eigen-solve and density update.

    Each step computes the eigenpair of the current theta, the optimal density
    theta_update(|grad u|), and moves theta a fraction `damping` towards it
    (followed by a rescale to L^p mass L). The step is halved whenever the change
    grows. Stops once sum_T area_T |theta_new - theta| < tol.

    theta0 (DensityField) and u0 (nodal vector) warm start the iteration.
    """
    if not p > 1.0:
        raise ValidationError("Exponent p must exceed 1, got %r" % p)
    if m < 0 or L < 0:
        raise ValidationError("Stiffness and mass must be nonnegative, got m=%r L=%r" % (m, L))
    if not 0.0 < damping <= 1.0:
        raise ValidationError("Damping must lie in (0, 1], got %r" % damping)

    if theta0 is None:
        values = np.full(mesh.num_triangles, 1.0)
    else:
        if theta0.mesh is not mesh:
            raise ValidationError("Start density is defined on a different mesh")
        values = theta0.values if np.any(theta0.values) else np.full(mesh.num_triangles, 1.0)
    theta = DensityField(mesh, _saturate(values, mesh, p, L), p)

    omega = damping
    prev_delta = np.inf
    u = u0
    for it in range(1, max_iter + 1):
        pair = dirichlet_eigenpair(mesh, theta, m, eig_tol, eig_max_iter, u0=u)
        if not pair.converged:
            logging.warning("p=%g iter %i: eigen residual %.3e above tolerance", p, it, pair.residual)
        target = theta_update(gradient_norms(mesh, pair.u), mesh, p, L)
        mixed = (1.0 - omega) * theta.values + omega * target.values
        new_values = _saturate(mixed, mesh, p, L)
        delta = float(np.dot(mesh.areas, np.abs(new_values - theta.values)))
        logging.debug("p=%g iter %i: lambda1 %.12f, theta change %.3e, damping %.4f",
                      p, it, pair.lambda1, delta, omega)
        if delta < tol:
            return FixedPointResult(theta, pair, it, delta, True)
        if delta > prev_delta and omega > MIN_DAMPING:
            omega = max(0.5 * omega, MIN_DAMPING)
            logging.info("p=%g iter %i: theta change grew to %.3e, damping reduced to %.4f", p, it, delta, omega)
        prev_delta = delta
        last = FixedPointResult(theta, pair, it, delta, False)
        theta = DensityField(mesh, new_values, p)
        u = pair.u

    logging.warning("Fixed point for p=%g did not converge in %i iterations (theta change %.3e)",
                    p, max_iter, last.theta_delta)
    return last


def minmax_upper_bound(u, mesh, m, L, p=None):
    """Min-max upper bound on lambda1(theta) for every admissible theta.

    With p=None: (int |grad u|^2 + m L max_T |grad u|^2) / int u^2, the bound for
    the class int theta <= L. With p > 1 the maximum is replaced by
    || |grad u|^2 ||_{L^q}, q = p / (p - 1), the bound for ||theta||_{L^p} <= L.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.num_nodes,):
        raise ValidationError("Nodal vector has shape %s, expected (%i,)" % (u.shape, mesh.num_nodes))
    if not np.any(u):
        raise ValidationError("Upper bound of a zero vector")
    g = gradient_norms(mesh, u)
    energy = float(np.dot(mesh.areas, g ** 2))
    denom = float(u @ (assemble_mass(mesh, eliminate=False) @ u))
    top = g.max()
    if p is None:
        sup = top ** 2
    else:
        if not p > 1.0:
            raise ValidationError("Exponent p must exceed 1, got %r" % p)
        q = p / (p - 1.0)
        sup = top ** 2 * float(np.dot(mesh.areas, (g / top) ** (2.0 * q))) ** (1.0 / q) if top > 0 else 0.0
    return (energy + m * L * sup) / denom


def gradient_norm_ratio(u, mesh, p):
    """||grad u||_{L^2q} / max_T |grad u| with q = p / (p - 1), measured with dx / |Omega|."""
    if not p > 1.0:
        raise ValidationError("Exponent p must exceed 1, got %r" % p)
    g = gradient_norms(mesh, u)
    top = g.max()
    if top == 0.0:
        raise ValidationError("Gradient ratio of a constant function")
    q = p / (p - 1.0)
    mean = float(np.dot(mesh.areas, (g / top) ** (2.0 * q))) / mesh.area
    return mean ** (1.0 / (2.0 * q))


def support_violation(theta, u, delta=0.1, L=None):
    """Mass of theta lying where |grad u| < (1 - delta) max |grad u|, divided by L.

    u is an EigenPair or a nodal vector. L defaults to int theta. Returns 0 for
    theta = 0.
    """
    if not 0.0 < delta < 1.0:
        raise ValidationError("Threshold delta must lie in (0, 1), got %r" % delta)
    if L is not None and L <= 0:
        raise ValidationError("Mass L must be positive, got %r" % L)
    mesh = theta.mesh
    nodal = u.u if isinstance(u, EigenPair) else u
    g = gradient_norms(mesh, nodal)
    total = theta.total_mass
    if total == 0.0:
        return 0.0
    weak = g < (1.0 - delta) * g.max()
    return float(np.dot(mesh.areas[weak], theta.values[weak])) / (total if L is None else L)


def relative_l1_distance(theta, reference):
    """sum_T area_T |theta_T - ref_T| / sum_T area_T ref_T"""
    areas = theta.mesh.areas
    return float(np.dot(areas, np.abs(theta.values - reference.values)) / np.dot(areas, reference.values))


def project_mass(theta, L):
    """Rescales theta so that int theta = L (the class without the exponent)."""
    total = theta.total_mass
    if L == 0 or total == 0.0:
        return DensityField.zeros(theta.mesh, 1.0)
    return DensityField(theta.mesh, theta.values * (L / total), 1.0)


def continuation_solve(mesh, m, L, schedule=None, eig_tol=DEFAULT_TOL, eig_max_iter=DEFAULT_MAX_ITER,
                       progress=False):
    """Runs fixed_point_solve along the p schedule with warm starts.

    Every stage also records lambda1 of its density rescaled to int theta = L
    against the min-max bound at the stage eigenfunction. After the last stage
    the density is projected onto int theta = L, its eigenpair recomputed and
    the min-max bound evaluated at it. A stage that
    raises NumericalError aborts the run with a ContinuationError carrying the
    partial report.
    """
    schedule = schedule or ContinuationSchedule()
    if m <= 0:
        raise ValidationError("Stiffness m must be positive, got %r" % m)
    if L < 0:
        raise ValidationError("Mass L must be nonnegative, got %r" % L)
    report = ContinuationReport(m, L, schedule)

    theta, u = None, None
    for p in tqdm(schedule.p_values, desc="continuation", disable=not progress):
        try:
            res = fixed_point_solve(mesh, m, L, p, schedule.inner_tol, schedule.inner_max_iter,
                                    schedule.damping, theta0=theta, u0=u,
                                    eig_tol=eig_tol, eig_max_iter=eig_max_iter)
            projected = dirichlet_eigenpair(mesh, project_mass(res.theta, L), m, eig_tol, eig_max_iter,
                                            u0=res.pair.u)
        except NumericalError as e:
            raise ContinuationError("Continuation stage p=%g failed: %s" % (p, e), report)
        bound = minmax_upper_bound(res.pair.u, mesh, m, L, p=p)
        linf_bound = minmax_upper_bound(res.pair.u, mesh, m, L)
        record = StageRecord(p, res.iterations, res.pair.lambda1, lp_mass(res.theta), res.theta_delta,
                             res.converged, bound, bound - res.pair.lambda1, projected.lambda1,
                             linf_bound, linf_bound - projected.lambda1)
        report.stages.append(record)
        report.stage_theta, report.stage_pair = res.theta, res.pair
        theta, u = res.theta, res.pair.u
        logging.info("p=%g: %i iterations, lambda1 %.12f, bound %.12f, gap %.3e, linf gap %.3e%s",
                     p, res.iterations, res.pair.lambda1, bound, record.gap, record.linf_gap,
                     "" if res.converged else " (not converged)")

    try:
        final = project_mass(theta, L)
        pair = dirichlet_eigenpair(mesh, final, m, eig_tol, eig_max_iter, u0=u)
    except NumericalError as e:
        raise ContinuationError("Final projection failed: %s" % e, report)
    report.theta, report.pair = final, pair
    report.upper_bound = minmax_upper_bound(pair.u, mesh, m, L)
    report.duality_gap = report.upper_bound - pair.lambda1
    report.gradient_norm_ratio = gradient_norm_ratio(u, mesh, schedule.p_values[-1])
    logging.info("Final: lambda1 %.12f, upper bound %.12f, gap %.3e",
                 pair.lambda1, report.upper_bound, report.duality_gap)
    return report
