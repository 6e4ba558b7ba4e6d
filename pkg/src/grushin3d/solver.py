"""Finite-difference machinery for the degenerate Dirichlet problem

    -Delta_x u - |x|^{2a} u_yy = f(x, y, u)   in Omega,   u = 0 on bd(Omega).

Discretisation: uniform cell-centred grid, 7-point stencil; the second
y-difference is scaled by |x|^{2a} evaluated at cell centres (grid counts
in x1, x2 are kept even so centres never sit on the degeneracy line x = 0).
Dirichlet data is imposed at cell faces through odd-reflection ghosts
(ghost = -u_inner), which keeps the operator symmetric positive definite
and the scheme second order in L2; plain ghost-centre zeros would shift
the boundary by h/2 and drop to first order.

The energy functional of the problem is

    Phi(u) = 1/2 <A u, u> dV - sum F(x, y, u) dV,

with A the stencil operator, so the discrete gradient A u - f(., u) is the
exact derivative of the discrete energy.  Ground states are computed by
preconditioned descent on the Nehari manifold: move toward A^{-1} f(u),
line-search on Phi, rescale so <Phi'(u), u> = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DegeneracyError, DomainError, IterationError
from .geometry import _as_alpha
from .grids import GridFunction3D

__all__ = [
    "Domain",
    "Nonlinearity",
    "power_nonlinearity",
    "SolverConfig",
    "SolutionReport",
    "GrushinOperator",
    "assemble_grushin",
    "linear_solve",
    "energy",
    "energy_gradient",
    "weak_residual",
    "nehari_scale",
    "solve_ground_state",
    "poincare_constant",
    "embedding_check",
    "validate_growth_conditions",
]


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box (optionally masked) containing the origin strictly.

    ``mask`` selects active cells; None means the full box.  Dirichlet data
    lives on the faces between active and inactive/outside cells.
    """

    bbox: np.ndarray  # (3, 2)
    dims: tuple[int, int, int]
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        bbox = np.asarray(self.bbox, dtype=float).reshape(3, 2)
        object.__setattr__(self, "bbox", bbox)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not np.all(bbox[:, 1] > bbox[:, 0]):
            raise DomainError("degenerate bbox")
        if not (np.all(bbox[:, 0] < 0) and np.all(bbox[:, 1] > 0)):
            raise DomainError("domain must contain the origin strictly inside")
        if self.dims[0] % 2 or self.dims[1] % 2:
            raise DomainError("dims in x1 and x2 must be even (centres off the y-axis)")
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != self.dims:
                raise DomainError("mask shape must match dims")
            object.__setattr__(self, "mask", m)
            ctr = np.floor(
                (0 - bbox[:, 0]) / ((bbox[:, 1] - bbox[:, 0]) / np.array(self.dims))
            ).astype(int)
            if not m[tuple(ctr)]:
                raise DomainError("origin cell must be active")

    @property
    def spacing(self) -> np.ndarray:
        return (self.bbox[:, 1] - self.bbox[:, 0]) / np.array(self.dims)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return self.bbox[axis, 0] + (np.arange(self.dims[axis]) + 0.5) * h

    def active(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.dims, dtype=bool)
        return self.mask

    def centers(self):
        return np.meshgrid(
            self.axis_centers(0), self.axis_centers(1), self.axis_centers(2), indexing="ij"
        )

    def grid_function(self, values) -> GridFunction3D:
        return GridFunction3D(self.bbox, values, self.mask)

    def weighted_measure(self, alpha) -> float:
        a = _as_alpha(alpha).alpha
        x1 = self.axis_centers(0)
        x2 = self.axis_centers(1)
        w2d = (x1[:, None] ** 2 + x2[None, :] ** 2) ** a
        act = self.active()
        return float(np.sum(w2d * act.sum(axis=2))) * self.cell_volume

    @classmethod
    def cube(cls, half_width: float = 1.0, n: int = 48) -> "Domain":
        b = float(half_width)
        return cls(np.array([(-b, b)] * 3), (n, n, n))


class GrushinOperator:
    """Matrix-free SPD stencil for -Delta_x - |x|^{2a} d2/dy2 with Dirichlet faces."""

    def __init__(self, domain: Domain, alpha):
        self.domain = domain
        self.alpha = _as_alpha(alpha)
        x1 = domain.axis_centers(0)
        x2 = domain.axis_centers(1)
        self.weight2d = (x1[:, None] ** 2 + x2[None, :] ** 2) ** self.alpha.alpha
        self._mask = domain.mask

    def __call__(self, u: np.ndarray) -> np.ndarray:
        h = self.domain.spacing
        w = self.weight2d[:, :, None]
        if self._mask is not None:
            u = np.where(self._mask, u, 0.0)
        out = np.zeros_like(u)
        for axis, coef in ((0, None), (1, None), (2, w)):
            ghosted = self._neighbor_sum(u, axis)
            term = (2.0 * u - ghosted) / h[axis] ** 2
            out += term if coef is None else coef * term
        if self._mask is not None:
            out = np.where(self._mask, out, 0.0)
        return out

    def _neighbor_sum(self, u, axis):
        """Sum of the two axis neighbours with odd-reflection ghosts."""
        lo = np.roll(u, 1, axis=axis)
        hi = np.roll(u, -1, axis=axis)
        edge_lo = [slice(None)] * 3
        edge_lo[axis] = 0
        edge_hi = [slice(None)] * 3
        edge_hi[axis] = -1
        lo[tuple(edge_lo)] = -u[tuple(edge_lo)]
        hi[tuple(edge_hi)] = -u[tuple(edge_hi)]
        if self._mask is not None:
            inactive_lo = np.roll(self._mask, 1, axis=axis) == False  # noqa: E712
            inactive_lo[tuple(edge_lo)] = True
            inactive_hi = np.roll(self._mask, -1, axis=axis) == False  # noqa: E712
            inactive_hi[tuple(edge_hi)] = True
            lo = np.where(inactive_lo, -u, lo)
            hi = np.where(inactive_hi, -u, hi)
        return lo + hi

    def quadratic_form(self, u: np.ndarray) -> float:
        return float(np.sum(u * self(u))) * self.domain.cell_volume


def assemble_grushin(domain: Domain, alpha) -> GrushinOperator:
    return GrushinOperator(domain, alpha)


@dataclass(frozen=True)
class SolverConfig:
    cg_tol: float = 1e-10
    cg_max_iter: int = 8000
    outer_tol: float = 1e-6
    outer_max_iter: int = 400
    line_search_start: float = 4.0
    line_search_halvings: int = 16
    initial_center: Optional[tuple[float, float, float]] = None
    initial_width: float = 0.25
    collapse_threshold: float = 1e-12

    def __post_init__(self):
        if min(self.cg_tol, self.outer_tol) <= 0:
            raise DomainError("tolerances must be positive")
        if min(self.cg_max_iter, self.outer_max_iter) < 1:
            raise DomainError("iteration limits must be positive")


def linear_solve(op: GrushinOperator, rhs: np.ndarray, cfg: SolverConfig = SolverConfig(), x0=None):
    """Conjugate gradients on the SPD stencil; relative-residual stopping."""
    mask = op.domain.mask
    b = rhs if mask is None else np.where(mask, rhs, 0.0)
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - op(x)
    p = r.copy()
    rs = float(np.sum(r * r))
    bnorm = math.sqrt(float(np.sum(b * b)))
    if bnorm == 0.0:
        return np.zeros_like(b)
    for _ in range(cfg.cg_max_iter):
        Ap = op(p)
        alpha_k = rs / float(np.sum(p * Ap))
        x += alpha_k * p
        r -= alpha_k * Ap
        rs_new = float(np.sum(r * r))
        if math.sqrt(rs_new) <= cfg.cg_tol * bnorm:
            return x
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise IterationError(
        f"CG did not reach {cfg.cg_tol:g} in {cfg.cg_max_iter} iterations",
        last_residual=math.sqrt(rs) / bnorm,
    )


@dataclass(frozen=True)
class Nonlinearity:
    """Reaction term f(x1, x2, y, xi) with primitive F and growth metadata."""

    f: Callable
    F: Callable
    kind: str = "custom"
    q: Optional[float] = None
    # witnesses for the growth conditions, when known
    growth: Optional[dict] = None

    def __post_init__(self):
        if self.kind == "power" and not self.q:
            raise DomainError("power nonlinearity needs an exponent q")


def power_nonlinearity(q: float, alpha) -> Nonlinearity:
    """f = |x|^{2a} |xi|^{q-2} xi, F = |x|^{2a} |xi|^q / q."""
    a = _as_alpha(alpha).alpha

    def f(x1, x2, y, xi):
        w = (np.asarray(x1) ** 2 + np.asarray(x2) ** 2) ** a
        return w * np.abs(xi) ** (q - 2.0) * xi

    def F(x1, x2, y, xi):
        w = (np.asarray(x1) ** 2 + np.asarray(x2) ** 2) ** a
        return w * np.abs(xi) ** q / q

    ones = lambda x1, x2, y: np.ones_like(np.asarray(x1), dtype=float)  # noqa: E731
    zeros = lambda x1, x2, y: np.zeros_like(np.asarray(x1), dtype=float)  # noqa: E731
    growth = {
        # witnesses: |f| <= |x|^{2a}(0 + 1 * |xi|^{q-1}); p2 saturates the
        # embedding constraint q p2/(p2-1) <= 6, f1 = 0 admits any p1
        "p1": 2.0,
        "p2": 6.0 / (6.0 - q) if q < 6.0 else math.inf,
        "q": float(q),
        "C": 1.0,
        "f1": zeros,
        "f2": ones,
        "psi": ones,
        "phi_lower": zeros,
    }
    return Nonlinearity(f=f, F=F, kind="power", q=float(q), growth=growth)


def _eval_cellwise(domain: Domain, fn, u):
    X1, X2, Y = domain.centers()
    return fn(X1, X2, Y, u)


def energy(u: np.ndarray, nonlinearity: Nonlinearity, domain: Domain, alpha, op: Optional[GrushinOperator] = None) -> float:
    """Phi(u) = 1/2 <A u, u> dV - sum F(x, y, u) dV."""
    op = op or GrushinOperator(domain, alpha)
    act = domain.active()
    Fvals = _eval_cellwise(domain, nonlinearity.F, u)
    return 0.5 * op.quadratic_form(u) - float(np.sum(Fvals[act])) * domain.cell_volume


def energy_gradient(u: np.ndarray, nonlinearity: Nonlinearity, domain: Domain, alpha, op=None) -> np.ndarray:
    """L2 gradient density A u - f(., u); zero on inactive cells."""
    op = op or GrushinOperator(domain, alpha)
    g = op(u) - _eval_cellwise(domain, nonlinearity.f, u)
    if domain.mask is not None:
        g = np.where(domain.mask, g, 0.0)
    return g


def weak_residual(u: np.ndarray, nonlinearity: Nonlinearity, domain: Domain, alpha, op=None) -> float:
    g = energy_gradient(u, nonlinearity, domain, alpha, op)
    return math.sqrt(float(np.sum(g * g)) * domain.cell_volume)


def nehari_scale(u: np.ndarray, nonlinearity: Nonlinearity, domain: Domain, alpha, op=None) -> float:
    """t with <Phi'(t u), t u> = 0 for the homogeneous power term.

    t = (a/b)^{1/(q-2)} with a = <A u, u> dV and b = sum |x|^{2a} |u|^q dV.
    """
    if nonlinearity.kind != "power":
        raise DomainError("Nehari projection requires a power nonlinearity")
    q = nonlinearity.q
    if q <= 2:
        raise DomainError("Nehari projection requires q > 2")
    op = op or GrushinOperator(domain, alpha)
    a = op.quadratic_form(u)
    act = domain.active()
    w = op.weight2d[:, :, None]
    b = float(np.sum((w * np.abs(u) ** q)[act])) * domain.cell_volume
    if b <= 0.0:
        raise DomainError("cannot project the zero function onto the Nehari set")
    return (a / b) ** (1.0 / (q - 2.0))


@dataclass
class SolutionReport:
    u: GridFunction3D
    energy: float
    gradient_norm: float
    nehari_residual: float
    iterations: int
    mountain_pass_level: float
    converged: bool


def _default_initial(domain: Domain, cfg: SolverConfig) -> np.ndarray:
    X1, X2, Y = domain.centers()
    half = 0.5 * (domain.bbox[:, 1] - domain.bbox[:, 0])
    if cfg.initial_center is not None:
        c = np.asarray(cfg.initial_center, dtype=float)
    else:
        # off the degeneracy axis, well inside the boundary
        c = np.array([0.45 * half[0], 0.45 * half[1], 0.0])
    width = cfg.initial_width * float(half.min())
    u = np.exp(-((X1 - c[0]) ** 2 + (X2 - c[1]) ** 2 + (Y - c[2]) ** 2) / (2 * width**2))
    if domain.mask is not None:
        u = np.where(domain.mask, u, 0.0)
    return u


def solve_ground_state(
    domain: Domain,
    nonlinearity: Nonlinearity,
    alpha,
    cfg: SolverConfig = SolverConfig(),
    initial: Optional[np.ndarray] = None,
) -> SolutionReport:
    """Nehari-projected preconditioned descent for the subcritical problem.

    Requires the power kind with 2 < q < 6 (the compact embedding range).
    Each step moves toward A^{-1} f(u), line-searches the energy along that
    direction (start factor cfg.line_search_start, halving), and projects
    back onto the Nehari set; the energy is monotone along the iteration.
    """
    if nonlinearity.kind != "power":
        raise DomainError("ground-state solver requires a power nonlinearity")
    q = nonlinearity.q
    if not 2.0 < q < 6.0:
        raise DomainError(f"subcritical existence run needs 2 < q < 6, got q={q}")
    ap = _as_alpha(alpha)
    op = GrushinOperator(domain, ap)
    act = domain.active()
    vol = domain.cell_volume
    w = op.weight2d[:, :, None]

    def b_term(v):
        return float(np.sum((w * np.abs(v) ** q)[act])) * vol

    def phi(v):
        return 0.5 * op.quadratic_form(v) - b_term(v) / q

    def project(v):
        b = b_term(v)
        if b <= cfg.collapse_threshold:
            raise DegeneracyError("iterate collapsed toward zero")
        t = (op.quadratic_form(v) / b) ** (1.0 / (q - 2.0))
        return t * v

    u = initial.copy() if initial is not None else _default_initial(domain, cfg)
    if domain.mask is not None:
        u = np.where(domain.mask, u, 0.0)
    if float(np.max(np.abs(u))) <= 0:
        raise DegeneracyError("initial guess is identically zero")
    u = project(u)

    residual = weak_residual(u, nonlinearity, domain, ap, op)
    sqrt_vol = math.sqrt(vol)

    def inner_cfg(f):
        # solve the inner system just accurately enough that CG error stays
        # two orders below the current outer residual (both measured in the
        # volume-weighted L2 norm)
        fnorm = math.sqrt(float(np.sum(f * f))) * sqrt_vol
        rel = 0.01 * residual / fnorm if fnorm > 0 else 1e-6
        return replace(cfg, cg_tol=float(np.clip(rel, cfg.cg_tol, 1e-6)))

    it = 0
    for it in range(1, cfg.outer_max_iter + 1):
        f = _eval_cellwise(domain, nonlinearity.f, u)
        v = linear_solve(op, f, inner_cfg(f), x0=u)
        d = v - u
        phi0 = phi(u)
        # walk the step ladder, keep the best candidate; the profile in tau
        # is close to unimodal, so stop after two consecutive non-improvements
        tau = cfg.line_search_start
        best, best_phi, worse_streak = None, phi0 - 1e-14 * abs(phi0), 0
        for _ in range(cfg.line_search_halvings):
            cand = project(u + tau * d)
            cand_phi = phi(cand)
            if cand_phi < best_phi:
                best, best_phi, worse_streak = cand, cand_phi, 0
            else:
                worse_streak += 1
                if best is not None and worse_streak >= 2:
                    break
            tau *= 0.5
        if best is None:
            # energy differences are below float noise; fall back to the
            # plain fixed-point step as long as it reduces the residual
            cand = project(v)
            cand_res = weak_residual(cand, nonlinearity, domain, ap, op)
            if cand_res < 0.999 * residual:
                u, residual = cand, cand_res
                if residual <= cfg.outer_tol:
                    break
                continue
            break
        u = best
        residual = weak_residual(u, nonlinearity, domain, ap, op)
        if residual <= cfg.outer_tol:
            break

    norm = math.sqrt(float(np.sum(u * u)) * vol)
    if norm <= cfg.collapse_threshold:
        raise DegeneracyError("solver collapsed onto the trivial solution")
    if residual > cfg.outer_tol:
        raise IterationError(
            f"ground-state iteration stalled at residual {residual:.3e}",
            last_residual=residual,
        )

    a = op.quadratic_form(u)
    b = b_term(u)
    nehari_res = abs(a - b)
    # path estimate of the min-max level: max of Phi along t -> t*u
    ts = np.linspace(0.0, 2.0, 201)
    path = 0.5 * ts**2 * a - ts**q / q * b
    return SolutionReport(
        u=domain.grid_function(u),
        energy=phi(u),
        gradient_norm=residual,
        nehari_residual=nehari_res,
        iterations=it,
        mountain_pass_level=float(np.max(path)),
        converged=True,
    )


def poincare_constant(domain: Domain, alpha, cfg: SolverConfig = SolverConfig(), max_iter: int = 200) -> float:
    """Smallest eigenvalue of the discrete operator by inverse power iteration.

    Gives the norm-equivalence constant: ||u||_L2 <= lambda_1^{-1/2} ||grad_G u||.
    """
    op = GrushinOperator(domain, alpha)
    act = domain.active()
    v = np.where(act, 1.0, 0.0)
    v /= math.sqrt(float(np.sum(v * v)))
    lam_old = math.inf
    for _ in range(max_iter):
        v = linear_solve(op, v, cfg)
        v /= math.sqrt(float(np.sum(v * v)))
        lam = float(np.sum(v * op(v))) / float(np.sum(v * v))
        if abs(lam - lam_old) <= 1e-10 * abs(lam):
            return lam
        lam_old = lam
    raise IterationError("inverse power iteration did not settle", last_residual=abs(lam - lam_old))


@dataclass(frozen=True)
class EmbeddingReport:
    q: float
    constant: float
    worst_ratio: float
    margins: np.ndarray
    violations: int


def embedding_check(domain: Domain, q: float, alpha, fields, slack: float = 0.02) -> EmbeddingReport:
    """Check ||u||_{Lq_w} <= C_q ||grad_G u|| for each field supported in Omega.

    C_q couples the critical-exponent lower bound with Hoelder interpolation:
    C_q = |Omega|_w^{1/q - 1/6} / L_w(alpha).  Ratios above 1 + slack count
    as violations.
    """
    from .sobolev import sobolev_lower_bound

    if not 1.0 <= q <= 6.0:
        raise DomainError("embedding range is 1 <= q <= 6")
    ap = _as_alpha(alpha)
    op = GrushinOperator(domain, ap)
    L = sobolev_lower_bound(ap)
    c_q = domain.weighted_measure(ap) ** (1.0 / q - 1.0 / 6.0) / L
    act = domain.active()
    w = op.weight2d[:, :, None]
    ratios = []
    for fld in fields:
        u = fld.values if isinstance(fld, GridFunction3D) else np.asarray(fld)
        norm_q = (float(np.sum((w * np.abs(u) ** q)[act])) * domain.cell_volume) ** (1.0 / q)
        grad = math.sqrt(op.quadratic_form(u))
        if grad == 0.0:
            continue
        ratios.append(norm_q / (c_q * grad))
    margins = np.asarray(ratios)
    return EmbeddingReport(
        q=q,
        constant=c_q,
        worst_ratio=float(margins.max(initial=0.0)),
        margins=margins,
        violations=int(np.sum(margins > 1.0 + slack)),
    )


def validate_growth_conditions(nonlinearity: Nonlinearity, domain: Domain, alpha, stride: int = 4):
    """Sampling-based verdicts for the five superlinear growth conditions.

    Probes the growth bound, local boundedness, the integrable lower bound,
    the asymptotic limits of f/(|x|^{2a} xi) at 0 and infinity, and the
    monotonicity of f/xi on finite sample grids.  A "pass" is heuristic
    evidence (finite sampling cannot certify limits); a "fail" is a
    definite counterexample.
    """
    g = nonlinearity.growth
    keys = ("A1", "A2", "A3", "A4", "A5")
    if not g:
        return {k: "not-applicable" for k in keys}
    a = _as_alpha(alpha).alpha
    X1, X2, Y = (c[::stride, ::stride, ::stride] for c in domain.centers())
    w = (X1**2 + X2**2) ** a
    verdicts = {}

    # A1: |f| <= |x|^{2a}(f1 + f2 |xi|^{q-1}) plus the exponent constraints
    q, p1, p2 = g["q"], g["p1"], g["p2"]
    exponents_ok = (
        p2 > 1.0
        and q * p2 / (p2 - 1.0) <= 6.0 + 1e-12
        and p1 > 6.0 * p2 / (p2 * (q - 1.0) + 6.0)
        and p1 > 1.5
    )
    bound_ok = all(
        bool(
            np.all(
                np.abs(nonlinearity.f(X1, X2, Y, xi))
                <= w * (g["f1"](X1, X2, Y) + g["f2"](X1, X2, Y) * abs(xi) ** (q - 1.0)) * (1 + 1e-9)
                + 1e-300
            )
        )
        for xi in (-50.0, -2.0, -0.5, 0.5, 2.0, 50.0)
    )
    verdicts["A1"] = "pass (heuristic)" if (exponents_ok and bound_ok) else "fail"

    # A2: |f| <= |x|^{2a} psi for |xi| <= C
    C = g["C"]
    ok = all(
        bool(np.all(np.abs(nonlinearity.f(X1, X2, Y, xi)) <= w * g["psi"](X1, X2, Y) + 1e-300))
        for xi in np.linspace(-C, C, 9)
    )
    verdicts["A2"] = "pass (heuristic)" if ok else "fail"

    # A3: phi_lower <= f(., xi)/xi for xi > 0, with phi_lower non-positive
    ok = bool(np.all(g["phi_lower"](X1, X2, Y) <= 0.0)) and all(
        bool(np.all(g["phi_lower"](X1, X2, Y) <= nonlinearity.f(X1, X2, Y, xi) / xi + 1e-12))
        for xi in (1e-3, 0.1, 1.0, 10.0)
    )
    verdicts["A3"] = "pass (heuristic)" if ok else "fail"

    # A4: f(., 0) = 0; f/(|x|^{2a} xi) -> 0 at 0 and -> infinity at infinity
    zero_ok = bool(np.all(np.abs(nonlinearity.f(X1, X2, Y, 0.0)) <= 1e-300))
    wpos = np.where(w > 0, w, np.inf)
    small = np.abs(nonlinearity.f(X1, X2, Y, 1e-6)) / (wpos * 1e-6)
    big = np.abs(nonlinearity.f(X1, X2, Y, 1e6)) / (wpos * 1e6)
    limits_ok = bool(np.all(small <= 1e-3)) and bool(np.all(big >= 1e3))
    verdicts["A4"] = "pass (heuristic)" if (zero_ok and limits_ok) else "fail"

    # A5: f/xi nondecreasing for xi >= C and nonincreasing in xi on xi <= -C;
    # the latter sampled at xi = -x with x increasing, so the ratio must rise
    xs = np.geomspace(C, 100 * C, 8)
    up = [float(np.mean(nonlinearity.f(X1, X2, Y, x) / x)) for x in xs]
    down = [float(np.mean(nonlinearity.f(X1, X2, Y, -x) / -x)) for x in xs]
    mono = all(b >= a_ - 1e-12 for a_, b in zip(up, up[1:])) and all(
        b >= a_ - 1e-12 for a_, b in zip(down, down[1:])
    )
    verdicts["A5"] = "pass (heuristic)" if mono else "fail"
    return verdicts
