"""Built-in problem catalog, convergence-study driver and field sampling.

Two manufactured cases with known exact solutions drive the convergence
studies; three forward-model scenarios mimic fluorescence-tomography
setups (localized boundary data over a strongly discontinuous diffusion
coefficient, and interior Gaussian light sources).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import errors as err_mod
from . import assembly, mesh as mesh_mod, solve as solve_mod, weakops
from .assembly import CoefficientField, ProblemSpec, Region
from .errors import ErrorReport, convergence_orders
from .mesh import Mesh, build_structured_mesh
from .solve import SolveReport, SolverConfig
from .weakops import WeakFunction

__all__ = [
    "CaseCatalogEntry",
    "CATALOG",
    "case_poly_bump",
    "case_sine",
    "case_ft_boundary_patch",
    "case_ft_gaussian",
    "run_convergence",
    "solve_case",
    "sample_field",
    "ConvergenceResult",
]

#: Shared coefficients of the manufactured cases and the Gaussian-source
#: scenario: isotropic diffusion 1/(3 * 1.01) and absorption 0.01.
DIFFUSION = 1.0 / (3.0 * 1.01)
ABSORPTION = 0.01

UNIT_SQUARE = (0.0, 0.0, 1.0, 1.0)
FT_DOMAIN = (0.0, 0.0, 50.0, 50.0)
GAUSSIAN_EPSILON = 100.0 / 64.0
DEFAULT_SOURCE = (13.3065, 0.0730994)
SECOND_SOURCE = (49.8272, 13.5234)


@dataclass(frozen=True)
class CaseCatalogEntry:
    """One runnable scenario: coefficients, data fields and metadata.

    ``build(mesh)`` produces the concrete ProblemSpec; scenarios whose
    boundary data is resolved per edge need the mesh subdivision count,
    which is why construction is deferred.
    """

    name: str
    description: str
    domain: tuple[float, float, float, float]
    has_exact: bool
    builder: Callable[[Mesh], ProblemSpec]
    n_multiple: int = 1

    def problem(self, mesh: Mesh) -> ProblemSpec:
        if mesh.domain != self.domain:
            raise ValueError(
                f"case {self.name!r} is defined on {self.domain}, got mesh on {mesh.domain}"
            )
        if mesh.n % self.n_multiple != 0:
            raise ValueError(f"case {self.name!r}: n must be divisible by {self.n_multiple}")
        return self.builder(mesh)

    def make_mesh(self, n: int) -> Mesh:
        return build_structured_mesh(self.domain, n)


def case_poly_bump() -> CaseCatalogEntry:
    """Polynomial bump x^2 (1-x)^2 y^2 (1-y)^2 with homogeneous data.

    Both the solution and its gradient vanish identically on the boundary
    of the unit square, so xi = nu = 0.  The source is the closed-form
    expansion of (-c Lap + mu)^2 u for isotropic diffusion c.
    """
    c, mu = DIFFUSION, ABSORPTION

    def g(s):
        return s * s * (1.0 - s) ** 2

    def dg(s):
        return 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s)

    def d2g(s):
        return 2.0 - 12.0 * s + 12.0 * s * s

    def u(x, y):
        return g(x) * g(y)

    def grad_u(x, y):
        return dg(x) * g(y), g(x) * dg(y)

    def f(x, y):
        lap = d2g(x) * g(y) + g(x) * d2g(y)
        bilap = 24.0 * g(y) + 2.0 * d2g(x) * d2g(y) + 24.0 * g(x)
        return c * c * bilap - 2.0 * c * mu * lap + mu * mu * u(x, y)

    zero = np.vectorize(lambda x, y: 0.0, otypes=[float])

    def build(mesh: Mesh) -> ProblemSpec:
        return ProblemSpec(
            f=f,
            xi=zero,
            nu=zero,
            coeff=CoefficientField.uniform(mesh, c * np.eye(2), mu),
            exact_u=u,
            exact_grad=grad_u,
        )

    return CaseCatalogEntry(
        name="poly-bump",
        description="polynomial bump, homogeneous Dirichlet and Neumann data",
        domain=UNIT_SQUARE,
        has_exact=True,
        builder=build,
    )


def case_sine() -> CaseCatalogEntry:
    """sin(pi x) sin(pi y): nonhomogeneous Neumann data on the unit square.

    The Laplacian is -2 pi^2 u, so the source is a constant multiple of u.
    The Dirichlet trace vanishes on the boundary but is imposed through
    its projection regardless; the conormal flux does not vanish.
    """
    c, mu = DIFFUSION, ABSORPTION
    factor = 4.0 * math.pi**4 * c * c + 4.0 * math.pi**2 * c * mu + mu * mu

    def u(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def grad_u(x, y):
        return (
            np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
            np.pi * np.sin(np.pi * x) * np.cos(np.pi * y),
        )

    def f(x, y):
        return factor * u(x, y)

    def nu(x, y):
        # c grad(u) . n with the domain-outward normal of the unit square.
        gx, gy = grad_u(x, y)
        nx, ny = _outward_normal_unit_square(x, y)
        return c * (gx * nx + gy * ny)

    def build(mesh: Mesh) -> ProblemSpec:
        return ProblemSpec(
            f=f,
            xi=u,
            nu=nu,
            coeff=CoefficientField.uniform(mesh, c * np.eye(2), mu),
            exact_u=u,
            exact_grad=grad_u,
        )

    return CaseCatalogEntry(
        name="sine",
        description="sine product, nonhomogeneous boundary data",
        domain=UNIT_SQUARE,
        has_exact=True,
        builder=build,
    )


def _outward_normal_unit_square(x, y):
    """Outward normal of the unit square at boundary points (vectorized).

    Sides are matched with a 1e-12 tolerance; corners resolve to the side
    matched first, which never matters under Gauss quadrature (points are
    strictly interior to edges).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx = np.zeros_like(x)
    ny = np.zeros_like(y)
    tol = 1e-12
    bottom = np.abs(y) <= tol
    top = np.abs(y - 1.0) <= tol
    left = np.abs(x) <= tol
    right = np.abs(x - 1.0) <= tol
    ny[bottom] = -1.0
    ny[top] = 1.0
    nx[left & ~bottom & ~top] = -1.0
    nx[right & ~bottom & ~top] = 1.0
    return nx, ny


def case_ft_boundary_patch(variant: str) -> CaseCatalogEntry:
    """Localized boundary excitation over a high-contrast inclusion.

    Diffusion is the identity inside the sub-square (1/4, 3/8)^2 and
    1e-5 times the identity elsewhere; absorption and source are zero.
    The Dirichlet data is supported on the middle edge(s) of each of the
    four boundary sides -- value 1 for the ``indicator`` variant, value
    1/|e| (an approximate point excitation) for the ``dirac`` variant --
    and the Neumann data is its negative.  With an even subdivision count
    the two edges adjacent to each side midpoint carry the value.

    Requires n divisible by 8 so the inclusion boundary lies on mesh
    lines and the coefficient stays exactly piecewise constant.
    """
    if variant not in ("indicator", "dirac"):
        raise ValueError(f"unknown boundary-patch variant {variant!r}")

    def build(mesh: Mesh) -> ProblemSpec:
        n = mesh.n
        value = 1.0 if variant == "indicator" else float(n)  # 1/|e| with |e| = 1/n

        def xi(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            tol = 1e-12
            on_x_side = (np.abs(x) <= tol) | (np.abs(x - 1.0) <= tol)
            on_y_side = (np.abs(y) <= tol) | (np.abs(y - 1.0) <= tol)
            t = np.where(on_y_side, x, y)
            middle = np.abs(t - 0.5) < 1.0 / n
            return np.where((on_x_side | on_y_side) & middle, value, 0.0)

        def nu(x, y):
            return -xi(x, y)

        zero = np.vectorize(lambda x, y: 0.0, otypes=[float])
        inclusion = Region(
            shape="rect",
            bounds=(0.25, 0.25, 0.375, 0.375),
            kappa=np.eye(2),
            mu=0.0,
        )
        coeff = CoefficientField.from_regions(mesh, 1e-5 * np.eye(2), 0.0, [inclusion])
        return ProblemSpec(f=zero, xi=xi, nu=nu, coeff=coeff)

    return CaseCatalogEntry(
        name=f"boundary-{variant}",
        description=f"boundary patch excitation ({variant}), discontinuous diffusion",
        domain=UNIT_SQUARE,
        has_exact=False,
        builder=build,
        n_multiple=8,
    )


def case_ft_gaussian(source: tuple[float, float] = DEFAULT_SOURCE) -> CaseCatalogEntry:
    """Interior Gaussian light source on the 50 x 50 domain.

    The source is sqrt(2 pi eps) exp(-r^2 / (2 eps)) centered at the given
    point near the boundary.  Two circular blocks (center (25, 15) radius
    4 and center (35, 20) radius 3) are recorded as coefficient regions
    but carry the same uniform diffusion/absorption as the background by
    default; override them through the region hook to model inclusions.
    Boundary data is not part of the scenario definition and is taken
    homogeneous (xi = nu = 0).
    """
    x0, y0 = float(source[0]), float(source[1])
    eps = GAUSSIAN_EPSILON
    amplitude = math.sqrt(2.0 * math.pi * eps)

    def f(x, y):
        return amplitude * np.exp(-((x - x0) ** 2 + (y - y0) ** 2) / (2.0 * eps))

    zero = np.vectorize(lambda x, y: 0.0, otypes=[float])

    def build(mesh: Mesh) -> ProblemSpec:
        blocks = [
            Region(shape="disk", center=(25.0, 15.0), radius=4.0,
                   kappa=DIFFUSION * np.eye(2), mu=ABSORPTION),
            Region(shape="disk", center=(35.0, 20.0), radius=3.0,
                   kappa=DIFFUSION * np.eye(2), mu=ABSORPTION),
        ]
        coeff = CoefficientField.from_regions(
            mesh, DIFFUSION * np.eye(2), ABSORPTION, blocks
        )
        return ProblemSpec(f=f, xi=zero, nu=zero, coeff=coeff)

    return CaseCatalogEntry(
        name="gaussian-source",
        description=f"Gaussian source at ({x0:g}, {y0:g}) on the 50 x 50 domain",
        domain=FT_DOMAIN,
        has_exact=False,
        builder=build,
    )


#: Catalog of named scenarios; the CLI derives its choices from this.
CATALOG: dict[str, Callable[..., CaseCatalogEntry]] = {
    "poly-bump": case_poly_bump,
    "sine": case_sine,
    "boundary-indicator": lambda: case_ft_boundary_patch("indicator"),
    "boundary-dirac": lambda: case_ft_boundary_patch("dirac"),
    "gaussian-source": case_ft_gaussian,
}

#: Names of the forward-model scenarios accepted by the ft-demo command.
FT_SCENARIOS = ("boundary-indicator", "boundary-dirac", "gaussian-source")


def catalog_entry(name: str, source: tuple[float, float] | None = None) -> CaseCatalogEntry:
    """Instantiate a catalog case by name; ``source`` only applies to the
    Gaussian scenario."""
    if name not in CATALOG:
        raise KeyError(f"unknown case {name!r}; available: {', '.join(sorted(CATALOG))}")
    if name == "gaussian-source" and source is not None:
        return case_ft_gaussian(source)
    if source is not None:
        raise ValueError(f"case {name!r} does not take a source point")
    return CATALOG[name]()


def solve_case(
    entry: CaseCatalogEntry,
    n: int,
    config: SolverConfig = SolverConfig(),
    regions: Sequence[Region] | None = None,
) -> tuple[Mesh, ProblemSpec, WeakFunction, SolveReport]:
    """Build, assemble and solve one scenario at subdivision count n.

    ``regions`` optionally overrides coefficient regions on top of the
    case's own field (the inclusion hook of the Gaussian scenario).
    """
    mesh = entry.make_mesh(n)
    spec = entry.problem(mesh)
    if regions:
        base = spec.coeff
        kappa = base.kappa.copy()
        mu = base.mu.copy()
        for i, elem in enumerate(mesh.elements):
            cx, cy = elem.centroid
            for region in regions:
                if region.contains(cx, cy):
                    kappa[i] = region.kappa
                    mu[i] = region.mu
        spec = ProblemSpec(
            f=spec.f,
            xi=spec.xi,
            nu=spec.nu,
            coeff=CoefficientField(kappa=kappa, mu=mu),
            exact_u=spec.exact_u,
            exact_grad=spec.exact_grad,
        )
    system = assembly.assemble(mesh, spec)
    x_free, report = solve_mod.solve_spd(system, config)
    return mesh, spec, system.expand(x_free), report


@dataclass
class ConvergenceResult:
    case: str
    reports: list[ErrorReport]
    orders: dict[str, list[float]]

    def to_csv(self) -> str:
        header = "n,h,l2_e0,l2_order,tbar,tbar_order,eb,eb_order,eg,eg_order"
        lines = [header]
        for i, rep in enumerate(self.reports):
            cells = [str(rep.n), _fmt(rep.h)]
            for name in err_mod.NORM_FIELDS:
                cells.append(_fmt(getattr(rep, name)))
                cells.append(_fmt_order(self.orders[name][i - 1]) if i > 0 else "")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.5e}"


def _fmt_order(order: float) -> str:
    return "exact" if not math.isfinite(order) else f"{order:.5e}"


def run_convergence(
    entry: CaseCatalogEntry,
    levels: Sequence[int],
    config: SolverConfig = SolverConfig(),
) -> ConvergenceResult:
    """Solve a case over halving mesh sizes and tabulate errors and orders."""
    if not entry.has_exact:
        raise ValueError(f"case {entry.name!r} has no exact solution")
    reports = []
    for n in levels:
        try:
            mesh, spec, u_h, _ = solve_case(entry, n, config)
        except solve_mod.SolverError as exc:
            raise solve_mod.SolverError(
                f"level n={n}: {exc}", exc.residual_history
            ) from exc
        reports.append(err_mod.error_report(mesh, spec, u_h))
    return ConvergenceResult(
        case=entry.name, reports=reports, orders=convergence_orders(reports)
    )


def locate_point(mesh: Mesh, x: float, y: float) -> int:
    """Element index containing (x, y) on a structured mesh.

    Points on shared edges resolve deterministically (lower-left triangle
    wins on the diagonal, lower cell index on grid lines).
    """
    x0, y0, x1, y1 = mesh.domain
    n = mesh.n
    tol = 1e-12 * max(x1 - x0, y1 - y0)
    if not (x0 - tol <= x <= x1 + tol and y0 - tol <= y <= y1 + tol):
        raise ValueError(f"point ({x}, {y}) lies outside the domain {mesh.domain}")
    sx = (x1 - x0) / n
    sy = (y1 - y0) / n
    i = min(max(int((x - x0) / sx), 0), n - 1)
    j = min(max(int((y - y0) / sy), 0), n - 1)
    xi = (x - (x0 + i * sx)) / sx
    eta = (y - (y0 + j * sy)) / sy
    upper = xi + eta > 1.0
    return 2 * (j * n + i) + (1 if upper else 0)


def sample_field(mesh: Mesh, u_h: WeakFunction, grid: int) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the interior component on a uniform grid x grid lattice.

    Returns (points, values) with points of shape (grid*grid, 2), ordered
    row-major from the bottom-left corner.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    x0, y0, x1, y1 = mesh.domain
    xs = np.linspace(x0, x1, grid)
    ys = np.linspace(y0, y1, grid)
    dofmap = u_h.dofmap
    points = np.empty((grid * grid, 2))
    values = np.empty(grid * grid)
    from .poly import ElementBasis, make_triangle

    basis_cache: dict[int, ElementBasis] = {}
    for jj, y in enumerate(ys):
        for ii, x in enumerate(xs):
            idx = jj * grid + ii
            points[idx] = (x, y)
            elem_id = locate_point(mesh, x, y)
            basis = basis_cache.get(elem_id)
            if basis is None:
                tri = make_triangle(mesh.vertices[list(mesh.elements[elem_id].vertices)])
                basis = ElementBasis.for_triangle(tri, weakops.INTERIOR_DEGREE)
                basis_cache[elem_id] = basis
            c0 = u_h.coeffs[dofmap.element_block(elem_id)]
            values[idx] = float((basis.eval(points[idx : idx + 1]) @ c0)[0])
    if not np.isfinite(values).all():
        raise ValueError("sampled field contains non-finite values")
    return points, values
