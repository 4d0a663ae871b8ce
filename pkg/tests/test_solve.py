import numpy as np
import pytest
import scipy.sparse as sp

from util import unit_square_mesh

from wg4.assembly import assemble
from wg4.harness import case_sine
from wg4.solve import SolveReport, SolverConfig, SolverError, solve_spd


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        SolverConfig(tolerance=1.5)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(method="gmres")
    with pytest.raises(ValueError):
        SolverConfig(preconditioner="ilu")


def test_zero_rhs_gives_zero_solution():
    a = sp.identity(5, format="csr")
    x, report = solve_spd((a, np.zeros(5)))
    assert np.all(x == 0.0)
    assert report.iterations == 0 and report.residual == 0.0


@pytest.mark.parametrize("method", ["direct", "cg"])
def test_identity_system(method):
    a = sp.identity(4, format="csr")
    b = np.array([1.0, 0.0, 0.0, 0.0])
    x, report = solve_spd((a, b), SolverConfig(method=method))
    assert np.allclose(x, b, atol=1e-12)
    assert report.residual <= 1e-10


@pytest.fixture(scope="module")
def sine_system():
    mesh = unit_square_mesh(4)
    return assemble(mesh, case_sine().problem(mesh))


def test_direct_and_cg_agree(sine_system):
    x_direct, _ = solve_spd(sine_system, SolverConfig(method="direct"))
    x_cg, report = solve_spd(
        sine_system, SolverConfig(method="cg", tolerance=1e-12, preconditioner="diagonal")
    )
    assert report.iterations > 0
    rel = np.linalg.norm(x_direct - x_cg) / np.linalg.norm(x_direct)
    assert rel <= 1e-8


def test_solves_are_bit_identical(sine_system):
    x1, _ = solve_spd(sine_system)
    x2, _ = solve_spd(sine_system)
    assert np.array_equal(x1, x2)


def test_cg_nonconvergence_reports_history(sine_system):
    with pytest.raises(SolverError) as err:
        solve_spd(sine_system, SolverConfig(method="cg", max_iterations=2))
    assert err.value.residual_history


def test_singular_matrix_reported():
    a = sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SolverError):
        solve_spd((a, np.array([1.0, 2.0])))


def test_report_fields():
    report = SolveReport(iterations=3, residual=1e-12, residual_history=[1.0, 1e-12])
    assert report.iterations == 3
    assert report.residual_history[-1] == 1e-12
