"""P1 finite elements and backward Euler for the 1D heat equation.

Uniform meshes, piecewise-constant diffusion whose breakpoints sit on mesh
nodes, consistent (non-lumped) mass matrix, and tridiagonal direct solves
with a prefactored no-pivot LU (the systems assembled here are strictly
diagonally dominant).  Loads and boundary data are evaluated at the new
time level (fully implicit).

For domain decomposition two extra ingredients are provided: single-domain
solves with Robin data

    nu * du/dn + sigma * u = g_R   (outward normal n)

at either end, and variational recovery of the boundary flux nu * du/dn
from the residual of the boundary row.  The variational flux (rather than
a one-sided difference) makes the discrete Schwarz fixed point coincide
with the monolithic discrete solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Mesh1D",
    "DiffusionProfile",
    "HeatProblem",
    "SpaceTimeField",
    "RobinBoundaryData",
    "TridiagonalMatrix",
    "TridiagonalSolver",
    "assemble_operators",
    "solve_monolithic",
    "solve_subdomain_robin",
    "variational_flux",
]

_NODE_SNAP_REL = 1e-9  # breakpoint/interface alignment tolerance, relative to dx


@dataclass(frozen=True)
class Mesh1D:
    """Uniform 1D mesh given by its node coordinates."""

    nodes: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        nodes.setflags(write=False)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("mesh needs at least 2 elements (3 nodes)")
        spacing = np.diff(nodes)
        if np.any(spacing <= 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        h = spacing.mean()
        if np.max(np.abs(spacing - h)) > 1e-12 * abs(h):
            raise ValueError("mesh spacing must be uniform to 1e-12 relative")

    @classmethod
    def uniform(cls, a: float, b: float, n_elements: int) -> "Mesh1D":
        if not (b > a):
            raise ValueError(f"need b > a, got ({a}, {b})")
        return cls(np.linspace(a, b, n_elements + 1))

    @classmethod
    def from_nodes(cls, nodes: np.ndarray) -> "Mesh1D":
        return cls(np.array(nodes, dtype=float))

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def dx(self) -> float:
        return float((self.b - self.a) / self.n_elements)

    def node_index(self, x: float) -> int:
        """Index of the node at coordinate x; raises if x is not a node."""
        i = int(round((x - self.a) / self.dx))
        if i < 0 or i >= self.n_nodes or abs(self.nodes[i] - x) > _NODE_SNAP_REL * self.dx:
            raise ValueError(f"{x} is not a node of this mesh")
        return i


@dataclass(frozen=True)
class DiffusionProfile:
    """Piecewise-constant diffusion: len(values) layers split at breakpoints."""

    values: tuple[float, ...]
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        breakpoints = tuple(float(x) for x in self.breakpoints)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "breakpoints", breakpoints)
        if not values:
            raise ValueError("at least one layer value required")
        if any(not math.isfinite(v) or v <= 0.0 for v in values):
            raise ValueError("layer values must be positive and finite")
        if len(breakpoints) != len(values) - 1:
            raise ValueError("need exactly len(values) - 1 breakpoints")
        if any(breakpoints[i] >= breakpoints[i + 1] for i in range(len(breakpoints) - 1)):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "DiffusionProfile":
        return cls((value,))

    def value_at(self, x: float) -> float:
        for bp, v in zip(self.breakpoints, self.values):
            if x < bp:
                return v
        return self.values[-1]

    def element_values(self, mesh: Mesh1D) -> np.ndarray:
        """Per-element diffusion; interior breakpoints must coincide with nodes.

        Breakpoints at or beyond the mesh boundary are allowed so a global
        profile can be restricted to a subdomain mesh unchanged.
        """
        for bp in self.breakpoints:
            if mesh.a < bp < mesh.b:
                mesh.node_index(bp)  # raises if not aligned
        mids = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
        return np.array([self.value_at(x) for x in mids])


def _as_time_function(value) -> Callable[[float], float]:
    if callable(value):
        return value
    v = float(value)
    return lambda t: v


@dataclass(frozen=True)
class HeatProblem:
    """Heat equation data on (a, b) x (0, final_time).

    ``source`` is f(x, t) taking a node array and a time (or None for zero);
    ``initial`` is u0(x) or a constant; the boundary values are constants or
    functions of time.  The time step must divide the final time.
    ``lumped_mass`` switches to the row-sum lumped mass matrix, kept only
    for experimentation; the consistent matrix is the default.
    """

    diffusion: DiffusionProfile
    source: Callable | None
    initial: Callable | float
    bc_left: Callable | float
    bc_right: Callable | float
    final_time: float
    time_step: float
    lumped_mass: bool = False

    def __post_init__(self) -> None:
        T = float(self.final_time)
        dt = float(self.time_step)
        if not (math.isfinite(T) and T > 0.0 and math.isfinite(dt) and dt > 0.0):
            raise ValueError("final_time and time_step must be positive and finite")
        n = round(T / dt)
        if n < 1 or abs(n * dt - T) > 1e-9 * T:
            raise ValueError(
                f"time_step={dt} does not divide final_time={T} (1e-9 relative)"
            )

    @property
    def n_steps(self) -> int:
        return round(self.final_time / self.time_step)

    def initial_values(self, mesh: Mesh1D) -> np.ndarray:
        if callable(self.initial):
            return np.asarray(self.initial(mesh.nodes), dtype=float) * np.ones(
                mesh.n_nodes
            )
        return np.full(mesh.n_nodes, float(self.initial))

    def source_nodal(self, mesh: Mesh1D, t: float) -> np.ndarray | None:
        if self.source is None:
            return None
        return np.asarray(self.source(mesh.nodes, t), dtype=float) * np.ones(
            mesh.n_nodes
        )


@dataclass(frozen=True)
class SpaceTimeField:
    """Nodal values over all time levels 0..n_steps of one solve."""

    mesh: Mesh1D
    time_step: float
    values: np.ndarray  # shape (n_steps + 1, n_nodes)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        values.setflags(write=False)
        if values.ndim != 2 or values.shape[1] != self.mesh.n_nodes:
            raise ValueError("values must be (n_steps + 1, n_nodes)")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")

    @property
    def n_steps(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.time_step * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class RobinBoundaryData:
    """Robin data nu*du/dn + sigma*u = g_R at one end.

    ``values[k]`` is g_R at time level k + 1 (levels 1..n_steps; the level-0
    state is the initial condition and needs no boundary data).
    """

    side: str
    sigma: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError("sigma must be positive and finite")
        values = np.array(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        values.setflags(write=False)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise ValueError("values must be a finite 1D series")


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Symmetric-profile tridiagonal matrix stored as three diagonals."""

    lower: np.ndarray  # (n-1,), subdiagonal
    diag: np.ndarray  # (n,)
    upper: np.ndarray  # (n-1,), superdiagonal

    def matvec(self, x: np.ndarray) -> np.ndarray:
        out = self.diag * x
        out[:-1] += self.upper * x[1:]
        out[1:] += self.lower * x[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diag)
            + np.diag(self.upper, 1)
            + np.diag(self.lower, -1)
        )


class TridiagonalSolver:
    """Prefactored LU of a tridiagonal matrix, no pivoting.

    Factor once, then solve repeatedly against new right-hand sides; the
    per-solve cost is two short sweeps.  Intended for the strictly
    diagonally dominant systems assembled in this module.
    """

    def __init__(self, matrix: TridiagonalMatrix):
        lower = matrix.lower.tolist()
        diag = matrix.diag.tolist()
        upper = matrix.upper.tolist()
        n = len(diag)
        mult = [0.0] * (n - 1)
        piv = [0.0] * n
        piv[0] = diag[0]
        for i in range(1, n):
            if piv[i - 1] == 0.0:
                raise ZeroDivisionError("zero pivot in tridiagonal factorization")
            m = lower[i - 1] / piv[i - 1]
            mult[i - 1] = m
            piv[i] = diag[i] - m * upper[i - 1]
        if piv[-1] == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal factorization")
        self._n = n
        self._mult = mult
        self._inv_piv = [1.0 / d for d in piv]
        self._upper = upper

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        n = self._n
        mult = self._mult
        inv_piv = self._inv_piv
        upper = self._upper
        y = rhs.tolist()
        for i in range(1, n):
            y[i] -= mult[i - 1] * y[i - 1]
        y[n - 1] *= inv_piv[n - 1]
        for i in range(n - 2, -1, -1):
            y[i] = (y[i] - upper[i] * y[i + 1]) * inv_piv[i]
        return np.array(y)


def assemble_operators(
    mesh: Mesh1D, diffusion: DiffusionProfile, lumped_mass: bool = False
) -> tuple[TridiagonalMatrix, TridiagonalMatrix]:
    """Mass matrix (consistent by default) and diffusion stiffness matrix."""
    h = mesh.dx
    n = mesh.n_nodes
    nu_e = diffusion.element_values(mesh)

    if lumped_mass:
        m_diag = np.zeros(n)
        m_diag[:-1] += h / 2.0
        m_diag[1:] += h / 2.0
        m_off = np.zeros(n - 1)
    else:
        m_diag = np.zeros(n)
        m_diag[:-1] += h / 3.0
        m_diag[1:] += h / 3.0
        m_off = np.full(n - 1, h / 6.0)

    k_diag = np.zeros(n)
    k_diag[:-1] += nu_e / h
    k_diag[1:] += nu_e / h
    k_off = -nu_e / h

    mass = TridiagonalMatrix(m_off.copy(), m_diag, m_off.copy())
    stiffness = TridiagonalMatrix(k_off.copy(), k_diag, k_off.copy())
    return mass, stiffness


def _system_matrix(
    mass: TridiagonalMatrix, stiffness: TridiagonalMatrix, dt: float
) -> TridiagonalMatrix:
    return TridiagonalMatrix(
        mass.lower + dt * stiffness.lower,
        mass.diag + dt * stiffness.diag,
        mass.upper + dt * stiffness.upper,
    )


def _apply_dirichlet_row(A: TridiagonalMatrix, side: str) -> None:
    if side == "left":
        A.diag[0] = 1.0
        A.upper[0] = 0.0
    else:
        A.diag[-1] = 1.0
        A.lower[-1] = 0.0


def solve_monolithic(problem: HeatProblem, mesh: Mesh1D) -> SpaceTimeField:
    """Backward Euler solve with Dirichlet values at both ends.

    Each step solves (M + dt*K) u = M u_old + dt * load with the two
    boundary rows replaced by the Dirichlet identities.
    """
    for bp in problem.diffusion.breakpoints:
        if not (mesh.a < bp < mesh.b):
            raise ValueError(f"diffusion breakpoint {bp} outside the domain interior")
    mass, stiffness = assemble_operators(mesh, problem.diffusion, problem.lumped_mass)
    dt = problem.time_step
    A = _system_matrix(mass, stiffness, dt)
    _apply_dirichlet_row(A, "left")
    _apply_dirichlet_row(A, "right")
    solver = TridiagonalSolver(A)
    g_left = _as_time_function(problem.bc_left)
    g_right = _as_time_function(problem.bc_right)

    n_steps = problem.n_steps
    u = problem.initial_values(mesh)
    values = np.empty((n_steps + 1, mesh.n_nodes))
    values[0] = u
    for k in range(1, n_steps + 1):
        t = k * dt
        rhs = mass.matvec(u)
        f = problem.source_nodal(mesh, t)
        if f is not None:
            rhs += dt * mass.matvec(f)
        rhs[0] = g_left(t)
        rhs[-1] = g_right(t)
        u = solver.solve(rhs)
        values[k] = u
    return SpaceTimeField(mesh, dt, values)


def solve_subdomain_robin(
    problem: HeatProblem,
    mesh: Mesh1D,
    left,
    right,
) -> tuple[SpaceTimeField, dict[str, np.ndarray]]:
    """Backward Euler solve with Dirichlet or Robin data at each end.

    ``left`` and ``right`` are either a Dirichlet value (constant or
    function of time) or RobinBoundaryData.  In the Robin case the natural
    boundary term is eliminated with nu*du/dn = g_R - sigma*u, which adds
    sigma to the boundary diagonal and g_R at the new time level to the
    boundary load.  Returns the field and, for every Robin end, the
    variational flux series at levels 1..n_steps.
    """
    mass, stiffness = assemble_operators(mesh, problem.diffusion, problem.lumped_mass)
    dt = problem.time_step
    n_steps = problem.n_steps
    A = _system_matrix(mass, stiffness, dt)

    ends = {"left": left, "right": right}
    dirichlet: dict[str, Callable[[float], float]] = {}
    robin: dict[str, RobinBoundaryData] = {}
    for side, data in ends.items():
        idx = 0 if side == "left" else -1
        if isinstance(data, RobinBoundaryData):
            if data.side != side:
                raise ValueError(f"Robin data for side {data.side!r} used on {side!r}")
            if data.values.size != n_steps:
                raise ValueError(
                    f"Robin series has {data.values.size} entries, need {n_steps}"
                )
            robin[side] = data
            A.diag[idx] += dt * data.sigma
        else:
            dirichlet[side] = _as_time_function(data)
            _apply_dirichlet_row(A, side)

    solver = TridiagonalSolver(A)
    u = problem.initial_values(mesh)
    values = np.empty((n_steps + 1, mesh.n_nodes))
    values[0] = u
    for k in range(1, n_steps + 1):
        t = k * dt
        rhs = mass.matvec(u)
        f = problem.source_nodal(mesh, t)
        if f is not None:
            rhs += dt * mass.matvec(f)
        for side, data in robin.items():
            idx = 0 if side == "left" else -1
            rhs[idx] += dt * data.values[k - 1]
        for side, g in dirichlet.items():
            idx = 0 if side == "left" else -1
            rhs[idx] = g(t)
        u = solver.solve(rhs)
        values[k] = u

    field = SpaceTimeField(mesh, dt, values)
    fluxes = {
        side: variational_flux(
            field, mesh, problem.diffusion, side, problem.source, problem.lumped_mass
        )
        for side in robin
    }
    return field, fluxes


def variational_flux(
    field: SpaceTimeField,
    mesh: Mesh1D,
    diffusion: DiffusionProfile,
    end: str,
    source: Callable | None = None,
    lumped_mass: bool = False,
) -> np.ndarray:
    """Outward flux nu*du/dn at one end, recovered from the boundary residual.

    At each level k+1 the flux is the value that makes the weak equation
    tested with the boundary hat function exact:

        flux = (M (u_new - u_old) / dt + K u_new - load) restricted to the
               boundary row.

    Returns the series for levels 1..n_steps.  This recovery (not a
    difference quotient) is what keeps interface exchanges consistent with
    the single-domain discretization.
    """
    if end not in ("left", "right"):
        raise ValueError("end must be 'left' or 'right'")
    if field.mesh.n_nodes != mesh.n_nodes or not np.array_equal(
        field.mesh.nodes, mesh.nodes
    ):
        raise ValueError("field was not produced on this mesh")
    mass, stiffness = assemble_operators(mesh, diffusion, lumped_mass)
    U = field.values
    dt = field.time_step
    if end == "left":
        b, nb = 0, 1
        m_d, m_o = mass.diag[0], mass.upper[0]
        k_d, k_o = stiffness.diag[0], stiffness.upper[0]
    else:
        b, nb = -1, -2
        m_d, m_o = mass.diag[-1], mass.lower[-1]
        k_d, k_o = stiffness.diag[-1], stiffness.lower[-1]

    du_b = U[1:, b] - U[:-1, b]
    du_n = U[1:, nb] - U[:-1, nb]
    flux = (m_d * du_b + m_o * du_n) / dt + k_d * U[1:, b] + k_o * U[1:, nb]
    if source is not None:
        times = dt * np.arange(1, field.n_steps + 1)
        x_b, x_n = mesh.nodes[b], mesh.nodes[nb]
        f_b = np.array([float(np.asarray(source(np.array([x_b]), t))[0]) for t in times])
        f_n = np.array([float(np.asarray(source(np.array([x_n]), t))[0]) for t in times])
        flux -= m_d * f_b + m_o * f_n
    return flux
