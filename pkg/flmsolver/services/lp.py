"""
LP Service - LP_FLM / LP_UFL construction and cutting-plane solution
Dense LPs solved with HiGHS dual simplex (vertex solutions) through scipy
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from flmsolver.config import FEAS_TOL, OBJ_REL_TOL, ZERO_TOL, get_settings
from flmsolver.errors import FlmError, InfeasibilityError, InvariantError, PreconditionError, UnboundedError
from flmsolver.models.fractional import FractionalFlm, FractionalMatching, UflFractional
from flmsolver.models.instance import FlmInstance, UflInstance
from flmsolver.models.reports import Relaxation
from flmsolver.services import matching as mm
from flmsolver.services.odd_cuts import OddSetTable
from flmsolver.utils.logger import log_lp_solve, log_performance, logger

Sense = Literal["<=", "=", ">="]


# ============= LINEAR PROGRAM =============

@dataclass
class Constraint:
    coef: Dict[int, float]
    sense: Sense
    rhs: float
    name: str


@dataclass
class LinearProgram:
    """
    min c·v subject to named linear constraints, all variables >= 0
    """
    names: List[str] = field(default_factory=list)
    cost: List[float] = field(default_factory=list)
    constraints: List[Constraint] = field(default_factory=list)
    title: str = "lp"

    @property
    def n_variables(self) -> int:
        return len(self.names)

    def add_variable(self, name: str, cost: float = 0.0) -> int:
        if not np.isfinite(cost):
            raise PreconditionError(f"objective coefficient of {name} is not finite")
        self.names.append(name)
        self.cost.append(float(cost))
        return len(self.names) - 1

    def add_constraint(self, coef: Dict[int, float], sense: Sense, rhs: float, name: Optional[str] = None) -> None:
        for idx in coef:
            if not 0 <= idx < self.n_variables:
                raise PreconditionError(f"constraint references undeclared variable {idx}")
        self.constraints.append(Constraint(
            {k: float(v) for k, v in coef.items() if v != 0.0}, sense, float(rhs),
            name or f"c{len(self.constraints)}",
        ))

    def matrices(self) -> Tuple[Optional[np.ndarray], Optional[np.ndarray], Optional[np.ndarray], Optional[np.ndarray]]:
        """(A_ub, b_ub, A_eq, b_eq) with >= rows flipped"""
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for con in self.constraints:
            row = np.zeros(self.n_variables)
            for k, v in con.coef.items():
                row[k] = v
            if con.sense == "=":
                eq_rows.append(row)
                eq_rhs.append(con.rhs)
            elif con.sense == "<=":
                ub_rows.append(row)
                ub_rhs.append(con.rhs)
            else:
                ub_rows.append(-row)
                ub_rhs.append(-con.rhs)
        A_ub = np.array(ub_rows) if ub_rows else None
        A_eq = np.array(eq_rows) if eq_rows else None
        return A_ub, (np.array(ub_rhs) if ub_rows else None), A_eq, (np.array(eq_rhs) if eq_rows else None)

    def violations(self, values: np.ndarray, tol: float = FEAS_TOL) -> List[str]:
        out = []
        for con in self.constraints:
            lhs = sum(v * values[k] for k, v in con.coef.items())
            if (con.sense == "<=" and lhs > con.rhs + tol) or (con.sense == ">=" and lhs < con.rhs - tol) \
                    or (con.sense == "=" and abs(lhs - con.rhs) > tol):
                out.append(f"{con.name}: {lhs:.9g} {con.sense} {con.rhs:.9g} fails")
        return out


def solve_lp(lp: LinearProgram) -> Tuple[np.ndarray, float]:
    """
    Solve an LP to a vertex optimum

    Returns:
        (variable values, objective value)

    Raises:
        InfeasibilityError: no feasible point
        UnboundedError: objective unbounded below
    """
    if lp.n_variables == 0:
        return np.zeros(0), 0.0
    A_ub, b_ub, A_eq, b_eq = lp.matrices()
    res = linprog(
        np.array(lp.cost), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        bounds=(0, None), method="highs-ds",
    )
    if res.status == 2:
        raise InfeasibilityError(f"LP '{lp.title}' is infeasible: {res.message}", constraint=res.message)
    if res.status == 3:
        raise UnboundedError(f"LP '{lp.title}' is unbounded: {res.message}")
    if res.status != 0:
        raise FlmError(f"LP solver failed on '{lp.title}': {res.message}")
    values = np.asarray(res.x, dtype=float)
    values[np.abs(values) <= ZERO_TOL] = 0.0
    values = np.maximum(values, 0.0)
    return values, float(np.dot(lp.cost, values))


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_lp_format(lp: LinearProgram) -> str:
    """Render the LP in CPLEX LP text format"""
    def expr(coef: Dict[int, float]) -> str:
        terms = []
        for k in sorted(coef):
            v = coef[k]
            sign = "-" if v < 0 else "+"
            terms.append(f"{sign} {_fmt(abs(v))} {lp.names[k]}")
        text = " ".join(terms) if terms else "0"
        return text[2:] if text.startswith("+ ") else text

    lines = [f"\\ {lp.title}", "Minimize", " obj: " + expr({k: c for k, c in enumerate(lp.cost) if c != 0.0}),
             "Subject To"]
    for con in lp.constraints:
        lines.append(f" {con.name}: {expr(con.coef)} {con.sense} {_fmt(con.rhs)}")
    lines.append("Bounds")
    lines.extend(f" {name} >= 0" for name in lp.names)
    lines.append("End")
    return "\n".join(lines) + "\n"


# ============= LP_FLM =============

@dataclass
class FlmLpResult:
    """Optimum of LP_FLM after the cutting-plane loop"""
    frac: FractionalFlm
    value: float
    cuts: int
    rounds: int
    nu: int
    perfect: bool
    relaxation: str
    history: List[float] = field(default_factory=list)
    lp: Optional[LinearProgram] = None
    seconds: float = 0.0


def build_lp_flm(inst: FlmInstance, relaxation: Relaxation = "full", perfect: Optional[bool] = None) -> LinearProgram:
    """
    LP_FLM without blossom cuts

    Variables x_<i>_<e> (facility i, edge position e), y_<i>, xe_<e>.
    Constraints: xe_e = Σ_i x_{i,e}; degree Σ_{δ(j)} xe_e <= 1 (= 1 when
    perfect); size Σ xe_e = ν; flow Σ_{δ(j)} x_{i,e} <= y_i (full,
    degree-only) or x_{i,e} <= y_i (weak-flow).
    """
    g = inst.graph
    nf, m = inst.n_facilities, g.n_edges
    target = mm.nu(g)
    if perfect is None:
        perfect = 2 * target == g.n_vertices
    lp = LinearProgram(title=f"LP_FLM ({relaxation})")
    pd = inst.pair_dist
    x = [[lp.add_variable(f"x_{i}_{e}", pd[i, e]) for e in range(m)] for i in range(nf)]
    y = [lp.add_variable(f"y_{i}", inst.opening[i]) for i in range(nf)]
    xe = [lp.add_variable(f"xe_{e}") for e in range(m)]

    for e in range(m):
        coef = {xe[e]: 1.0}
        coef.update({x[i][e]: -1.0 for i in range(nf)})
        lp.add_constraint(coef, "=", 0.0, f"tie_{e}")

    incident: List[List[int]] = [[] for _ in range(g.n_vertices)]
    for pos, (u, v) in enumerate(g.edges):
        incident[u].append(pos)
        incident[v].append(pos)
    for j in range(g.n_vertices):
        if incident[j]:
            lp.add_constraint({xe[e]: 1.0 for e in incident[j]}, "=" if perfect else "<=", 1.0, f"deg_{j}")
    lp.add_constraint({xe[e]: 1.0 for e in range(m)}, "=", float(target), "size")

    for i in range(nf):
        if relaxation == "weak-flow":
            for e in range(m):
                lp.add_constraint({x[i][e]: 1.0, y[i]: -1.0}, "<=", 0.0, f"flow_{i}_{e}")
        else:
            for j in range(g.n_vertices):
                if incident[j]:
                    coef = {x[i][e]: 1.0 for e in incident[j]}
                    coef[y[i]] = -1.0
                    lp.add_constraint(coef, "<=", 0.0, f"flow_{i}_{j}")
    return lp


def _unpack(inst: FlmInstance, values: np.ndarray) -> FractionalFlm:
    nf, m = inst.n_facilities, inst.graph.n_edges
    x = values[:nf * m].reshape(nf, m)
    y = values[nf * m:nf * m + nf]
    return FractionalFlm(x.copy(), y.copy(), inst.graph.edges, inst.n_clients)


def solve_lp_flm(
    inst: FlmInstance,
    relaxation: Relaxation = "full",
    max_rounds: Optional[int] = None,
) -> FlmLpResult:
    """
    Solve LP_FLM by cutting planes over blossom inequalities

    Each round solves the current LP and adds the most violated odd-set
    inequality on the marginals {x_e}; perfectly matchable graphs use degree
    equalities and cut-form separation. `degree-only` skips separation and
    `weak-flow` replaces the flow constraints with x_{i,e} <= y_i.

    Args:
        inst: Validated instance
        relaxation: full, weak-flow or degree-only
        max_rounds: Cap on LP solves (settings.max_cut_rounds by default)

    Returns:
        FlmLpResult with the optimal point, its value and the cut count
    """
    start = time.perf_counter()
    g = inst.graph
    nf, m = inst.n_facilities, g.n_edges
    target = mm.nu(g)
    perfect = target > 0 and 2 * target == g.n_vertices

    if target == 0:
        frac = FractionalFlm(np.zeros((nf, m)), np.zeros(nf), g.edges, inst.n_clients)
        return FlmLpResult(frac, 0.0, 0, 0, 0, False, relaxation, [0.0])

    lp = build_lp_flm(inst, relaxation, perfect)
    xe_offset = nf * m + nf
    rounds_cap = max_rounds or get_settings().max_cut_rounds
    mode = "perfect" if perfect else "general"

    history: List[float] = []
    cuts = 0
    while True:
        values, value = solve_lp(lp)
        history.append(value)
        if len(history) > 1 and value < history[-2] - OBJ_REL_TOL * max(1.0, abs(history[-2])):
            raise InvariantError("LP value decreased after adding a cut", {"history": history})
        if relaxation == "degree-only":
            break
        z = values[xe_offset:xe_offset + m]
        cut = mm.separate_odd_set(g, FractionalMatching(z), mode)
        if cut is None:
            break
        if len(history) >= rounds_cap:
            raise InvariantError(f"cutting-plane loop exceeded {rounds_cap} rounds", {"history": history})
        lp.add_constraint({xe_offset + e: c for e, c in enumerate(cut.coef) if c != 0.0}, "<=", cut.rhs,
                          f"blossom_{cuts}")
        logger.debug(f"Cut {cuts} | {cut.describe()}")
        cuts += 1

    frac = _unpack(inst, values)
    seconds = time.perf_counter() - start
    log_lp_solve(value, cuts, len(history), relaxation)
    log_performance("solve_lp_flm", seconds, len(history))
    return FlmLpResult(frac, value, cuts, len(history), target, perfect, relaxation, history, lp, seconds)


def flm_costs(inst: FlmInstance, frac: FractionalFlm) -> Tuple[float, float]:
    """
    (open(y), conn_FLM(x)) with conn_FLM(x) = Σ_i Σ_e d(i, e) x_{i,e}
    """
    opening = float(inst.opening @ frac.y) if len(frac.y) else 0.0
    connection = float((inst.pair_dist * frac.x).sum()) if frac.x.size else 0.0
    return opening, connection


def project_to_ufl(inst: FlmInstance, frac: FractionalFlm) -> UflFractional:
    """
    Client-level UFL point x_{i,j} = Σ_{e∈δ(j)} x_{i,e}, y unchanged

    Raises:
        PreconditionError: compatibility graph not perfectly matchable
    """
    if not mm.is_perfectly_matchable(inst.graph):
        raise PreconditionError("projection to LP_UFL needs a perfectly matchable compatibility graph")
    return UflFractional(frac.x_client, frac.y.copy())


def check_lp_flm_feasible(inst: FlmInstance, frac: FractionalFlm, tol: float = FEAS_TOL) -> List[str]:
    """
    Itemized LP_FLM feasibility check

    Nonnegativity, flow, degree, size, and blossom constraints (exhaustive
    over odd sets up to settings.exhaustive_check_cap vertices, separation
    above).
    """
    g = inst.graph
    nf, m = inst.n_facilities, g.n_edges
    violations: List[str] = []
    if frac.x.shape != (nf, m) or frac.y.shape != (nf,):
        return [f"shape mismatch: x {frac.x.shape}, y {frac.y.shape} for {nf} facilities and {m} edges"]

    for i, e in np.argwhere(frac.x < -tol)[:20]:
        violations.append(f"negative x at facility {i}, edge {g.edges[e]}: {frac.x[i, e]:.3g}")
    for i in np.flatnonzero(frac.y < -tol):
        violations.append(f"negative y at facility {i}: {frac.y[i]:.3g}")

    flow = frac.x_client
    for i, j in np.argwhere(flow > frac.y[:, None] + tol)[:20]:
        violations.append(f"flow violated at facility {i}, client {j}: {flow[i, j]:.9g} > y={frac.y[i]:.9g}")

    z = frac.x_edge
    deg = g.incidence() @ z if m else np.zeros(g.n_vertices)
    for v in np.flatnonzero(deg > 1.0 + tol):
        violations.append(f"degree violated at client {v}: {deg[v]:.9g} > 1")
    target = mm.nu(g)
    if abs(z.sum() - target) > tol * max(1, m):
        violations.append(f"size violated: Σ x_e = {z.sum():.9g} != nu = {target}")

    if target and g.n_vertices >= 3:
        if g.n_vertices <= get_settings().exhaustive_check_cap:
            table = OddSetTable(g, z)
            viol = table.inner_violation()
            mask = int(np.argmax(viol))
            if viol[mask] > tol:
                violations.append(f"odd set {table.members(mask)} violated by {viol[mask]:.3g}")
        else:
            cut = mm.separate_odd_set(g, FractionalMatching(z), "general")
            if cut is not None and cut.violation > tol:
                violations.append(cut.describe())
    return violations


# ============= LP_UFL =============

def build_lp_ufl(ufl: UflInstance) -> LinearProgram:
    """
    Standard UFL relaxation: Σ_i x_{i,j} = 1, x_{i,j} <= y_i

    Args:
        ufl: UFL instance

    Returns:
        LinearProgram with x_{i,j} (facility-major) followed by y_i
    """
    nf, nc = ufl.n_facilities, ufl.n_clients
    lp = LinearProgram(title="LP_UFL")
    x = [[lp.add_variable(f"x_{i}_{j}", ufl.cost[i, j]) for j in range(nc)] for i in range(nf)]
    y = [lp.add_variable(f"y_{i}", ufl.opening[i]) for i in range(nf)]
    for j in range(nc):
        lp.add_constraint({x[i][j]: 1.0 for i in range(nf)}, "=", 1.0, f"assign_{j}")
    for i in range(nf):
        for j in range(nc):
            lp.add_constraint({x[i][j]: 1.0, y[i]: -1.0}, "<=", 0.0, f"open_{i}_{j}")
    return lp


def solve_lp_ufl(ufl: UflInstance) -> Tuple[UflFractional, float]:
    """
    Optimal LP_UFL point and value

    Args:
        ufl: UFL instance

    Returns:
        (fractional point, LP value); (zeros, 0.0) without clients
    """
    nf, nc = ufl.n_facilities, ufl.n_clients
    if nc == 0:
        return UflFractional(np.zeros((nf, 0)), np.zeros(nf)), 0.0
    values, value = solve_lp(build_lp_ufl(ufl))
    x = values[:nf * nc].reshape(nf, nc)
    y = values[nf * nc:]
    return UflFractional(x.copy(), y.copy()), value


def ufl_costs(ufl: UflInstance, frac: UflFractional) -> Tuple[float, float]:
    """
    Split an LP_UFL value into its two parts

    Returns:
        (open(y), conn_UFL(x))
    """
    return float(ufl.opening @ frac.y), float((ufl.cost * frac.x).sum())
