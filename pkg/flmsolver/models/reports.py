"""
Report Models - Pydantic schemas for pipeline, reroute, LP and oracle results
These are the JSON documents the CLI prints on stdout
"""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from flmsolver.models.instance import FlmSolution

Mode = Literal["general", "perfect-reroute", "perfect-direct", "auto"]
Relaxation = Literal["full", "weak-flow", "degree-only"]


class PipelineConfig(BaseModel):
    """Pipeline parameters; lam=None means the mode's default λ"""
    model_config = ConfigDict(populate_by_name=True)

    mode: Mode = "auto"
    lam: Optional[float] = Field(default=None, alias="lambda")
    seed: int = 0
    trials: int = 1
    deterministic: bool = False
    jobs: Optional[int] = None


class RerouteStep(BaseModel):
    """One rerouting iteration"""
    iteration: int
    epsilon: float
    kind: Literal["path", "cycle", "shift"]
    size: int
    potential: int


class RerouteReport(BaseModel):
    """Result of a Reroute run; `output` carries the rerouted point in-process only"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mode: Literal["general", "perfect"]
    iterations: int
    initial_potential: int
    final_potential: int
    transfer_total: float
    y_scale: float
    open_before: float
    open_after: float
    conn_before: float
    conn_after: float
    matching_length: float
    swept_mass: float = 0.0
    steps: List[RerouteStep] = Field(default_factory=list, exclude=True)
    output: Optional[Any] = Field(default=None, exclude=True)  # FractionalFlm


class LpReport(BaseModel):
    """LP_FLM optimum as printed by `solve --mode lp-only`"""
    lp_value: float
    lp_open: float
    lp_conn: float
    nu: int
    relaxation: Relaxation = "full"
    cuts: int
    rounds: int
    history: List[float] = Field(default_factory=list)
    y: List[float] = Field(default_factory=list)
    x_edge: List[float] = Field(default_factory=list)


class PipelineReport(BaseModel):
    """End-to-end approximation result"""
    model_config = ConfigDict(populate_by_name=True)

    mode: Mode
    lam: float = Field(alias="lambda")
    seed: int
    solution: FlmSolution
    cost: float
    lp_value: float
    lp_open: float
    lp_conn: float
    nu: int
    cuts: int
    reroute: Optional[RerouteReport] = None
    guarantee_bound: float
    trials: int = 1
    trial_costs: List[float] = Field(default_factory=list)
    trial_seeds: List[int] = Field(default_factory=list)
    mean_cost: float
    checks: Dict[str, float] = Field(default_factory=dict)
    timings: Dict[str, float] = Field(default_factory=dict)


class ExactResult(BaseModel):
    """Brute-force optimum"""
    optimum: float
    optimal_solution: FlmSolution
    facility_subsets_evaluated: int


class GapReport(BaseModel):
    """Exact optimum against one or more LP relaxations"""
    exact: float
    lp: Dict[str, float]
    gap: Dict[str, float]


class RunRecord(BaseModel):
    """One benchmark / solve run (a bench CSV row)"""
    model_config = ConfigDict(populate_by_name=True)

    instance: str
    mode: str
    lam: float = Field(alias="lambda")
    seed: int
    nu: int = 0
    lp_value: Optional[float] = None
    cost: Optional[float] = None
    exact: Optional[float] = None
    ratio_lp: Optional[float] = None
    ratio_exact: Optional[float] = None
    cuts: int = 0
    reroute_iters: int = 0
    ms_lp: float = 0.0
    ms_round: float = 0.0
    status: str = "ok"
