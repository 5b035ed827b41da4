"""Symbolic task planning and benchmark harness for two-hand robot manipulation."""

from .model import (
    ActionSchema,
    AgentAnnotation,
    Domain,
    EqualityConstraint,
    Literal,
    PredicateSchema,
    Problem,
    TypeName,
    print_domain,
    print_problem,
    validate_domain,
    validate_problem,
)
from .parser import ParseError, parse_domain, parse_problem
from .grounding import (
    GroundAction,
    GroundTask,
    GroundingError,
    dump_atom_table,
    ground,
    relaxed_reachability,
)
from .search import Plan, SearchConfig, SearchResult, applicable, apply, h_add, solve
from .deorder import (
    PartialOrderPlan,
    PrecedenceGraph,
    deorder,
    linearizations,
    precedence_graph,
    rebalance_hands,
    sample_linearizations,
    schedule,
)
from .executor import (
    ExecutionReport,
    execute_partial_order,
    execute_sequential,
    goal_check,
)
from .domain_def import build_domain
from .scenarios import Scene, ScenarioSpec, gen_scenario, goal_from_task_text
from .writer import WriterConfig, write_problem_external, write_problem_rule
from .bench import (
    BenchRecord,
    PipelineConfig,
    emit_csv,
    group_debits,
    psrr,
    run_bench,
    success_rate,
)

__version__ = "0.1.0"
