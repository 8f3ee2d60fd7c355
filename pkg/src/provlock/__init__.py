"""Module privacy analysis for provenance views of finite-domain workflows."""

from .closures import (
    Classification,
    classify_single_predecessor,
    directed_public_path,
    downward_closure,
    public_closure,
    undirected_public_path,
)
from .equiv import eflip, equiv, flip
from .model import (
    Module,
    ModelError,
    Relation,
    Workflow,
    build_workflow,
    cost_of,
    load_workflow,
    make_module,
    workflow_relation,
)
from .optimizer import (
    NoFeasiblePlan,
    optimize_chain_closure,
    optimize_dag_closure,
    optimize_tree_closure,
    optimize_workflow,
)
from .privacy import (
    AssemblyPlan,
    ConditionViolated,
    NotSinglePredecessor,
    PreconditionViolated,
    PrivacyReport,
    assemble_general,
    assemble_single_pred,
    construct_witness_world,
    gamma_achieved,
    workflow_out,
    workflow_worlds,
)
from .safety import compose_public, enumerate_dsafe, enumerate_udsafe, is_dsafe, is_udsafe, is_usafe
from .standalone import (
    count_standalone_worlds,
    enumerate_safe_subsets,
    is_standalone_safe,
    standalone_out,
    standalone_worlds,
)
