"""flowmine: process mining over workflow-engine history data.

Extracts event logs and BPMN models from engine history tables, discovers
directly-follows graphs and process trees, checks conformance by token
replay and escaping-edges precision, and adds resource/decision analytics.
"""

from .eventlog import (
    AttributeValue,
    DuplicateEventIdError,
    Event,
    EventLog,
    InvalidEventError,
    LogError,
    Trace,
    build_log,
    filter_activity_types,
    merge_logs,
)
from .xes import XesFormatError, export_xes, import_xes
from .csvlog import CsvFormatError, export_csv, import_csv
from .extractor import (
    ActInstRow,
    CsvDirectorySource,
    DetailRow,
    ExtractionError,
    ListSource,
    SourceUnreachableError,
    SqlSource,
    StateCorruptError,
    TableFormatError,
    WatermarkState,
    incremental_extract,
    merge_detail_attributes,
    parse_actinst_rows,
    read_table_csv,
)
from .petri import (
    IllegalFiringError,
    Marking,
    PetriNet,
    bounded_language,
    check_workflow_net,
    enabled,
    fire,
    make_net,
    simulate,
)
from .proctree import (
    ProcessTree,
    TreeError,
    format_tree,
    leaf,
    loop,
    par,
    parse_tree,
    seq,
    tau,
    tree_to_petri,
    xor,
)
from .discovery import Cut, Dfg, discover_dfg, find_cut, inductive_miner, mine_tree
from .conformance import FitnessResult, PrecisionResult, etc_precision, replay_fitness
from .bpmn import (
    BpmnGraph,
    BpmnParseError,
    ConversionError,
    DecoratedModel,
    UnsupportedConstruct,
    bpmn_to_petri,
    decorate_model,
    load_models,
    load_models_dir,
    load_models_rest,
    parse_bpmn,
)
from .analytics import (
    CaseSummary,
    Guard,
    ResourceMatrix,
    case_statistics,
    decision_mining,
    handover_of_work,
    similar_activities,
    working_together,
)

__version__ = "0.1.0"
