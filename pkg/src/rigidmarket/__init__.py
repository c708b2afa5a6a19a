"""Allocation of indivisible items under price rigidities.

An ascending mechanism raises the prices of minimal over-demanded item
sets and rations capped items by fair lottery; every run ends in a
constrained Walrasian equilibrium.  The package also evaluates the
mechanism's lottery tree exactly (expected profits and prices as
rationals) and analyses strategic misreporting.
"""

from .errors import (
    DummyInSet,
    EconomyValidationError,
    EquilibriumExists,
    InvalidMatching,
    NoEntrants,
    NotTwoBuyers,
    ScriptError,
    SizeGuard,
    TreeSizeExceeded,
    UpperBoundViolation,
)
from .model import (
    DUMMY,
    DUMMY_NAME,
    Allocation,
    DemandSituation,
    Economy,
    RationingSystem,
    demand_set,
    demand_situation,
    economy_from_dict,
    indirect_utility,
    is_admissible,
    load_economy,
    validate_economy,
)
from .matching import (
    BipartiteGraph,
    Matching,
    augment,
    build_graph,
    equilibrium_allocation_exists,
    matching_to_allocation,
    max_matching,
    maximum_matching,
)
from .overdemand import (
    OverdemandReport,
    grow_over_demanded,
    is_not_under_demanded,
    is_over_demanded,
    mods,
    overdemand_report,
)
from .equilibrium import (
    CONDITION_NAMES,
    EquilibriumCertificate,
    brute_force_equilibrium_allocation,
    check_cwe,
    minimal_over_demanded_sets,
    over_demanded_sets,
)
from .mechanism import (
    LotteryEvent,
    MaprOutcome,
    MechanismState,
    ScriptedLottery,
    SeededLottery,
    Trace,
    TraceRow,
    initial_state,
    lottery_step,
    price_increase_step,
    refresh_demands,
    rm,
    run_mapr,
)
from .expectation import (
    AllocationSituation,
    ExpectationReport,
    HistoryLeaf,
    TreeStats,
    aggregate_histories,
    enumerate_histories,
    expected_values,
    record_sale,
    sold_matching_from_rationing,
)
from .strategy import (
    ContestDetails,
    ManipulationProblem,
    SearchResult,
    Strategy,
    TwoBuyerVerdict,
    default_value_cap,
    expected_profit_under_strategy,
    optimal_strategy_search,
    two_buyer_case_analysis,
)

__version__ = "0.1.0"
