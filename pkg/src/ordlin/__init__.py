"""Order-theoretic structured prediction.

Structures are directed graphs over tokens; splitting tokens into red and
blue copies makes any structure a strict partial order, which K learned
rank rows realize as an intersection of K total orders.  Aggregation over
all token pairs then runs in linear-ish time for K=2 by sorting once and
sweeping prefixes.
"""

from .structures import (
    ContractViolation,
    OrderAxiomReport,
    Structure,
    TokenSplitStructure,
    check_order_axioms,
    recover_structure,
    structure_from_text,
    structure_to_text,
    token_split,
)
from .orders import Realizer, intersect_total_orders, pairwise_psi, psi_matrix
from .constructions import (
    LinearExtensionPair,
    common_order,
    realize_tree,
    sp_parallel,
    sp_series,
)
from .bintree import BinaryTree, TraversalError, random_binary_tree, reconstruct_binary_tree
from .semirings import LOGSUMEXP, MIN, MIN_ARGMIN, MIN_TOP2, SEMIRINGS, Semiring, min_topk
from .aggregation import (
    AggregationResult,
    UnsupportedDimension,
    aggregate_fast_k2,
    aggregate_naive,
    argmin_heads,
    logsumexp_offedge,
)
from .model import (
    ModelParameters,
    ScorerConfig,
    encode,
    init_parameters,
    label_scores,
    load_checkpoint,
    loss,
    loss_grad,
    realize_ranks,
    save_checkpoint,
)
from .conllu import ParseResult, Sentence, Vocab, read_conllu, write_conllu
from .parser import Checkpoint, evaluate, parse, train, tree_violations

__version__ = "0.1.0"
