"""Graph neural networks that rank vertices by centrality.

A small numpy/scipy stack: exact centrality oracles, random graph families,
a reverse-mode autodiff engine, an LSTM message-passing network with
comparison and regression heads, and the training/evaluation loop around them.
"""

from .errors import (
    CentralityGnnError,
    CheckpointError,
    ConfigError,
    ConvergenceError,
    GenerationError,
    InputError,
    NumericError,
    ParseError,
    ShapeError,
    UsageError,
)
from .graph import BatchedGraph, Graph, disjoint_union, from_edge_list, parse_edge_list, read_graph
from .oracles import (
    MEASURES,
    all_centralities,
    betweenness_centrality,
    centrality,
    closeness_centrality,
    degree_centrality,
    eigenvector_centrality,
    rank_label_matrix,
)
from .gnn import init_gnn_params, message_passing_run
from .heads import am_loss, approx_forward, cmp_forward, init_head_params, rn_loss
from .datasets import Dataset, GeneratorSpec, Instance, generate_dataset, load_dataset, preset_specs, save_dataset
from .metrics import kendall_tau, pair_counts, pca_1d
from .training import Model, TrainConfig, evaluate, sizes_sweep, train_model
from .checkpoint import checkpoint_load, checkpoint_save

__version__ = "0.1.0"
