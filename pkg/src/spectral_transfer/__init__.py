"""Spectral contrastive representations and preconditioned feature averaging
on finite positive-pair graphs, with numerical checks of the transfer bounds."""

from .graph import (
    DomainSpec,
    PositivePairGraph,
    build_graph,
    cut_weight,
    graph_from_weights,
    load_graph,
    restrict,
    save_graph,
    set_weight,
)
from .spectral import (
    Representation,
    SpectralDecomposition,
    decompose,
    generalized_loss,
    laplacian,
    minimize_loss,
    normalized_adjacency,
    spectral_contrastive_loss,
)
from .metrics import assumption_report, compute_alpha, compute_rho, compute_tau, conductance_gamma
from .pfa import fit_pfa, linear_probe_error, predict, target_error
from .generators import SbmParams, alpha_family, calibrate_alpha, generate_sbm, perturb, reference_params
from .oracles import check_all, check_lemma

__version__ = "0.1.0"
