//! Graph-based semi-supervised classifiers.

mod learn;
mod multiscale;
mod solver;

pub use learn::{
    laplace_learn, laplace_learn_with, poisson_potential, poisson_reweight, predict, pwll_learn, pwll_learn_with,
    reweighted_graph, tau_decay, LabelMatrix, ReweightFunction, Solution, GAMMA_FLOOR, TAU_EPSILON,
};
pub use multiscale::{
    multiscale_operator, multiscale_operator_with, HypergraphOperator, RewireTerm, RewiredOperator,
    DEFAULT_MATERIALIZE_CAP,
};
pub use solver::{solve_dirichlet, solve_spd, Coupled, SolveOptions, SolveReport, SymOperator};
