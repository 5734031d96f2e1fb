//! The three reference consumers: information-gain feature selection,
//! Bayes-net structure scoring with stochastic hill climbing, and
//! conjunctive rule search. Each counts through a [`Counter`], so the tree
//! and the linear-scan backend are interchangeable and comparable.

mod bayes;
mod counter;
mod infogain;
mod rules;

pub use bayes::{
    bn_hill_climb, bn_prob_tables, bn_score, BayesNet, HillClimbConfig, HillClimbResult,
    ProbTable,
};
pub use counter::Counter;
pub use infogain::{feature_select, info_gain, FeatureScore};
pub use rules::{rule_search, Rule};
