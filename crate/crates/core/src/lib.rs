//! Search on vertical strips: a randomized algorithm for finding
//! `F_q`-rational zeros of multivariate polynomials, with exact predictors,
//! brute-force oracles and a Monte Carlo harness.

pub mod analytics;
pub mod cli;
pub mod ff;
pub mod harness;
pub mod oracle;
pub mod poly;
pub mod roots;
pub mod search;
