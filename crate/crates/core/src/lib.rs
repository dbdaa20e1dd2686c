//! Topological crash detection and causality analysis for price panels.
//!
//! Prices are turned into log-return point clouds, each sliding window is
//! summarized by its H0 persistence diagram, and the Wasserstein distance of
//! consecutive diagrams (to the empty diagram, or between two clouds) forms a
//! time series. Those series are differenced to stationarity and compared
//! pairwise with Granger tests to build a directed network per period.

pub mod econometrics;
pub mod error;
pub mod fetch;
pub mod market_data;
pub mod network;
pub mod persistence;
pub mod pipeline;
pub mod plot;
pub mod synth;
pub mod universe;
pub mod wasserstein;

pub use error::{Error, Result};
