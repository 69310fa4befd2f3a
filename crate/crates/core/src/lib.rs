//! Indoor mmWave / sub-THz channel model workbench.
//!
//! Implements the close-in (CI) and frequency-weighted (CIF) large-scale
//! path loss models with a 1 m free space reference, least-squares fitting
//! of their parameters from link measurements, power delay profile (PDP)
//! processing into multipath components and time clusters, and a drop-based
//! Monte Carlo channel generator calibrated to published indoor office
//! (InH) statistics at 28, 73, and 142 GHz.
//!
//! Modules:
//! - [`pathloss`]: model evaluators and measurement records
//! - [`tables`]: embedded InH parameter registry and 3GPP reference values
//! - [`fitting`]: CI / CIF least-squares parameter estimation
//! - [`pdp`]: PDP noise floor, peak detection, clustering, delay spread
//! - [`synthesis`]: seeded drop generator and decay calibration
//! - [`io`]: CSV / JSON file formats and atomic writes
//! - [`report`]: 3GPP comparison reports and plot-ready series
//! - [`cli`]: command-line front end

pub mod cli;
pub mod fitting;
pub mod io;
pub mod pathloss;
pub mod pdp;
pub mod report;
pub mod synthesis;
pub mod tables;
