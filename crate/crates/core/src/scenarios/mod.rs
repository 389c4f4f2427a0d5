//! Configuration, figure pipelines and output for the driven-atom scenarios.

pub mod config;
pub mod csv;
pub mod figures;
pub mod montecarlo;
pub mod rabi;
pub mod verify;

pub use config::{ChannelKind, GridPoint, Instance, ProcessConfig, Quantity, ScenarioConfig};
pub use csv::CsvTable;
pub use figures::{
    fig2_config, fig_a3_config, monte_carlo_sweep, reproduce_fig2, reproduce_fig_a2, reproduce_fig_a3, sweep,
};
pub use montecarlo::{monte_carlo_tpm, Estimate, McResult};
pub use rabi::{atom_hamiltonian, rabi_process, rabi_unitary, rabi_work_closed_form};
pub use verify::{run_suite, CheckResult};
