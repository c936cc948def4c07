//! Iterative inversion of the frame operator, with and without a controller as
//! preconditioner, plus instance generators and the benchmark harness.

mod bench;
mod generate;
mod solvers;

pub use bench::{run_benchmark, write_csv, BenchConfig, BenchRow, CSV_HEADER};
pub use generate::{
    choose_controller, diagonal_controller, exact_inverse_controller, generate_instance,
    ControllerChoice, Instance, InstanceKind,
};
pub use solvers::{
    cg_solve, controlled_richardson_solve, richardson_solve, ConvergenceTrace, Relaxation, Solve,
    SolverConfig,
};
