//! Minimum peak load acceleration transfer under input bounds.
//!
//! cargo run --release --example minimax_trajectory -- [horizon_s] [ts_s]
//!
//! Defaults to a coarse 2 s / 100 ms problem that solves in well under a
//! second; `3 0.01` gives the full-resolution problem. The samples go to
//! `out/minimax_reference.csv`.

use gantry_flat::model::FlatOutput;
use gantry_flat::params::CraneParams;
use gantry_flat::trajectory::{optimize_minimax_acceleration, polynomial_initializer, OptimizationProblem, SolverSettings};

fn main() -> gantry_flat::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let horizon = args.next().unwrap_or(2.0);
    let ts = args.next().unwrap_or(0.1);
    let problem = OptimizationProblem {
        start: FlatOutput::new(0.2, 0.7),
        end: FlatOutput::new(1.0, 0.5),
        horizon,
        ts,
        force_max: 10.0,
        torque_max: 0.2,
        settings: SolverSettings::default(),
    };
    let init = polynomial_initializer(&problem)?;
    let (reference, report) = optimize_minimax_acceleration(&problem, &init, &CraneParams::default())?;

    println!("{} after {} iterations", report.termination, report.iterations);
    println!("peak acceleration {:.4} -> {:.4} m/s^2", report.initial_epsilon, report.epsilon);
    let m_peak = report.torque.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let f_peak = report.force.iter().map(|f| f.abs()).fold(0.0, f64::max);
    println!("max |F| {f_peak:.3} N, max |M| {m_peak:.4} N m");
    for (k, a) in report.a_l.iter().enumerate().step_by((report.a_l.len() / 10).max(1)) {
        println!("  k={k:>4}  a_L={a:.4}  F={:+.3}", report.force[k]);
    }
    std::fs::create_dir_all("out")?;
    reference.save_csv("out/minimax_reference.csv")?;
    println!("wrote out/minimax_reference.csv");
    Ok(())
}
