//! Argument parsing. Every subcommand takes the same flags; the ones it does
//! not use are ignored.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "dimer", version, about = "Josephson dynamics, fixed points and fluctuations of a two-mode condensate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Contour,
    Evolve,
    FixedPoints,
    Critical,
    Fluct,
    Quantum,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy surface h(x, φ) as CSV plus a JSON overlay of fixed points.
    Contour(CommonArgs),
    /// Integrate the Josephson equations from (--x0, --phi0).
    Evolve(CommonArgs),
    /// Fixed points with branch labels and stability.
    FixedPoints(CommonArgs),
    /// Critical ξ for one or more tilts.
    Critical(CommonArgs),
    /// Semiclassical number and phase fluctuations at a fixed point.
    Fluct(CommonArgs),
    /// Exact ground state (and doublet) from Fock-space diagonalization.
    Quantum(CommonArgs),
    /// A scalar observable over a grid of (N, ξ, δ).
    Sweep(CommonArgs),
}

impl Command {
    pub fn split(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Contour(a) => (CommandKind::Contour, a),
            Command::Evolve(a) => (CommandKind::Evolve, a),
            Command::FixedPoints(a) => (CommandKind::FixedPoints, a),
            Command::Critical(a) => (CommandKind::Critical, a),
            Command::Fluct(a) => (CommandKind::Fluct, a),
            Command::Quantum(a) => (CommandKind::Quantum, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Reduced interaction ξ = gβN/(2γ); a list for sweeps.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// Reduced tilt δ = Δ/(2γ); accepts a,b,... or a:b:n.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Total atom number N; a list for sweeps.
    #[arg(long)]
    pub n_atoms: Option<String>,
    /// Tunneling γ (physical input).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Mean-field coupling gβ (physical input).
    #[arg(long, allow_hyphen_values = true)]
    pub gbeta: Option<f64>,
    /// Well asymmetry Δ (physical input).
    #[arg(long, allow_hyphen_values = true)]
    pub tilt: Option<f64>,
    /// paper-s, paper-spm, javanainen or generic.
    #[arg(long)]
    pub variant: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file read before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Contour resolution, N or NXxNPHI.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub tau_end: Option<f64>,
    /// Largest integration step.
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Relative energy drift allowed over a trajectory.
    #[arg(long)]
    pub energy_drift: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    /// Solve the stationarity condition in its literal printed form.
    #[arg(long)]
    pub eq9_as_printed: bool,
    /// Add a small reduced tilt (default 1e-3) to localise the ground state.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", allow_hyphen_values = true)]
    pub tilt_localize: Option<String>,
    /// Report exact against this variant's Δn.
    #[arg(long)]
    pub compare: Option<String>,
    /// Fixed point for fluct and sweep: p, s, s+ or s-.
    #[arg(long)]
    pub branch: Option<String>,
    /// Sweep output: delta-n, quantum-delta-n, doublet-delta-n, xi-c or stable-count.
    #[arg(long)]
    pub observable: Option<String>,
    /// Fit a power law of the sweep against n, xi, xi-minus-one or delta.
    #[arg(long)]
    pub fit: Option<String>,
}

impl CommonArgs {
    /// The flags that were actually given, as a settings layer.
    pub fn settings(&self) -> CliResult<Settings> {
        let mut s = Settings::new();
        let text: [(&str, Option<String>); 20] = [
            ("xi", self.xi.clone()),
            ("delta", self.delta.clone()),
            ("n-atoms", self.n_atoms.clone()),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("gbeta", self.gbeta.map(|v| v.to_string())),
            ("tilt", self.tilt.map(|v| v.to_string())),
            ("variant", self.variant.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("grid", self.grid.clone()),
            ("tau-end", self.tau_end.map(|v| v.to_string())),
            ("dtau", self.dtau.map(|v| v.to_string())),
            ("energy-drift", self.energy_drift.map(|v| v.to_string())),
            ("x0", self.x0.map(|v| v.to_string())),
            ("phi0", self.phi0.map(|v| v.to_string())),
            ("eq9-as-printed", self.eq9_as_printed.then(|| "true".to_string())),
            ("tilt-localize", self.tilt_localize.clone()),
            ("compare", self.compare.clone()),
            ("branch", self.branch.clone()),
            ("observable", self.observable.clone()),
            ("fit", self.fit.clone()),
        ];
        for (k, v) in text {
            if let Some(v) = v {
                s.set(k, v)?;
            }
        }
        Ok(s)
    }
}
