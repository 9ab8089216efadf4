use std::path::PathBuf;

use anyhow::Context;
use cfb_core::analytics::{simulate, write_sessions, SimulationProfile};
use clap::Args;

use crate::{Outcome, UsageError};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// JSON profile; defaults to the built-in one
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub participants: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for one `<session_id>.jsonl` per session
    #[arg(long)]
    pub out: PathBuf,
    /// Make CFB-on hovers this many times longer than CFB-off ones,
    /// replacing the profile's CFB-on behaviour
    #[arg(long)]
    pub on_exploration_factor: Option<f64>,
}

pub fn run(args: SimulateArgs) -> anyhow::Result<Outcome> {
    if args.participants == 0 {
        return Err(UsageError("--participants must be at least 1".into()).into());
    }
    let mut profile = match &args.profile {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SimulationProfile::from_json(&text).with_context(|| format!("profile {}", path.display()))?
        }
        None => SimulationProfile::default(),
    };
    if let Some(factor) = args.on_exploration_factor {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(UsageError("--on-exploration-factor must be a non-negative number".into()).into());
        }
        profile = profile.with_on_exploration_factor(factor);
    }
    let sessions = simulate(&profile, args.participants, args.seed)?;
    write_sessions(&args.out, &sessions)?;
    println!("wrote {} sessions to {}", sessions.len(), args.out.display());
    Ok(Outcome::Success)
}
