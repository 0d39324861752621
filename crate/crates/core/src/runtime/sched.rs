use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::redex::{Redex, SiteKey};

/// How the next redex is picked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Policy {
    SeededRandom(u64),
    /// Cycles over sites: main, then mailboxes by location.
    RoundRobin,
    /// Always the first enabled redex, so main runs whenever it can.
    MainFirst,
    /// Worker threads claiming disjoint sites; each seeds its own RNG from
    /// `seed` and its index.
    Parallel {
        workers: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GcPolicy {
    Never,
    Every(u64),
    OnTerminal,
}

impl Default for GcPolicy {
    fn default() -> GcPolicy {
        GcPolicy::Every(1024)
    }
}

impl fmt::Display for GcPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GcPolicy::Never => f.write_str("never"),
            GcPolicy::Every(k) => write!(f, "every-{k}"),
            GcPolicy::OnTerminal => f.write_str("terminal"),
        }
    }
}

impl FromStr for GcPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<GcPolicy, String> {
        match s {
            "never" => Ok(GcPolicy::Never),
            "terminal" => Ok(GcPolicy::OnTerminal),
            _ => s
                .strip_prefix("every-")
                .and_then(|k| k.parse().ok())
                .filter(|k| *k > 0)
                .map(GcPolicy::Every)
                .ok_or_else(|| {
                    format!("invalid gc policy `{s}` (expected never, every-K or terminal)")
                }),
        }
    }
}

pub struct Scheduler {
    policy: Policy,
    rng: ChaCha8Rng,
    last: Option<SiteKey>,
}

impl Scheduler {
    pub fn new(policy: Policy) -> Scheduler {
        let seed = match policy {
            Policy::SeededRandom(s) | Policy::Parallel { seed: s, .. } => s,
            _ => 0,
        };
        Scheduler {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last: None,
        }
    }

    /// Index into `redexes`, which must be non-empty.
    pub fn choose(&mut self, redexes: &[Redex]) -> usize {
        match self.policy {
            Policy::SeededRandom(_) | Policy::Parallel { .. } => {
                self.rng.gen_range(0..redexes.len())
            }
            Policy::MainFirst => 0,
            Policy::RoundRobin => {
                let next = self
                    .last
                    .and_then(|last| redexes.iter().position(|r| r.site.key() > last))
                    .unwrap_or(0);
                self.last = Some(redexes[next].site.key());
                next
            }
        }
    }
}
