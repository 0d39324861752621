//! Multi-threaded reduction. Workers claim disjoint sites (main or one
//! mailbox), decompose a snapshot of the site outside the lock, and commit
//! through a single coordinator that re-validates the snapshot first. Every
//! run is therefore equivalent to some sequential interleaving.

use std::collections::HashSet;
use std::sync::{Condvar, Mutex};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::redex::{focus, Focus, Redex, SiteKey};
use super::{Config, Machine, Outcome, RunOptions, RuntimeError, Stats, TraceEntry};
use crate::syntax::{Loc, Name};

/// One field update, with the window between the worker claiming its site
/// and committing the step, in global step numbers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UpdateRecord {
    pub worker: usize,
    pub loc: Loc,
    pub field: Name,
    pub claimed_at: u64,
    pub committed_at: u64,
}

impl UpdateRecord {
    /// Different workers updating the same record in overlapping windows.
    pub fn overlaps(&self, other: &UpdateRecord) -> bool {
        self.worker != other.worker
            && self.loc == other.loc
            && self.claimed_at < other.committed_at
            && other.claimed_at < self.committed_at
    }
}

struct Shared {
    cfg: Config,
    stats: Stats,
    trace: Vec<TraceEntry>,
    updates: Vec<UpdateRecord>,
    claimed: HashSet<SiteKey>,
    done: Option<Result<(), RuntimeError>>,
}

pub fn run_parallel(
    m: &Machine,
    workers: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<Outcome, RuntimeError> {
    let shared = Mutex::new(Shared {
        cfg: m.initial_config()?,
        stats: Stats::default(),
        trace: Vec::new(),
        updates: Vec::new(),
        claimed: HashSet::new(),
        done: None,
    });
    let wake = Condvar::new();
    thread::scope(|scope| {
        for w in 0..workers.max(1) {
            let (shared, wake) = (&shared, &wake);
            scope.spawn(move || worker(m, w, seed, opts, shared, wake));
        }
    });
    let s = shared.into_inner().unwrap_or_else(|p| p.into_inner());
    match s.done {
        Some(Err(e)) => Err(e),
        _ => m.finish(s.cfg, s.stats, s.trace, s.updates, opts),
    }
}

fn worker(
    m: &Machine,
    w: usize,
    seed: u64,
    opts: &RunOptions,
    shared: &Mutex<Shared>,
    wake: &Condvar,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (w as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut g = shared.lock().unwrap();
    loop {
        if g.done.is_some() {
            break;
        }
        if let Focus::EmptyHead(_) = focus(&g.cfg.main) {
            g.done = Some(Err(RuntimeError::EmptySignalInMain(Box::new(
                g.cfg.clone(),
            ))));
            break;
        }
        if g.claimed.is_empty() && g.cfg.is_terminal() {
            g.done = Some(Ok(()));
            break;
        }
        if g.stats.steps >= opts.max_steps {
            g.done = Some(Err(RuntimeError::StepLimit {
                limit: opts.max_steps,
                config: Box::new(g.cfg.clone()),
            }));
            break;
        }
        let avail: Vec<Redex> = m
            .redexes(&g.cfg)
            .into_iter()
            .filter(|r| !g.claimed.contains(&r.site.key()))
            .collect();
        if avail.is_empty() {
            if g.claimed.is_empty() {
                g.done = Some(Err(RuntimeError::Stuck(Box::new(g.cfg.clone()))));
                break;
            }
            g = wake.wait(g).unwrap();
            continue;
        }
        let r = avail[rng.gen_range(0..avail.len())].clone();
        let key = r.site.key();
        g.claimed.insert(key);
        let snapshot = g.cfg.site_expr(r.site).cloned();
        let claimed_at = g.stats.steps;
        drop(g);

        // Decompose the snapshot without holding the coordinator.
        let planned = snapshot.as_ref().map(focus);
        thread::yield_now();

        g = shared.lock().unwrap();
        g.claimed.remove(&key);
        if g.done.is_some() {
            break;
        }
        let still_same = g.cfg.site_expr(r.site) == snapshot.as_ref()
            && planned.is_none_or(|f| f == Focus::Redex(r.path.clone(), r.rule))
            && m.redexes(&g.cfg).contains(&r);
        if still_same {
            let s = &mut *g;
            let result = m.step(&mut s.cfg, &mut s.stats, &r).and_then(|info| {
                if let Some((loc, field)) = info.update.clone() {
                    s.updates.push(UpdateRecord {
                        worker: w,
                        loc,
                        field,
                        claimed_at,
                        committed_at: s.stats.steps,
                    });
                }
                m.after_step(&mut s.cfg, &mut s.stats, &mut s.trace, info, opts)
            });
            if let Err(e) = result {
                s.done = Some(Err(e));
            }
        }
        wake.notify_all();
    }
    wake.notify_all();
}

/// All overlapping pairs in an update log.
pub fn overlapping_updates(log: &[UpdateRecord]) -> Vec<(UpdateRecord, UpdateRecord)> {
    let mut out = Vec::new();
    for (i, a) in log.iter().enumerate() {
        for b in &log[i + 1..] {
            if a.overlaps(b) {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}
