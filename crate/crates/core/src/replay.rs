//! Action-keyed reward cache with bounded reuse.
//!
//! Each entry stores one cached scalar for an action index together with a
//! countdown of remaining uses. A hit returns the cached value and burns one
//! use; the entry is evicted when its countdown reaches zero, forcing a fresh
//! evaluation on the next lookup. Keying on the action alone implements the
//! approximation that an edge's effect on depth is largely state-independent.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("replay threshold must be at least 1, got {0}")]
    BadThreshold(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    reward: f64,
    remaining: usize,
}

/// Hit/miss accounting, exported into the training metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplayStats {
    pub hits: usize,
    pub misses: usize,
    pub evictions: usize,
}

/// Reward cache indexed by action. The action space is the dense range of
/// vertex-pair indices, so storage is a flat slot table.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    entries: Vec<Option<Entry>>,
    stats: ReplayStats,
}

impl ReplayMemory {
    pub fn new(num_actions: usize) -> Self {
        Self {
            entries: vec![None; num_actions],
            stats: ReplayStats::default(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.entries.len()
    }

    pub fn stats(&self) -> ReplayStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Look up the cached reward for `action`. A hit burns one remaining use
    /// and evicts the entry when none are left.
    pub fn lookup(&mut self, action: usize) -> Option<f64> {
        match self.entries[action] {
            Some(ref mut entry) => {
                let reward = entry.reward;
                entry.remaining -= 1;
                if entry.remaining == 0 {
                    self.entries[action] = None;
                    self.stats.evictions += 1;
                }
                self.stats.hits += 1;
                Some(reward)
            }
            None => {
                self.stats.misses += 1;
                None
            }
        }
    }

    /// Store `reward` for `action` with `threshold` allowed reuses.
    /// Re-inserting overwrites: the freshest evaluation wins.
    pub fn insert(
        &mut self,
        action: usize,
        reward: f64,
        threshold: usize,
    ) -> Result<(), ReplayError> {
        if threshold == 0 {
            return Err(ReplayError::BadThreshold(threshold));
        }
        self.entries[action] = Some(Entry {
            reward,
            remaining: threshold,
        });
        Ok(())
    }

    pub fn clear(&mut self) {
        self.entries.fill(None);
    }

    /// Union with another memory, keeping the entry with more remaining uses.
    /// Used when per-worker memories meet at an iteration boundary; stats are
    /// summed.
    pub fn merge(&mut self, other: &ReplayMemory) {
        assert_eq!(self.entries.len(), other.entries.len());
        for (mine, theirs) in self.entries.iter_mut().zip(&other.entries) {
            match (&mine, theirs) {
                (None, Some(_)) => *mine = *theirs,
                (Some(a), Some(b)) if b.remaining > a.remaining => *mine = *theirs,
                _ => {}
            }
        }
        self.stats.hits += other.stats.hits;
        self.stats.misses += other.stats.misses;
        self.stats.evictions += other.stats.evictions;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_two_serves_two_hits_then_misses() {
        let mut m = ReplayMemory::new(8);
        m.insert(3, 0.5, 2).unwrap();
        assert_eq!(m.lookup(3), Some(0.5));
        assert_eq!(m.lookup(3), Some(0.5));
        assert_eq!(m.lookup(3), None);
        assert_eq!(
            m.stats(),
            ReplayStats {
                hits: 2,
                misses: 1,
                evictions: 1
            }
        );
    }

    #[test]
    fn empty_memory_always_misses() {
        let mut m = ReplayMemory::new(4);
        for a in 0..4 {
            assert_eq!(m.lookup(a), None);
        }
        assert_eq!(m.stats().misses, 4);
    }

    #[test]
    fn threshold_one_gives_exactly_one_hit() {
        let mut m = ReplayMemory::new(2);
        m.insert(0, 1.25, 1).unwrap();
        assert_eq!(m.lookup(0), Some(1.25));
        assert_eq!(m.lookup(0), None);
    }

    #[test]
    fn reinsert_overwrites() {
        let mut m = ReplayMemory::new(2);
        m.insert(1, 0.5, 2).unwrap();
        m.insert(1, 0.7, 2).unwrap();
        assert_eq!(m.lookup(1), Some(0.7));
    }

    #[test]
    fn zero_threshold_is_an_error() {
        let mut m = ReplayMemory::new(2);
        assert_eq!(m.insert(0, 0.1, 0), Err(ReplayError::BadThreshold(0)));
    }

    #[test]
    fn merge_keeps_larger_remaining() {
        let mut a = ReplayMemory::new(3);
        let mut b = ReplayMemory::new(3);
        a.insert(0, 1.0, 1).unwrap();
        b.insert(0, 2.0, 3).unwrap();
        b.insert(1, 5.0, 1).unwrap();
        a.merge(&b);
        assert_eq!(a.lookup(0), Some(2.0));
        assert_eq!(a.lookup(1), Some(5.0));
    }
}
