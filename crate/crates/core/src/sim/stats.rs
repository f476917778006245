use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// What a run cost: time, bandwidth and traffic.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    /// Index of the last round in which anything was transmitted.
    pub rounds: u64,
    pub max_bits_per_edge_round: u32,
    pub total_messages: u64,
    /// Rounds per labeled phase; sums to `rounds` when every part was recorded.
    pub phases: BTreeMap<String, u64>,
}

impl RoundStats {
    /// Sequential composition: `other` ran after everything in `self`.
    pub fn absorb(&mut self, other: &RoundStats) {
        self.rounds += other.rounds;
        self.max_bits_per_edge_round = self.max_bits_per_edge_round.max(other.max_bits_per_edge_round);
        self.total_messages += other.total_messages;
        for (k, v) in &other.phases {
            *self.phases.entry(k.clone()).or_default() += v;
        }
    }

    /// Like [`absorb`](Self::absorb), filing `other` under `label`.
    /// Sub-phases of `other` are kept as `label/sub`.
    pub fn record(&mut self, label: &str, other: &RoundStats) {
        self.rounds += other.rounds;
        self.max_bits_per_edge_round = self.max_bits_per_edge_round.max(other.max_bits_per_edge_round);
        self.total_messages += other.total_messages;
        if other.phases.is_empty() {
            *self.phases.entry(label.to_string()).or_default() += other.rounds;
        } else {
            for (k, v) in &other.phases {
                *self.phases.entry(format!("{label}/{k}")).or_default() += v;
            }
        }
    }

    pub fn phase(&self, label: &str) -> u64 {
        self.phases.get(label).copied().unwrap_or(0)
    }

    /// Total rounds of every phase whose label starts with `prefix`.
    pub fn phase_prefix(&self, prefix: &str) -> u64 {
        self.phases.iter().filter(|(k, _)| k.starts_with(prefix)).map(|(_, v)| v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_nests_labels() {
        let mut inner = RoundStats { rounds: 3, max_bits_per_edge_round: 5, total_messages: 7, ..Default::default() };
        let mut outer = RoundStats::default();
        outer.record("a", &inner);
        inner.rounds = 2;
        outer.record("b", &inner);
        let mut top = RoundStats::default();
        top.record("x", &outer);
        assert_eq!(top.rounds, 5);
        assert_eq!(top.phase("x/a"), 3);
        assert_eq!(top.phase("x/b"), 2);
        assert_eq!(top.phase_prefix("x/"), 5);
        assert_eq!(top.total_messages, 14);
    }
}
