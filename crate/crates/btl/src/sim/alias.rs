//! Walker-Vose alias tables for O(1) discrete sampling.
//!
//! Sampling consumes one 64-bit word: the high 32 bits pick a slot, the low
//! 32 bits decide between the slot and its alias. Each slot packs threshold
//! and alias index into one u64 so a draw touches a single cache line.
//! Threshold resolution is 2^-32 per slot, orders of magnitude below any
//! statistical tolerance used by the verification harness.

#[derive(Debug, Clone)]
pub struct AliasTable {
    /// threshold << 32 | alias index.
    slots: Vec<u64>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Self {
        assert!(!weights.is_empty());
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0 && weights.iter().all(|&w| w >= 0.0));
        let k = weights.len();
        let mut residue: Vec<f64> = weights.iter().map(|w| w / total * k as f64).collect();

        let mut threshold = vec![0u32; k];
        let mut alias: Vec<u32> = (0..k as u32).collect();
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &p) in residue.iter().enumerate() {
            if p < 1.0 {
                small.push(i)
            } else {
                large.push(i)
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            threshold[s] = (residue[s].min(1.0) * 4294967296.0) as u32;
            alias[s] = l as u32;
            residue[l] -= 1.0 - residue[s];
            if residue[l] < 1.0 {
                small.push(l)
            } else {
                large.push(l)
            }
        }
        for i in small.into_iter().chain(large) {
            threshold[i] = u32::MAX;
            alias[i] = i as u32;
        }
        let slots = threshold
            .into_iter()
            .zip(alias)
            .map(|(t, a)| (u64::from(t) << 32) | u64::from(a))
            .collect();
        Self { slots }
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Map one uniform 64-bit word to an outcome index.
    #[inline(always)]
    pub fn sample(&self, word: u64) -> usize {
        let k = self.slots.len() as u64;
        let slot_idx = (((word >> 32) * k) >> 32) as usize;
        let slot = self.slots[slot_idx];
        if (word as u32 as u64) < (slot >> 32) {
            slot_idx
        } else {
            (slot & 0xFFFF_FFFF) as usize
        }
    }
}
