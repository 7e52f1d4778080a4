//! Offspring laws compiled for sampling.

use crate::model::ModelSpec;
use crate::sim::alias::AliasTable;

/// Per-type sampling tables shared by every simulation engine. Immutable
/// after construction, safe to share across worker threads.
///
/// Offspring lists live in one flat byte buffer per type, addressed by packed
/// (offset, length) words, so sampling one event costs an alias draw plus two
/// contiguous loads.
#[derive(Debug, Clone)]
pub struct SimModel {
    n_types: usize,
    tables: Vec<AliasTable>,
    /// spans[ty][entry] = offset << 8 | len into `kids[ty]`.
    spans: Vec<Vec<u32>>,
    /// Flat 0-based child types per parent type.
    kids: Vec<Vec<u8>>,
    /// Support in count form, sorted by descending probability so that
    /// sequential multinomial splitting exhausts the population early.
    counts: Vec<Vec<(Vec<u32>, f64)>>,
}

impl SimModel {
    pub fn new(spec: &ModelSpec) -> Self {
        let n_types = spec.n_types();
        let mut tables = Vec::with_capacity(n_types);
        let mut spans = Vec::with_capacity(n_types);
        let mut kids = Vec::with_capacity(n_types);
        let mut counts = Vec::with_capacity(n_types);
        for law in spec.laws() {
            let weights: Vec<f64> = law.support().iter().map(|(_, p)| *p).collect();
            tables.push(AliasTable::new(&weights));
            let mut flat: Vec<u8> = Vec::new();
            let mut entry_spans = Vec::with_capacity(law.support().len());
            for (vec, _) in law.support() {
                let start = flat.len() as u32;
                for (ty, &cnt) in vec.iter().enumerate() {
                    for _ in 0..cnt {
                        flat.push(ty as u8);
                    }
                }
                let len = flat.len() as u32 - start;
                assert!(len < 256, "offspring event too large for span encoding");
                entry_spans.push((start << 8) | len);
            }
            spans.push(entry_spans);
            kids.push(flat);
            let mut by_prob: Vec<(Vec<u32>, f64)> = law.support().to_vec();
            by_prob.sort_by(|a, b| b.1.total_cmp(&a.1));
            counts.push(by_prob);
        }
        Self {
            n_types,
            tables,
            spans,
            kids,
            counts,
        }
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    #[inline(always)]
    pub fn table(&self, ty: usize) -> &AliasTable {
        &self.tables[ty]
    }

    #[inline(always)]
    pub fn offspring(&self, ty: usize, entry: usize) -> &[u8] {
        let span = self.spans[ty][entry];
        let start = (span >> 8) as usize;
        let len = (span & 0xFF) as usize;
        &self.kids[ty][start..start + len]
    }

    pub fn count_support(&self, ty: usize) -> &[(Vec<u32>, f64)] {
        &self.counts[ty]
    }
}
