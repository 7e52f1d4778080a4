//! Streaming genealogy simulation for ancestor statistics at long horizons.
//!
//! The full engine keeps every particle ever born; conditioned populations
//! reach Theta(n) particles, so at horizons in the thousands that is hundreds
//! of megabytes per run. This engine keeps only the current generation plus a
//! pruned arena of ancestor-chain segments. A segment is a maximal run of
//! same-type ancestors each continued by a single line; the overwhelmingly
//! common event (one same-type child) extends the live segment's depth range
//! in place, so no allocation happens on the hot path, and a dying subtree
//! releases whole segments rather than individual particles. At the horizon
//! the live segments are exactly the family tree of the survivors: reduced
//! level counts come from a difference array over segment ranges, and the
//! ancestor birth level and type from the segment covering the last
//! single-width level.

use rand::RngCore;

use crate::sim::compiled::SimModel;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Segment {
    parent: u32,
    /// Live continuations of the segment's last particle: child segments
    /// plus currently-living direct children.
    refs: u32,
    /// Depth range [start, end) of the covered ancestors.
    start: u32,
    end: u32,
    ty: u8,
}

/// A living particle: segment of its ancestry in the high bits, own type in
/// the low byte.
#[inline(always)]
fn pack(segment: u32, ty: u8) -> u64 {
    (u64::from(segment) << 8) | u64::from(ty)
}

/// Reusable buffers; one per worker thread.
pub struct StreamScratch {
    live: Vec<u64>,
    next: Vec<u64>,
    segments: Vec<Segment>,
    free: Vec<u32>,
    depth_diff: Vec<i32>,
}

impl StreamScratch {
    pub fn new() -> Self {
        Self {
            live: Vec::new(),
            next: Vec::new(),
            segments: Vec::new(),
            free: Vec::new(),
            depth_diff: Vec::new(),
        }
    }
}

impl Default for StreamScratch {
    fn default() -> Self {
        Self::new()
    }
}

/// Summary of one streamed run.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutcome {
    pub survived: bool,
    pub overflow: bool,
    /// Birth generation of the most recent common ancestor (survivors only,
    /// and only when some level of the family tree is a single particle).
    pub beta: Option<u64>,
    /// 1-based type of that ancestor.
    pub zeta: Option<usize>,
    /// Population counts per type at the horizon.
    pub final_counts: Vec<u64>,
}

#[inline(always)]
fn release(segments: &mut [Segment], free: &mut Vec<u32>, mut id: u32) {
    while id != NIL {
        let seg = &mut segments[id as usize];
        seg.refs -= 1;
        if seg.refs > 0 {
            break;
        }
        free.push(id);
        id = seg.parent;
    }
}

/// Simulate one run to `horizon` (>= 1) starting from `initial` counts.
/// `population_cap` bounds the living population per generation.
pub fn run_stream(
    model: &SimModel,
    horizon: u64,
    initial: &[u32],
    rng: &mut impl RngCore,
    scratch: &mut StreamScratch,
    population_cap: u64,
) -> StreamOutcome {
    assert!(horizon >= 1);
    let n_types = model.n_types();
    assert_eq!(initial.len(), n_types);
    let s = scratch;
    s.live.clear();
    s.segments.clear();
    s.free.clear();
    for (ty, &cnt) in initial.iter().enumerate() {
        for _ in 0..cnt {
            s.live.push(pack(NIL, ty as u8));
        }
    }

    let dead = |survived: bool, overflow: bool| StreamOutcome {
        survived,
        overflow,
        beta: None,
        zeta: None,
        final_counts: vec![0; n_types],
    };

    for depth in 0..horizon {
        if s.live.is_empty() {
            return dead(false, false);
        }
        if s.live.len() as u64 > population_cap {
            return dead(false, true);
        }
        s.next.clear();
        for p in 0..s.live.len() {
            let packed = s.live[p];
            let ty = (packed & 0xFF) as u8;
            let seg_id = (packed >> 8) as u32;
            let entry = model.table(ty as usize).sample(rng.next_u64());
            let kids = model.offspring(ty as usize, entry);
            if kids.is_empty() {
                if seg_id != NIL {
                    release(&mut s.segments, &mut s.free, seg_id);
                }
                continue;
            }
            // Absorb this particle into its ancestor segment when it is the
            // sole same-type continuation; otherwise open a fresh segment.
            let my_seg = if seg_id != NIL {
                let seg = &mut s.segments[seg_id as usize];
                if seg.refs == 1 && seg.ty == ty {
                    seg.end += 1;
                    seg.refs = kids.len() as u32;
                    seg_id
                } else {
                    NIL
                }
            } else {
                NIL
            };
            let my_seg = if my_seg == NIL {
                let seg = Segment {
                    parent: seg_id,
                    refs: kids.len() as u32,
                    start: depth as u32,
                    end: depth as u32 + 1,
                    ty,
                };
                if let Some(id) = s.free.pop() {
                    s.segments[id as usize] = seg;
                    id
                } else {
                    s.segments.push(seg);
                    (s.segments.len() - 1) as u32
                }
            } else {
                my_seg
            };
            let base = pack(my_seg, 0);
            for &k in kids {
                s.next.push(base | u64::from(k));
            }
        }
        std::mem::swap(&mut s.live, &mut s.next);
    }
    if s.live.is_empty() {
        return dead(false, false);
    }

    let mut final_counts = vec![0u64; n_types];
    for &packed in &s.live {
        final_counts[(packed & 0xFF) as usize] += 1;
    }

    // Live segments are exactly the family tree of the survivors: the
    // reduced count at level m is the number of segments covering m.
    s.depth_diff.clear();
    s.depth_diff.resize(horizon as usize + 1, 0);
    for seg in &s.segments {
        if seg.refs > 0 {
            s.depth_diff[seg.start as usize] += 1;
            s.depth_diff[seg.end as usize] -= 1;
        }
    }
    let mut beta: Option<u64> = None;
    let mut width = 0i32;
    let mut prev_width = 0i32;
    for m in 0..horizon as usize {
        width += s.depth_diff[m];
        assert!(width > 0, "family tree has a gap at level {m}");
        assert!(width >= prev_width, "family tree narrows at level {m}");
        prev_width = width;
        if width == 1 {
            beta = Some(m as u64);
        }
    }
    assert!(width as u64 <= s.live.len() as u64);

    let zeta = beta.map(|b| {
        s.segments
            .iter()
            .find(|seg| seg.refs > 0 && u64::from(seg.start) <= b && b < u64::from(seg.end))
            .map(|seg| seg.ty as usize + 1)
            .expect("ancestor level lies in a live segment")
    });

    StreamOutcome {
        survived: true,
        overflow: false,
        beta,
        zeta,
        final_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::models;
    use crate::sim::driver::RngPolicy;
    use crate::sim::full::simulate_forward;

    #[test]
    fn agrees_with_full_engine_run_by_run() {
        // Same model, same per-attempt stream: the per-particle sampling
        // order is identical in both engines, so survived/beta/zeta must
        // match exactly.
        let model_v = models::linear_fractional_n2();
        let model = SimModel::new(model_v.spec());
        let policy = RngPolicy::new(4242);
        let mut scratch = StreamScratch::new();
        let mut compared = 0;
        for k in 0..400u64 {
            let full = simulate_forward(&model, 32, &[1, 0], &mut policy.stream(k), 10_000_000);
            let streamed = run_stream(&model, 32, &[1, 0], &mut policy.stream(k), &mut scratch, 10_000_000);
            assert_eq!(full.survived, streamed.survived, "attempt {k}");
            if full.survived {
                compared += 1;
                assert_eq!(full.beta, streamed.beta, "attempt {k}");
                assert_eq!(full.zeta, streamed.zeta, "attempt {k}");
                let full_counts: Vec<u64> = full
                    .counts_at(32)
                    .iter()
                    .map(|&c| u64::from(c))
                    .collect();
                assert_eq!(full_counts, streamed.final_counts, "attempt {k}");
            }
        }
        assert!(compared > 10, "only {compared} surviving runs compared");
    }

    #[test]
    fn agrees_with_full_engine_three_types() {
        let model_v = models::all_ones_n3();
        let model = SimModel::new(model_v.spec());
        let policy = RngPolicy::new(99);
        let mut scratch = StreamScratch::new();
        let mut compared = 0;
        for k in 0..300u64 {
            let full = simulate_forward(&model, 16, &[1, 0, 0], &mut policy.stream(k), 10_000_000);
            let streamed =
                run_stream(&model, 16, &[1, 0, 0], &mut policy.stream(k), &mut scratch, 10_000_000);
            assert_eq!(full.survived, streamed.survived, "attempt {k}");
            if full.survived {
                compared += 1;
                assert_eq!(full.beta, streamed.beta, "attempt {k}");
                assert_eq!(full.zeta, streamed.zeta, "attempt {k}");
            }
        }
        assert!(compared > 10, "only {compared} surviving runs compared");
    }

    #[test]
    fn deterministic_line_statistics() {
        let l1 = models::product_law(1, 2, &[(1, 1.0)], &[]);
        let l2 = models::product_law(2, 2, &[(1, 1.0)], &[]);
        let spec = ModelSpec::new(2, vec![l1, l2], "line").unwrap();
        let model = SimModel::new(&spec);
        let mut scratch = StreamScratch::new();
        let mut rng = RngPolicy::new(0).stream(0);
        let out = run_stream(&model, 12, &[1, 0], &mut rng, &mut scratch, 1000);
        assert!(out.survived);
        assert_eq!(out.beta, Some(11));
        assert_eq!(out.zeta, Some(1));
        assert_eq!(out.final_counts, vec![1, 0]);
    }

    #[test]
    fn overflow_flagged() {
        let l1 = models::product_law(1, 2, &[(2, 1.0)], &[]);
        let l2 = models::product_law(2, 2, &[(1, 1.0)], &[]);
        let spec = ModelSpec::new(2, vec![l1, l2], "boom").unwrap();
        let model = SimModel::new(&spec);
        let mut scratch = StreamScratch::new();
        let mut rng = RngPolicy::new(1).stream(0);
        let out = run_stream(&model, 64, &[1, 0], &mut rng, &mut scratch, 100);
        assert!(out.overflow);
        assert!(!out.survived);
    }

    #[test]
    fn scratch_reuse_is_clean() {
        let model_v = models::linear_fractional_n2();
        let model = SimModel::new(model_v.spec());
        let policy = RngPolicy::new(5);
        let mut scratch = StreamScratch::new();
        let a = run_stream(&model, 16, &[1, 0], &mut policy.stream(9), &mut scratch, 1_000_000);
        for k in 0..50u64 {
            run_stream(&model, 16, &[1, 0], &mut policy.stream(k), &mut scratch, 1_000_000);
        }
        let b = run_stream(&model, 16, &[1, 0], &mut policy.stream(9), &mut scratch, 1_000_000);
        assert_eq!(a, b);
    }
}
