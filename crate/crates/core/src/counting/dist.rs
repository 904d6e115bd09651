// Copyright 2026 The relsvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Multisets of partial scores, and the semiring that combines them.
//!
//! `⊕` is multiset union and `⊗` is the sum-convolution (every pair of
//! scores added, counts multiplied). In sketch mode every convolution is
//! followed by a one-sided compaction: entries only ever move to a lower
//! score, so the count of mass at or above any threshold can only shrink, and
//! it shrinks by at most a factor `1 + ε'` per compaction.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use crate::semiring::CommutativeSemiring;

/// Scores in descending order with their multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreDist {
    entries: Vec<(f64, f64)>,
    /// Number of lossy compactions folded into this distribution.
    charges: u32,
    overflow: bool,
}

impl ScoreDist {
    pub fn empty() -> Self {
        ScoreDist {
            entries: Vec::new(),
            charges: 0,
            overflow: false,
        }
    }

    pub fn point(score: f64) -> Self {
        ScoreDist {
            entries: vec![(score, 1.0)],
            charges: 0,
            overflow: false,
        }
    }

    /// Builds a distribution from arbitrary `(score, count)` pairs.
    pub fn from_scores(scores: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut entries: Vec<(f64, f64)> = scores.into_iter().filter(|e| e.1 > 0.0).collect();
        entries.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(entries.len());
        for (s, c) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == s => last.1 += c,
                _ => merged.push((s, c)),
            }
        }
        ScoreDist {
            entries: merged,
            charges: 0,
            overflow: false,
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn charges(&self) -> u32 {
        self.charges
    }

    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn shifted(mut self, by: f64) -> Self {
        for e in &mut self.entries {
            e.0 += by;
        }
        self
    }

    fn is_one(&self) -> bool {
        !self.overflow && self.charges == 0 && self.entries == [(0.0, 1.0)]
    }

    fn overflowed_dist() -> Self {
        ScoreDist {
            entries: Vec::new(),
            charges: 0,
            overflow: true,
        }
    }

    pub fn tails(&self) -> Tails<'_> {
        let mut cumulative = Vec::with_capacity(self.entries.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for e in &self.entries {
            acc += e.1;
            cumulative.push(acc);
        }
        Tails {
            entries: &self.entries,
            cumulative,
        }
    }
}

/// Prefix sums over a [`ScoreDist`] for threshold queries.
pub struct Tails<'a> {
    entries: &'a [(f64, f64)],
    cumulative: Vec<f64>,
}

impl Tails<'_> {
    /// Mass with score `>= threshold`.
    pub fn at_least(&self, threshold: f64) -> f64 {
        let k = self.entries.partition_point(|e| e.0 >= threshold);
        self.cumulative[k]
    }

    /// Largest score whose tail mass reaches `target`, if any.
    pub fn quantile(&self, target: f64) -> Option<f64> {
        let k = self.cumulative[1..].partition_point(|&c| c < target);
        self.entries.get(k).map(|e| e.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistMode {
    /// No compaction; more than `cap` distinct scores is an overflow.
    Exact { cap: usize },
    /// One-sided compaction with per-compaction accuracy `step`.
    Sketch { step: f64 },
}

#[derive(Debug)]
pub struct DistSemiring {
    mode: DistMode,
    peak: AtomicUsize,
}

impl DistSemiring {
    pub fn new(mode: DistMode) -> Self {
        DistSemiring {
            mode,
            peak: AtomicUsize::new(0),
        }
    }

    pub fn mode(&self) -> DistMode {
        self.mode
    }

    /// Largest distribution produced so far.
    pub fn peak_size(&self) -> usize {
        self.peak.load(AtomicOrdering::Relaxed)
    }

    fn record(&self, d: ScoreDist) -> ScoreDist {
        self.peak.fetch_max(d.len(), AtomicOrdering::Relaxed);
        d
    }

    fn check_cap(&self, d: ScoreDist) -> ScoreDist {
        match self.mode {
            DistMode::Exact { cap } if d.len() > cap => ScoreDist::overflowed_dist(),
            _ => self.record(d),
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
            .then_with(|| other.2.cmp(&self.2))
    }
}

/// Greedy one-sided bucketing over a descending stream of distinct scores.
///
/// A bucket covering entries `a..=b` is emitted at score `s_b` with their
/// summed count. It may only grow while the mass strictly above its last
/// entry stays within `(1 + step)` of the mass above its first entry, which
/// bounds the undercount of every tail query by that factor.
struct Compactor {
    step: f64,
    out: Vec<(f64, f64)>,
    before: f64,
    bucket: Option<(f64, f64)>,
    merged: bool,
}

impl Compactor {
    fn new(step: f64, capacity: usize) -> Self {
        Compactor {
            step,
            out: Vec::with_capacity(capacity),
            before: 0.0,
            bucket: None,
            merged: false,
        }
    }

    fn push(&mut self, score: f64, count: f64) {
        match self.bucket {
            None => self.bucket = Some((score, count)),
            Some((_, bc)) if self.before + bc <= (1.0 + self.step) * self.before => {
                self.bucket = Some((score, bc + count));
                self.merged = true;
            }
            Some((bs, bc)) => {
                self.out.push((bs, bc));
                self.before += bc;
                self.bucket = Some((score, count));
            }
        }
    }

    fn finish(mut self) -> (Vec<(f64, f64)>, bool) {
        if let Some(b) = self.bucket.take() {
            self.out.push(b);
        }
        (self.out, self.merged)
    }
}

/// One-sided compaction of an existing distribution.
pub fn compact(d: &ScoreDist, step: f64) -> ScoreDist {
    let mut c = Compactor::new(step, d.len());
    for &(s, n) in &d.entries {
        c.push(s, n);
    }
    let (entries, merged) = c.finish();
    ScoreDist {
        entries,
        charges: d.charges + u32::from(merged),
        overflow: d.overflow,
    }
}

enum Sink {
    Exact { out: Vec<(f64, f64)>, cap: usize },
    Sketch(Compactor),
}

impl CommutativeSemiring for DistSemiring {
    type Elem = ScoreDist;

    fn zero(&self) -> ScoreDist {
        ScoreDist::empty()
    }

    fn one(&self) -> ScoreDist {
        ScoreDist::point(0.0)
    }

    fn add(&self, a: &ScoreDist, b: &ScoreDist) -> ScoreDist {
        if a.overflow || b.overflow {
            return ScoreDist::overflowed_dist();
        }
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.entries.get(i), b.entries.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    i += 1;
                    j += 1;
                    (x.0, x.1 + y.1)
                }
                (Some(x), Some(y)) if x.0 > y.0 => {
                    i += 1;
                    *x
                }
                (Some(_), Some(y)) => {
                    j += 1;
                    *y
                }
                (Some(x), None) => {
                    i += 1;
                    *x
                }
                (None, Some(y)) => {
                    j += 1;
                    *y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        self.check_cap(ScoreDist {
            entries: out,
            charges: a.charges.max(b.charges),
            overflow: false,
        })
    }

    fn mul(&self, a: &ScoreDist, b: &ScoreDist) -> ScoreDist {
        if a.overflow || b.overflow {
            return ScoreDist::overflowed_dist();
        }
        if a.is_one() {
            return b.clone();
        }
        if b.is_one() {
            return a.clone();
        }
        if a.is_empty() || b.is_empty() {
            return ScoreDist::empty();
        }
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };

        let mut sink = match self.mode {
            DistMode::Exact { cap } => Sink::Exact { out: Vec::new(), cap },
            DistMode::Sketch { step } => Sink::Sketch(Compactor::new(step, small.len() + large.len())),
        };

        // k-way merge of the rows small[i] + large[..], each already descending.
        let mut heap: BinaryHeap<HeapItem> = small
            .entries
            .iter()
            .enumerate()
            .map(|(i, x)| HeapItem(x.0 + large.entries[0].0, i, 0))
            .collect();
        let mut pending: Option<(f64, f64)> = None;
        let emit = |s: f64, c: f64, sink: &mut Sink| -> bool {
            match sink {
                Sink::Exact { out, cap } => {
                    out.push((s, c));
                    out.len() <= *cap
                }
                Sink::Sketch(comp) => {
                    comp.push(s, c);
                    true
                }
            }
        };
        while let Some(HeapItem(s, i, j)) = heap.pop() {
            let c = small.entries[i].1 * large.entries[j].1;
            if j + 1 < large.len() {
                heap.push(HeapItem(small.entries[i].0 + large.entries[j + 1].0, i, j + 1));
            }
            match pending {
                Some((ps, pc)) if ps == s => pending = Some((ps, pc + c)),
                Some((ps, pc)) => {
                    if !emit(ps, pc, &mut sink) {
                        return ScoreDist::overflowed_dist();
                    }
                    pending = Some((s, c));
                }
                None => pending = Some((s, c)),
            }
        }
        if let Some((ps, pc)) = pending {
            if !emit(ps, pc, &mut sink) {
                return ScoreDist::overflowed_dist();
            }
        }

        let charges = a.charges + b.charges;
        let dist = match sink {
            Sink::Exact { out, .. } => ScoreDist {
                entries: out,
                charges,
                overflow: false,
            },
            Sink::Sketch(comp) => {
                let (entries, merged) = comp.finish();
                ScoreDist {
                    entries,
                    charges: charges + u32::from(merged),
                    overflow: false,
                }
            }
        };
        self.record(dist)
    }

    fn is_zero(&self, a: &ScoreDist) -> bool {
        a.entries.is_empty() && !a.overflow
    }
}
