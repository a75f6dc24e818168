//! Consciousnesses: per-slice connected components of qualia under the
//! "within `K` cells" relation.

use std::collections::{BTreeMap, HashMap};

use crate::exec::Execution;
use crate::lattice::{chebyshev, MAX_DIMS};
use crate::qualia::{QualiaDistribution, Quale};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consciousness {
    pub id: usize,
    pub t: usize,
    /// Sorted by point.
    pub members: Vec<Quale>,
}

impl Consciousness {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Components of one slice's qualia, each sorted, ordered by first member.
fn slice_components(qualia: &[Quale], radius: usize) -> Vec<Vec<Quale>> {
    let mut uf = UnionFind::new(qualia.len());
    let bucket = |q: &Quale| q.point.cell.map(|c| c / radius);
    let mut buckets: HashMap<[usize; MAX_DIMS], Vec<usize>> = HashMap::new();
    for (i, q) in qualia.iter().enumerate() {
        buckets.entry(bucket(q)).or_default().push(i);
    }
    // Cells within `radius` lie in the same or an adjacent bucket.
    for (i, q) in qualia.iter().enumerate() {
        let home = bucket(q);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let key = [home[0] as i64 + dx, home[1] as i64 + dy, home[2] as i64 + dz];
                    if key.iter().any(|&k| k < 0) {
                        continue;
                    }
                    let Some(others) = buckets.get(&key.map(|k| k as usize)) else { continue };
                    for &j in others {
                        if j > i && chebyshev(&q.point.cell, &qualia[j].point.cell) <= radius {
                            uf.union(i, j);
                        }
                    }
                }
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<Quale>> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, q) in qualia.iter().enumerate() {
        let root = uf.find(i);
        let members = by_root.entry(root).or_default();
        if members.is_empty() {
            order.push(root);
        }
        members.push(*q);
    }
    // `qualia` is sorted, so first-seen order is order by minimal member.
    order.into_iter().map(|r| by_root.remove(&r).unwrap()).collect()
}

/// Groups qualia into consciousnesses slice by slice. Ids run in order of
/// each component's minimal member point (time first).
pub fn group(d: &QualiaDistribution, radius: usize, exec: Execution) -> Vec<Consciousness> {
    let qualia = d.qualia();
    let mut slices: Vec<&[Quale]> = Vec::new();
    let mut start = 0;
    for i in 1..=qualia.len() {
        if i == qualia.len() || qualia[i].point.t != qualia[start].point.t {
            slices.push(&qualia[start..i]);
            start = i;
        }
    }
    let per_slice = exec.map_slice(&slices, |s| slice_components(s, radius.max(1)));
    per_slice
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(id, members)| Consciousness { id, t: members[0].point.t, members })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConsciousnessStats {
    pub count: usize,
    /// Component size -> number of components of that size.
    pub size_histogram: BTreeMap<usize, usize>,
    /// Qualia per type summed over all components.
    pub per_type: Vec<usize>,
    pub total_qualia: usize,
}

pub fn consciousness_stats(components: &[Consciousness], type_count: usize) -> ConsciousnessStats {
    let mut stats = ConsciousnessStats { per_type: vec![0; type_count], ..Default::default() };
    for c in components {
        stats.count += 1;
        *stats.size_histogram.entry(c.size()).or_default() += 1;
        stats.total_qualia += c.size();
        for q in &c.members {
            stats.per_type[q.kind] += 1;
        }
    }
    stats
}
