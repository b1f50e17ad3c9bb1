use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

/// Total order on f64 priorities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Key(pub f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Priority pair of a node plus its insertion number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priority {
    pub f_p: f64,
    pub f_s: f64,
    pub seq: u64,
}

/// Orders by `f_p` when the two differ by more than `delta`, otherwise by
/// `f_s`, then first in first out.
pub fn compare(a: &Priority, b: &Priority, delta: f64) -> Ordering {
    if (a.f_p - b.f_p).abs() > delta {
        return a.f_p.total_cmp(&b.f_p);
    }
    a.f_s.total_cmp(&b.f_s).then(a.seq.cmp(&b.seq))
}

type Bucket = BinaryHeap<Reverse<(Key, u64, u32)>>;

/// Buckets keyed by `f_p`, each a heap on `(f_s, seq)`.
///
/// Extraction looks at every bucket within `delta` of the smallest `f_p` and
/// takes the entry with the smallest `f_s` among them.
#[derive(Debug, Default)]
pub struct OpenList {
    buckets: BTreeMap<Key, Bucket>,
    delta: f64,
    len: usize,
    seq: u64,
}

impl OpenList {
    pub fn new(delta: u32) -> Self {
        OpenList { delta: f64::from(delta), ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, node: u32, f_p: f64, f_s: f64) -> Priority {
        let seq = self.seq;
        self.seq += 1;
        self.buckets.entry(Key(f_p)).or_default().push(Reverse((Key(f_s), seq, node)));
        self.len += 1;
        Priority { f_p, f_s, seq }
    }

    /// Smallest `f_p` currently stored.
    pub fn min_f_p(&self) -> Option<f64> {
        self.buckets.keys().next().map(|k| k.0)
    }

    pub fn pop(&mut self) -> Option<(u32, Priority)> {
        let lo = self.min_f_p()?;
        let mut best: Option<Priority> = None;
        for (k, heap) in self.buckets.range(..=Key(lo + self.delta)) {
            let Reverse((f_s, seq, _)) = *heap.peek().expect("buckets are never empty");
            let p = Priority { f_p: k.0, f_s: f_s.0, seq };
            if best.as_ref().is_none_or(|b| (p.f_s, p.seq) < (b.f_s, b.seq)) {
                best = Some(p);
            }
        }
        let p = best?;
        let heap = self.buckets.get_mut(&Key(p.f_p)).expect("bucket exists");
        let Reverse((_, _, node)) = heap.pop().expect("bucket is non-empty");
        if heap.is_empty() {
            self.buckets.remove(&Key(p.f_p));
        }
        self.len -= 1;
        Some((node, p))
    }
}
