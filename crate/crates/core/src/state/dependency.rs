use super::{GroundedOperator, OpId};

fn sorted_intersect<T: Ord>(a: &[T], b: &[T]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn touches(pre: &[u32], neg: &[u32], other: &GroundedOperator) -> bool {
    sorted_intersect(pre, &other.add)
        || sorted_intersect(pre, &other.del)
        || sorted_intersect(neg, &other.add)
        || sorted_intersect(neg, &other.del)
}

/// Propositional, direct numerical or indirect numerical conflict.
/// Negative preconditions count as part of α.
pub fn dependent(a: &GroundedOperator, b: &GroundedOperator) -> bool {
    touches(&a.pre, &a.pre_neg, b)
        || touches(&b.pre, &b.pre_neg, a)
        || sorted_intersect(&a.writes, &b.cond_reads)
        || sorted_intersect(&b.writes, &a.cond_reads)
        || sorted_intersect(&a.writes, &b.eff_reads)
        || sorted_intersect(&b.writes, &a.eff_reads)
}

/// Symmetric |O|×|O| bit matrix. Every operator depends on itself.
#[derive(Debug, Clone)]
pub struct DependencyTable {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl DependencyTable {
    pub fn build(ops: &[GroundedOperator]) -> Self {
        let n = ops.len();
        let stride = n.div_ceil(64).max(1);
        let mut t = DependencyTable { n, stride, bits: vec![0; n * stride] };
        for i in 0..n {
            t.set(i, i);
            for j in i + 1..n {
                if dependent(&ops[i], &ops[j]) {
                    t.set(i, j);
                    t.set(j, i);
                }
            }
        }
        t
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.stride + (j >> 6)] |= 1 << (j & 63);
    }

    #[inline]
    pub fn get(&self, i: OpId, j: OpId) -> bool {
        let (i, j) = (i as usize, j as usize);
        self.bits[i * self.stride + (j >> 6)] >> (j & 63) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}
