//! Disjoint sets, plain and with integer offsets along the torus cover.

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

/// Union-find over cells of a periodic lattice that tracks, for every
/// element, its displacement (in periods) from the root in the universal
/// cover. Closing a loop with a nonzero displacement marks the set as
/// wrapping around the torus.
#[derive(Debug, Clone)]
pub struct OffsetUnionFind {
    parent: Vec<u32>,
    offset: Vec<[i32; 2]>,
    size: Vec<u32>,
    wraps: Vec<bool>,
}

impl OffsetUnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            offset: vec![[0, 0]; n],
            size: vec![1; n],
            wraps: vec![false; n],
        }
    }

    /// Root and displacement of `x` relative to it.
    pub fn find(&mut self, x: usize) -> (usize, [i32; 2]) {
        let mut r = x;
        let mut total = [0, 0];
        while self.parent[r] as usize != r {
            total[0] += self.offset[r][0];
            total[1] += self.offset[r][1];
            r = self.parent[r] as usize;
        }
        // second pass: point the path at the root, offsets relative to it
        let mut y = x;
        let mut rest = total;
        while y != r && self.parent[y] as usize != r {
            let next = self.parent[y] as usize;
            let old = self.offset[y];
            self.parent[y] = r as u32;
            self.offset[y] = rest;
            rest = [rest[0] - old[0], rest[1] - old[1]];
            y = next;
        }
        (r, total)
    }

    /// Record that `b` sits at displacement `d` from `a`.
    pub fn union(&mut self, a: usize, b: usize, d: [i32; 2]) {
        let (ra, oa) = self.find(a);
        let (rb, ob) = self.find(b);
        if ra == rb {
            if [ob[0] - oa[0], ob[1] - oa[1]] != d {
                self.wraps[ra] = true;
            }
            return;
        }
        // displacement of rb from ra
        let mut delta = [oa[0] + d[0] - ob[0], oa[1] + d[1] - ob[1]];
        let (mut ra, mut rb) = (ra, rb);
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
            delta = [-delta[0], -delta[1]];
        }
        self.parent[rb] = ra as u32;
        self.offset[rb] = delta;
        self.size[ra] += self.size[rb];
        self.wraps[ra] = self.wraps[ra] || self.wraps[rb];
    }

    pub fn wraps(&mut self, x: usize) -> bool {
        let (r, _) = self.find(x);
        self.wraps[r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_sets() {
        let mut uf = UnionFind::new(6);
        uf.union(0, 1);
        uf.union(3, 4);
        uf.union(1, 4);
        assert_eq!(uf.find(0), uf.find(3));
        assert_ne!(uf.find(2), uf.find(0));
        assert_eq!(uf.set_size(4), 4);
    }

    #[test]
    fn loop_around_the_torus_is_detected() {
        // ring of 4 cells along x; the last link crosses the seam
        let mut uf = OffsetUnionFind::new(4);
        uf.union(0, 1, [0, 0]);
        uf.union(1, 2, [0, 0]);
        uf.union(2, 3, [0, 0]);
        assert!(!uf.wraps(0));
        uf.union(3, 0, [1, 0]);
        assert!(uf.wraps(2));
        // contractible loop
        let mut uf = OffsetUnionFind::new(3);
        uf.union(0, 1, [1, 0]);
        uf.union(1, 2, [0, 1]);
        uf.union(2, 0, [-1, -1]);
        assert!(!uf.wraps(0));
    }
}
