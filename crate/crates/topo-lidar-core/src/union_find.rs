//! Union-find with elder-rule bookkeeping.
//!
//! Each component tracks the birth value and the elder vertex (the vertex
//! with lexicographically smallest `(birth, index)`) of its oldest member.
//! On a merge the younger component dies; ties on birth are broken toward the
//! component with the smaller elder vertex, which keeps the bookkeeping
//! canonical regardless of how ranks shuffle the parent structure.

pub(crate) struct ElderUnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
    /// Valid at roots: birth of the component's oldest member.
    birth: Vec<f64>,
    /// Valid at roots: vertex with the smallest `(birth, index)`.
    elder: Vec<u32>,
    components: usize,
}

impl ElderUnionFind {
    pub(crate) fn new_uniform(n: usize, birth: f64) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            birth: vec![birth; n],
            elder: (0..n as u32).collect(),
            components: n,
        }
    }

    pub(crate) fn new_with_births(births: &[f64]) -> Self {
        let n = births.len();
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            birth: births.to_vec(),
            elder: (0..n as u32).collect(),
            components: n,
        }
    }

    pub(crate) fn find(&mut self, mut v: u32) -> u32 {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[v as usize] != v {
            let next = self.parent[v as usize];
            self.parent[v as usize] = root;
            v = next;
        }
        root
    }

    /// Merges the components containing `u` and `v`. Returns the birth of the
    /// dying (younger) component, or `None` if they were already joined.
    pub(crate) fn union_elder(&mut self, u: u32, v: u32) -> Option<f64> {
        let ru = self.find(u);
        let rv = self.find(v);
        if ru == rv {
            return None;
        }
        let key = |s: &Self, r: u32| (s.birth[r as usize], s.elder[r as usize]);
        let (ku, kv) = (key(self, ru), key(self, rv));
        let (survivor, dying) = if ku.0.total_cmp(&kv.0).then(ku.1.cmp(&kv.1)).is_le() {
            (ru, rv)
        } else {
            (rv, ru)
        };
        let dying_birth = self.birth[dying as usize];
        let (sb, se) = key(self, survivor);

        // Union by rank; the new root inherits the survivor's identity.
        let (mut a, mut b) = (ru, rv);
        if self.rank[a as usize] < self.rank[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        if self.rank[a as usize] == self.rank[b as usize] {
            self.rank[a as usize] += 1;
        }
        self.birth[a as usize] = sb;
        self.elder[a as usize] = se;
        self.components -= 1;
        Some(dying_birth)
    }

    pub(crate) fn components(&self) -> usize {
        self.components
    }

    /// Births of the surviving components, ordered by their elder vertex.
    pub(crate) fn component_births(&mut self) -> Vec<f64> {
        let n = self.parent.len();
        let mut seen = vec![false; n];
        let mut births = Vec::with_capacity(self.components);
        for v in 0..n as u32 {
            let r = self.find(v);
            if !seen[r as usize] {
                seen[r as usize] = true;
                births.push(self.birth[r as usize]);
            }
        }
        births
    }
}
