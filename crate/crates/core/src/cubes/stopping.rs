use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lattice::{CubeId, CubeLattice};

/// Coherent collection of cubes under a top cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingRegion {
    pub top: CubeId,
    /// Sorted cube ids.
    pub cubes: Vec<CubeId>,
    /// Minimal cubes, sorted: stop cubes plus lattice-bottom cubes.
    pub minimal: Vec<CubeId>,
    /// Minimal cubes that were stopped because a child satisfied the predicate.
    pub stopped: Vec<CubeId>,
}

impl StoppingRegion {
    pub fn contains(&self, q: CubeId) -> bool {
        self.cubes.binary_search(&q).is_ok()
    }

    /// Checks ancestor closure, sibling coherence and disjointness of minimal cubes.
    pub fn check(&self, lattice: &CubeLattice) -> Result<(), String> {
        for &q in &self.cubes {
            if !lattice.contains(self.top, q) {
                return Err(format!("{q} is not below the top"));
            }
            if q != self.top {
                let p = lattice.cube(q).parent.expect("below top");
                if !self.contains(p) {
                    return Err(format!("parent of {q} is missing"));
                }
                let sibs = &lattice.cube(p).children;
                if !sibs.iter().all(|s| self.contains(*s)) {
                    return Err(format!("siblings of {q} are split"));
                }
            }
        }
        for (i, &a) in self.minimal.iter().enumerate() {
            for &b in &self.minimal[i + 1..] {
                if lattice.contains(a, b) || lattice.contains(b, a) {
                    return Err(format!("minimal cubes {a} and {b} overlap"));
                }
            }
            if lattice.cube(a).children.iter().any(|c| self.contains(*c)) {
                return Err(format!("minimal cube {a} has children in the region"));
            }
        }
        Ok(())
    }
}

/// Stopping-time region under `root` whose stop cubes are the maximal cubes
/// having a child on which `stop` holds.
pub fn stopping_region(lattice: &CubeLattice, root: CubeId, mut stop: impl FnMut(CubeId) -> bool) -> StoppingRegion {
    let mut cubes = BTreeSet::new();
    let mut minimal = Vec::new();
    let mut stopped = Vec::new();
    let mut stack = vec![root];
    while let Some(q) = stack.pop() {
        cubes.insert(q);
        let children = &lattice.cube(q).children;
        if children.is_empty() {
            minimal.push(q);
            continue;
        }
        let mut hit = false;
        for &c in children {
            hit |= stop(c);
        }
        if hit {
            minimal.push(q);
            stopped.push(q);
        } else {
            stack.extend(children.iter().rev().copied());
        }
    }
    minimal.sort();
    stopped.sort();
    StoppingRegion { top: root, cubes: cubes.into_iter().collect(), minimal, stopped }
}
