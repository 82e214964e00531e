//! Red (quadrisection) and red-green refinement.
//!
//! Red refinement splits a triangle into four similar children by joining
//! edge midpoints. Green closure bisects a triangle with exactly one split
//! edge from that edge's midpoint to the opposite vertex. A green pair is
//! never refined again: if refinement reaches one of its members, the pair
//! is first merged back into its parent and the parent is red-refined.

use std::collections::{BTreeSet, HashMap};

use super::{GreenPair, Mesh};
use crate::error::{Error, Result};
use crate::scalar::{midpoint, Point, Real};

#[derive(Clone, Debug)]
struct Elem {
    verts: [usize; 3],
    region: u32,
    green: Option<usize>,
    alive: bool,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn local_edges(v: [usize; 3]) -> [(usize, usize); 3] {
    [key(v[1], v[2]), key(v[2], v[0]), key(v[0], v[1])]
}

/// Refinement workspace. An alive element edge is hanging exactly when a
/// midpoint vertex has been recorded for it.
struct Work<'a, T> {
    mesh: &'a Mesh<T>,
    vertices: Vec<Point<T>>,
    elems: Vec<Elem>,
    mids: HashMap<(usize, usize), usize>,
    edge_elems: HashMap<(usize, usize), Vec<usize>>,
    pair_merged: Vec<bool>,
}

impl<'a, T: Real> Work<'a, T> {
    fn new(mesh: &'a Mesh<T>, keep_green: bool) -> Self {
        let mut work = Self {
            mesh,
            vertices: mesh.vertices.clone(),
            elems: Vec::with_capacity(mesh.nt() * 2),
            mids: HashMap::new(),
            edge_elems: HashMap::new(),
            pair_merged: vec![!keep_green; mesh.green_pairs.len()],
        };
        for (&verts, &region) in mesh.triangles.iter().zip(&mesh.region) {
            work.push(verts, region);
        }
        if keep_green {
            for (g, pair) in mesh.green_pairs.iter().enumerate() {
                for &t in &pair.triangles {
                    work.elems[t].green = Some(g);
                }
                let apex = Self::apex(mesh, pair);
                let bisected = key(pair.parent[(apex + 1) % 3], pair.parent[(apex + 2) % 3]);
                work.mids.insert(bisected, pair.midpoint);
            }
        }
        work
    }

    /// Local index (in `parent`) of the vertex shared by both green children.
    fn apex(mesh: &Mesh<T>, pair: &GreenPair) -> usize {
        let [t0, t1] = pair.triangles;
        (0..3)
            .find(|&i| {
                let v = pair.parent[i];
                mesh.triangles[t0].contains(&v) && mesh.triangles[t1].contains(&v)
            })
            .expect("green children share their apex")
    }

    fn push(&mut self, verts: [usize; 3], region: u32) -> usize {
        let e = self.elems.len();
        self.elems.push(Elem { verts, region, green: None, alive: true });
        for k in local_edges(verts) {
            self.edge_elems.entry(k).or_default().push(e);
        }
        e
    }

    fn mid(&mut self, a: usize, b: usize) -> (usize, bool) {
        match self.mids.get(&key(a, b)) {
            Some(&m) => (m, false),
            None => {
                self.vertices.push(midpoint(self.vertices[a], self.vertices[b]));
                let m = self.vertices.len() - 1;
                self.mids.insert(key(a, b), m);
                (m, true)
            }
        }
    }

    fn hanging(&self, e: usize) -> usize {
        local_edges(self.elems[e].verts).iter().filter(|k| self.mids.contains_key(k)).count()
    }

    /// Red-refines `e` (merging its green pair into the parent first) and
    /// returns the elements that need re-examination.
    fn make_red(&mut self, e: usize) -> Vec<usize> {
        let target = match self.elems[e].green {
            Some(g) if !self.pair_merged[g] => self.merge_pair(g),
            _ => e,
        };
        let Elem { verts: [v0, v1, v2], region, .. } = self.elems[target];
        self.elems[target].alive = false;
        let mut touched = Vec::new();
        let mut m = [0usize; 3];
        for (slot, (a, b)) in m.iter_mut().zip([(v0, v1), (v1, v2), (v2, v0)]) {
            let (mv, fresh) = self.mid(a, b);
            *slot = mv;
            if fresh {
                if let Some(list) = self.edge_elems.get(&key(a, b)) {
                    touched.extend(list.iter().copied().filter(|&x| self.elems[x].alive));
                }
            }
        }
        let [m01, m12, m20] = m;
        for child in [[v0, m01, m20], [m01, v1, m12], [m20, m12, v2], [m12, m20, m01]] {
            touched.push(self.push(child, region));
        }
        touched
    }

    fn merge_pair(&mut self, g: usize) -> usize {
        let pair = &self.mesh.green_pairs[g];
        self.pair_merged[g] = true;
        let region = self.elems[pair.triangles[0]].region;
        let parent = pair.parent;
        for t in pair.triangles {
            self.elems[t].alive = false;
        }
        self.push(parent, region)
    }

    fn needs_red(&self, e: usize) -> bool {
        let el = &self.elems[e];
        if !el.alive {
            return false;
        }
        match self.hanging(e) {
            0 => false,
            1 => el.green.is_some_and(|g| !self.pair_merged[g]),
            _ => true,
        }
    }

    fn refine(&mut self, marked: &[usize]) {
        let mut queue: Vec<usize> = Vec::new();
        for &t in marked {
            if self.elems[t].alive {
                queue.extend(self.make_red(t));
            }
        }
        while let Some(e) = queue.pop() {
            if self.needs_red(e) {
                queue.extend(self.make_red(e));
            }
        }
    }

    fn finish(self) -> Result<Mesh<T>> {
        let mut triangles = Vec::with_capacity(self.elems.len());
        let mut region = Vec::with_capacity(self.elems.len());
        let mut new_index: Vec<Option<usize>> = vec![None; self.elems.len()];
        let mut green_pairs = Vec::new();

        for e in 0..self.elems.len() {
            let el = self.elems[e].clone();
            if !el.alive {
                continue;
            }
            let edges = local_edges(el.verts);
            let hits: Vec<usize> = (0..3).filter(|&i| self.mids.contains_key(&edges[i])).collect();
            match hits.as_slice() {
                [] => {
                    new_index[e] = Some(triangles.len());
                    triangles.push(el.verts);
                    region.push(el.region);
                }
                [i] => {
                    let a = el.verts[*i];
                    let b = el.verts[(i + 1) % 3];
                    let c = el.verts[(i + 2) % 3];
                    let m = self.mids[&key(b, c)];
                    let t0 = triangles.len();
                    triangles.push([a, b, m]);
                    triangles.push([a, m, c]);
                    region.push(el.region);
                    region.push(el.region);
                    green_pairs.push(GreenPair { triangles: [t0, t0 + 1], parent: el.verts, midpoint: m });
                }
                _ => unreachable!("closure leaves at most one hanging edge per element"),
            }
        }

        for (g, pair) in self.mesh.green_pairs.iter().enumerate() {
            if self.pair_merged[g] {
                continue;
            }
            let [a, b] = pair.triangles;
            if let (Some(na), Some(nb)) = (new_index[a], new_index[b]) {
                green_pairs.push(GreenPair { triangles: [na, nb], parent: pair.parent, midpoint: pair.midpoint });
            }
        }
        green_pairs.sort_by_key(|p| p.triangles[0]);

        Mesh::new(self.vertices, triangles, region, green_pairs)
    }
}

/// Splits every triangle into four similar children. Region tags are
/// inherited; green genealogy is dropped since no green pair survives.
pub fn uniform_quad_refine<T: Real>(mesh: &Mesh<T>) -> Result<Mesh<T>> {
    let mut work = Work::new(mesh, false);
    for e in 0..mesh.nt() {
        work.make_red(e);
    }
    work.finish()
}

/// Red-refines the marked triangles and restores conformity by green closure.
pub fn refine_marked<T: Real>(mesh: &Mesh<T>, marked: &[usize]) -> Result<Mesh<T>> {
    let set: BTreeSet<usize> = marked.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&t| t >= mesh.nt()) {
        return Err(Error::TriangleOutOfRange(bad));
    }
    let list: Vec<usize> = set.into_iter().collect();
    let mut work = Work::new(mesh, true);
    work.refine(&list);
    work.finish()
}
