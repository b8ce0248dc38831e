//! Vietoris-Rips persistent homology in degrees 0 and 1.
//!
//! `rips_persistence` is the production path: degree 0 comes from a
//! union-find sweep over edges sorted by weight (minimum-spanning-forest
//! logic), degree 1 from column reduction of triangle boundaries over GF(2).
//! `brute_force_persistence` reduces the full boundary matrix of every
//! simplex up to dimension 2 with no shortcuts; it exists as an independent
//! verification oracle for small inputs and must stay that way.
//!
//! Ties in filtration value are broken by (dimension, lexicographic vertex
//! order) so output is deterministic across runs and platforms. Pairs with
//! zero persistence (birth = death) are discarded everywhere.

use std::io;

use thiserror::Error;

use crate::ingest::PointCloud;

/// Point-count ceiling for the brute-force oracle (full complex enumerated).
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Error, Debug)]
pub enum HomologyError {
    #[error("cannot compute distances of an empty point cloud")]
    EmptyCloud,
    #[error("homology degree {0} unsupported, only 0 and 1 are computed")]
    DegreeUnsupported(usize),
    #[error("brute-force reduction is limited to {limit} points, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("diagram contains an infinite death; apply cap_infinite first")]
    Uncapped,
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Symmetric matrix of pairwise Euclidean distances, zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Largest pairwise distance; 0 for a single point.
    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// Euclidean distance matrix of a cloud. Each pair is computed once and
/// mirrored, so symmetry is exact.
pub fn pairwise_distances(cloud: &PointCloud) -> Result<DistanceMatrix, HomologyError> {
    if cloud.is_empty() {
        return Err(HomologyError::EmptyCloud);
    }
    let n = cloud.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cloud
                .point(i)
                .iter()
                .zip(cloud.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, entries })
}

/// One birth-death interval. `death = +inf` marks the essential class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

/// Persistence pairs grouped by degree, plus the diameter of the source
/// cloud (the cap value for the essential class).
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub h0: Vec<PersistencePair>,
    pub h1: Vec<PersistencePair>,
    pub max_filtration: f64,
}

impl PersistenceDiagram {
    pub fn degree(&self, d: usize) -> &[PersistencePair] {
        match d {
            0 => &self.h0,
            1 => &self.h1,
            _ => &[],
        }
    }

    pub fn is_capped(&self) -> bool {
        self.h0.iter().chain(&self.h1).all(|p| p.death.is_finite())
    }

    /// Sorted (degree, birth, death) triples; the multiset view used by
    /// equivalence tests.
    pub fn canonical_triples(&self) -> Vec<(u8, f64, f64)> {
        let mut out: Vec<(u8, f64, f64)> = self
            .h0
            .iter()
            .map(|p| (0u8, p.birth, p.death))
            .chain(self.h1.iter().map(|p| (1u8, p.birth, p.death)))
            .collect();
        out.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if the two elements were already in one set.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }
}

/// Edges sorted by (weight, i, j); the shared filtration order for both
/// the union-find sweep and the triangle reduction.
fn sorted_edges(dm: &DistanceMatrix) -> Vec<(f64, usize, usize)> {
    let n = dm.n();
    let mut edges = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((dm.get(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    edges
}

/// Symmetric difference of two ascending index lists (GF(2) column addition).
fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Vietoris-Rips persistence of a distance matrix up to `max_degree`.
///
/// Degree 0: each union-find merge over weight-sorted edges emits a death at
/// the edge weight (births are all 0); the surviving component is the one
/// essential pair. Degree 1: triangle boundary columns are reduced over
/// GF(2) in filtration order; a non-zero reduced column pairs its lowest
/// edge (the cycle's birth) with the triangle (its death).
pub fn rips_persistence(
    dm: &DistanceMatrix,
    max_degree: usize,
) -> Result<PersistenceDiagram, HomologyError> {
    if max_degree > 1 {
        return Err(HomologyError::DegreeUnsupported(max_degree));
    }
    let n = dm.n();
    let edges = sorted_edges(dm);

    let mut h0 = Vec::new();
    let mut uf = UnionFind::new(n);
    let mut positive_edges = 0usize;
    for &(w, i, j) in &edges {
        if uf.union(i, j) {
            if w > 0.0 {
                h0.push(PersistencePair {
                    birth: 0.0,
                    death: w,
                });
            }
        } else {
            positive_edges += 1;
        }
    }
    h0.push(PersistencePair {
        birth: 0.0,
        death: f64::INFINITY,
    });

    let mut h1 = Vec::new();
    if max_degree >= 1 && n >= 3 {
        h1 = reduce_triangle_columns(dm, &edges, positive_edges);
    }

    Ok(PersistenceDiagram {
        h0,
        h1,
        max_filtration: dm.max_entry(),
    })
}

fn reduce_triangle_columns(
    dm: &DistanceMatrix,
    edges: &[(f64, usize, usize)],
    positive_edges: usize,
) -> Vec<PersistencePair> {
    let n = dm.n();
    let mut edge_rank = vec![usize::MAX; n * n];
    for (rank, &(_, i, j)) in edges.iter().enumerate() {
        edge_rank[i * n + j] = rank;
        edge_rank[j * n + i] = rank;
    }

    let mut triangles = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    for i in 0..n {
        for j in (i + 1)..n {
            let d_ij = dm.get(i, j);
            for k in (j + 1)..n {
                let filt = d_ij.max(dm.get(i, k)).max(dm.get(j, k));
                triangles.push((filt, i, j, k));
            }
        }
    }
    triangles.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });

    // low_owner[edge rank] = index of the reduced column owning that low.
    let mut low_owner: Vec<Option<usize>> = vec![None; edges.len()];
    let mut reduced: Vec<Vec<usize>> = Vec::with_capacity(triangles.len());
    let mut pairs = Vec::new();
    let mut paired = 0usize;

    for &(filt, i, j, k) in &triangles {
        let mut col = vec![
            edge_rank[i * n + j],
            edge_rank[i * n + k],
            edge_rank[j * n + k],
        ];
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match low_owner[low] {
                Some(owner) => col = xor_sorted(&col, &reduced[owner]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            low_owner[low] = Some(reduced.len());
            paired += 1;
            let birth = edges[low].0;
            if filt > birth {
                pairs.push(PersistencePair { birth, death: filt });
            }
        }
        reduced.push(col);
    }

    // Full filtration: the complete 2-skeleton is simply connected, so every
    // cycle-creating edge must have been killed.
    debug_assert_eq!(paired, positive_edges);
    pairs
}

/// Standard full boundary-matrix reduction over every simplex up to
/// dimension 2, no optimizations. Verification oracle for `rips_persistence`.
pub fn brute_force_persistence(dm: &DistanceMatrix) -> Result<PersistenceDiagram, HomologyError> {
    let n = dm.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(HomologyError::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    #[derive(Clone, Copy)]
    struct Simplex {
        filt: f64,
        dim: u8,
        verts: [usize; 3], // unused slots hold usize::MAX
    }

    let mut simplices = Vec::new();
    for i in 0..n {
        simplices.push(Simplex {
            filt: 0.0,
            dim: 0,
            verts: [i, usize::MAX, usize::MAX],
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            simplices.push(Simplex {
                filt: dm.get(i, j),
                dim: 1,
                verts: [i, j, usize::MAX],
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let filt = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                simplices.push(Simplex {
                    filt,
                    dim: 2,
                    verts: [i, j, k],
                });
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.filt
            .total_cmp(&b.filt)
            .then(a.dim.cmp(&b.dim))
            .then(a.verts.cmp(&b.verts))
    });

    // Global index lookups for faces.
    let mut vertex_index = vec![usize::MAX; n];
    let mut edge_index = vec![usize::MAX; n * n];
    for (idx, s) in simplices.iter().enumerate() {
        match s.dim {
            0 => vertex_index[s.verts[0]] = idx,
            1 => {
                edge_index[s.verts[0] * n + s.verts[1]] = idx;
            }
            _ => {}
        }
    }

    let m = simplices.len();
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(m);
    for s in &simplices {
        let mut col = match s.dim {
            0 => Vec::new(),
            1 => vec![vertex_index[s.verts[0]], vertex_index[s.verts[1]]],
            _ => {
                let [i, j, k] = s.verts;
                vec![
                    edge_index[i * n + j],
                    edge_index[i * n + k],
                    edge_index[j * n + k],
                ]
            }
        };
        col.sort_unstable();
        columns.push(col);
    }

    let mut low_owner: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        let mut col = std::mem::take(&mut columns[j]);
        while let Some(&low) = col.last() {
            match low_owner[low] {
                Some(owner) => col = xor_sorted(&col, &columns[owner]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            low_owner[low] = Some(j);
        }
        columns[j] = col;
    }

    let mut h0 = Vec::new();
    let mut h1 = Vec::new();
    for (i, owner) in low_owner.iter().enumerate() {
        if let Some(j) = owner {
            let (birth, death) = (simplices[i].filt, simplices[*j].filt);
            if death > birth {
                let pair = PersistencePair { birth, death };
                match simplices[i].dim {
                    0 => h0.push(pair),
                    1 => h1.push(pair),
                    _ => unreachable!("no 3-simplices, triangles cannot be births"),
                }
            }
        }
    }
    // Essential classes: positive simplices never used as a low.
    for (i, s) in simplices.iter().enumerate() {
        if columns[i].is_empty() && low_owner[i].is_none() {
            match s.dim {
                0 => h0.push(PersistencePair {
                    birth: 0.0,
                    death: f64::INFINITY,
                }),
                1 => unreachable!("full 2-skeleton leaves no essential 1-cycles"),
                _ => {} // positive triangles open H2 classes, out of scope
            }
        }
    }
    h0.sort_by(|a, b| a.death.total_cmp(&b.death));
    h1.sort_by(|a, b| {
        a.birth
            .total_cmp(&b.birth)
            .then(a.death.total_cmp(&b.death))
    });

    Ok(PersistenceDiagram {
        h0,
        h1,
        max_filtration: dm.max_entry(),
    })
}

/// Replace the essential death with the diameter of the source cloud.
/// Pairs that collapse to zero persistence are dropped, so the result is a
/// finite diagram suitable for every descriptor.
pub fn cap_infinite(dgm: &PersistenceDiagram) -> PersistenceDiagram {
    let cap = dgm.max_filtration;
    let capped = |pairs: &[PersistencePair]| -> Vec<PersistencePair> {
        pairs
            .iter()
            .filter_map(|p| {
                let death = if p.death.is_infinite() { cap } else { p.death };
                (death > p.birth).then_some(PersistencePair {
                    birth: p.birth,
                    death,
                })
            })
            .collect()
    };
    PersistenceDiagram {
        h0: capped(&dgm.h0),
        h1: capped(&dgm.h1),
        max_filtration: cap,
    }
}

/// Diagram dump: `degree,birth,death` rows. Requires a capped diagram so
/// the `inf` literal never appears.
pub fn write_diagram_csv<W: io::Write>(
    dgm: &PersistenceDiagram,
    mut writer: W,
) -> Result<(), HomologyError> {
    if !dgm.is_capped() {
        return Err(HomologyError::Uncapped);
    }
    writeln!(writer, "degree,birth,death")?;
    for (degree, pairs) in [(0, &dgm.h0), (1, &dgm.h1)] {
        for p in pairs {
            writeln!(writer, "{degree},{},{}", p.birth, p.death)?;
        }
    }
    Ok(())
}
