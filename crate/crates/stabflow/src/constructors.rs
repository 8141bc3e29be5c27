//! Code families: Ising codes on graphs, the toric code and its
//! Ising-style variant, hypergraph products and random biregular codes.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::code::{CodeError, StabilizerCode};
use crate::gf2::{BitMatrix, BitVector};
use crate::pauli::PauliString;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge ({0}, {1}) is a self-loop or out of range")]
    BadEdge(usize, usize),
    #[error("toric code needs L >= 2, got {0}")]
    LatticeTooSmall(usize),
    #[error("a code needs at least one qubit")]
    NoQubits,
    #[error("degrees must exceed 2, got bit degree {bit} and check degree {check}")]
    DegreeTooSmall { bit: usize, check: usize },
    #[error("n * bit degree = {0} is not divisible by the check degree {1}")]
    NotDivisible(usize, usize),
    #[error("no simple bipartite graph found after {0} attempts")]
    RetriesExhausted(usize),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// An undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    #[must_use]
    pub fn path(n: usize) -> Self {
        Self {
            n,
            edges: (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }

    /// Cycle `0-1-…-(n-1)-0`; for `n < 3` this is a path.
    #[must_use]
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n >= 3 {
            g.edges.push((n - 1, 0));
        }
        g
    }

    #[must_use]
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }
}

/// One `Z_i Z_j` check per edge, all weights 1.
///
/// # Errors
///
/// Fails on self-loops, out-of-range vertices, or a disconnected graph.
pub fn ising_code(graph: &Graph) -> Result<StabilizerCode, ConstructError> {
    for &(a, b) in &graph.edges {
        if a == b || a >= graph.n || b >= graph.n {
            return Err(ConstructError::BadEdge(a, b));
        }
    }
    if !graph.is_connected() {
        return Err(ConstructError::Disconnected);
    }
    let checks = graph
        .edges
        .iter()
        .map(|&(a, b)| PauliString::z_on(graph.n, &[a, b]))
        .collect();
    Ok(StabilizerCode::new(graph.n, checks)?)
}

/// `n` single-qubit `Z_i` checks; the code space is `|0…0⟩`.
///
/// # Errors
///
/// Fails for `n == 0`.
pub fn field_code(n: usize) -> Result<StabilizerCode, ConstructError> {
    if n == 0 {
        return Err(ConstructError::NoQubits);
    }
    let checks = (0..n).map(|i| PauliString::z_on(n, &[i])).collect();
    Ok(StabilizerCode::new(n, checks)?)
}

/// Repetition code on a path of `n` bits.
///
/// # Errors
///
/// Never fails for `n >= 1`; kept fallible for uniformity.
pub fn repetition_code(n: usize) -> Result<StabilizerCode, ConstructError> {
    ising_code(&Graph::path(n))
}

/// Toric-lattice indexing. Edge `(x, y, 0)` joins vertex `(x, y)` to
/// `(x+1, y)` and `(x, y, 1)` joins `(x, y)` to `(x, y+1)`; its qubit index
/// is `(x L + y) 2 + o`. Face `(x, y)` has corners `(x, y)` and `(x+1, y+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToricLattice {
    pub l: usize,
}

impl ToricLattice {
    #[must_use]
    pub fn n(self) -> usize {
        2 * self.l * self.l
    }

    #[must_use]
    pub fn edge(self, x: usize, y: usize, o: usize) -> usize {
        let l = self.l;
        ((x % l) * l + (y % l)) * 2 + o
    }

    /// Edges meeting at vertex `(x, y)`.
    #[must_use]
    pub fn star(self, x: usize, y: usize) -> [usize; 4] {
        let l = self.l;
        [
            self.edge(x, y, 0),
            self.edge(x + l - 1, y, 0),
            self.edge(x, y, 1),
            self.edge(x, y + l - 1, 1),
        ]
    }

    /// Boundary edges of face `(x, y)`.
    #[must_use]
    pub fn plaquette(self, x: usize, y: usize) -> [usize; 4] {
        [
            self.edge(x, y, 0),
            self.edge(x, y + 1, 0),
            self.edge(x, y, 1),
            self.edge(x + 1, y, 1),
        ]
    }

    #[must_use]
    pub fn vertex_check(self, x: usize, y: usize) -> PauliString {
        PauliString::x_on(self.n(), &self.star(x, y))
    }

    #[must_use]
    pub fn face_check(self, x: usize, y: usize) -> PauliString {
        PauliString::z_on(self.n(), &self.plaquette(x, y))
    }

    /// Distinct unordered pairs of faces adjacent on the dual lattice.
    #[must_use]
    pub fn adjacent_faces(self) -> Vec<((usize, usize), (usize, usize))> {
        let l = self.l;
        let mut set = BTreeSet::new();
        for x in 0..l {
            for y in 0..l {
                for other in [((x + 1) % l, y), (x, (y + 1) % l)] {
                    let a = (x, y);
                    set.insert(if a < other { (a, other) } else { (other, a) });
                }
            }
        }
        set.into_iter().collect()
    }
}

/// Kitaev's toric code on an `L × L` torus: all vertex X-checks in
/// lexicographic order, then all face Z-checks.
///
/// # Errors
///
/// Fails for `L < 2`.
pub fn toric_code(l: usize) -> Result<StabilizerCode, ConstructError> {
    if l < 2 {
        return Err(ConstructError::LatticeTooSmall(l));
    }
    let lat = ToricLattice { l };
    let mut checks = Vec::with_capacity(2 * l * l);
    for x in 0..l {
        for y in 0..l {
            checks.push(lat.vertex_check(x, y));
        }
    }
    for x in 0..l {
        for y in 0..l {
            checks.push(lat.face_check(x, y));
        }
    }
    Ok(StabilizerCode::new(lat.n(), checks)?)
}

/// Toric-code stabilizer group with Ising-like face checks: all vertex
/// checks, the single face check at `(0, 0)`, then `B_f B_f'` for every
/// pair of dual-lattice neighbours.
///
/// # Errors
///
/// Fails for `L < 2`.
pub fn ising_toric(l: usize) -> Result<StabilizerCode, ConstructError> {
    if l < 2 {
        return Err(ConstructError::LatticeTooSmall(l));
    }
    let lat = ToricLattice { l };
    let mut checks = Vec::new();
    for x in 0..l {
        for y in 0..l {
            checks.push(lat.vertex_check(x, y));
        }
    }
    checks.push(lat.face_check(0, 0));
    for ((x1, y1), (x2, y2)) in lat.adjacent_faces() {
        let prod = lat
            .face_check(x1, y1)
            .multiply(&lat.face_check(x2, y2))
            .expect("Z checks commute");
        checks.push(prod);
    }
    Ok(StabilizerCode::new(lat.n(), checks)?)
}

/// A classical code given by its parity-check matrix (checks × bits).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalCode {
    pub h: BitMatrix,
}

impl ClassicalCode {
    #[must_use]
    pub fn new(h: BitMatrix) -> Self {
        Self { h }
    }

    /// Path repetition code: `n − 1` checks `x_i + x_{i+1}`.
    #[must_use]
    pub fn repetition_path(n: usize) -> Self {
        let rows = (0..n.saturating_sub(1))
            .map(|i| BitVector::from_indices(n, &[i, i + 1]))
            .collect();
        Self::new(BitMatrix::from_rows(n, rows).expect("uniform lengths"))
    }

    /// Cyclic repetition code: `n` checks `x_i + x_{i+1 mod n}`.
    #[must_use]
    pub fn repetition_cyclic(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| BitVector::from_indices(n, &[i, (i + 1) % n]))
            .collect();
        Self::new(BitMatrix::from_rows(n, rows).expect("uniform lengths"))
    }

    /// Number of bits.
    #[must_use]
    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    /// Number of checks.
    #[must_use]
    pub fn m(&self) -> usize {
        self.h.nrows()
    }

    /// Bits in check `c`.
    #[must_use]
    pub fn check_bits(&self, c: usize) -> Vec<usize> {
        self.h.row(c).iter_ones().collect()
    }

    /// Checks containing bit `b`.
    #[must_use]
    pub fn bit_checks(&self, b: usize) -> Vec<usize> {
        (0..self.m()).filter(|&c| self.h.get(c, b)).collect()
    }

    /// Z-type stabilizer code with one check per row.
    ///
    /// # Errors
    ///
    /// Propagates code validation errors.
    pub fn to_stabilizer_code(&self) -> Result<StabilizerCode, CodeError> {
        let checks = (0..self.m())
            .map(|c| PauliString::z_on(self.n(), &self.check_bits(c)))
            .collect();
        StabilizerCode::new(self.n(), checks)
    }
}

/// Hypergraph product of two classical codes.
///
/// Qubits `(b, b̃)` come first at index `b n₂ + b̃`, then `(c, c̃)` at
/// `n₁ n₂ + c m₂ + c̃`. X-checks `(c, b̃)` are listed before Z-checks
/// `(b, c̃)`, each in lexicographic order.
///
/// # Errors
///
/// Propagates code validation errors.
pub fn hypergraph_product(c1: &ClassicalCode, c2: &ClassicalCode) -> Result<StabilizerCode, ConstructError> {
    let (n1, m1, n2, m2) = (c1.n(), c1.m(), c2.n(), c2.m());
    let n = n1 * n2 + m1 * m2;
    let bb = |b: usize, bt: usize| b * n2 + bt;
    let cc = |c: usize, ct: usize| n1 * n2 + c * m2 + ct;
    let mut checks = Vec::new();
    for c in 0..m1 {
        for bt in 0..n2 {
            let mut q: Vec<usize> = c2.bit_checks(bt).into_iter().map(|ct| cc(c, ct)).collect();
            q.extend(c1.check_bits(c).into_iter().map(|b| bb(b, bt)));
            checks.push(PauliString::x_on(n, &q));
        }
    }
    for b in 0..n1 {
        for ct in 0..m2 {
            let mut q: Vec<usize> = c2.check_bits(ct).into_iter().map(|bt| bb(b, bt)).collect();
            q.extend(c1.bit_checks(b).into_iter().map(|c| cc(c, ct)));
            checks.push(PauliString::z_on(n, &q));
        }
    }
    Ok(StabilizerCode::new(n, checks)?)
}

/// Qubit relabelling taking `hypergraph_product(rep_L, rep_L)` of cyclic
/// repetition codes onto `toric_code(L)`: entry `i` is the toric index of
/// product qubit `i`. `(b, b̃)` maps to edge `(b, b̃, 0)` and `(c, c̃)` to
/// edge `(c + 1, c̃, 1)`; X-check `(c, b̃)` becomes the vertex check at
/// `(c + 1, b̃)` and Z-check `(b, c̃)` the face check at `(b, c̃)`.
#[must_use]
pub fn cyclic_product_to_toric(l: usize) -> Vec<usize> {
    let lat = ToricLattice { l };
    let mut map = Vec::with_capacity(2 * l * l);
    for b in 0..l {
        for bt in 0..l {
            map.push(lat.edge(b, bt, 0));
        }
    }
    for c in 0..l {
        for ct in 0..l {
            map.push(lat.edge(c + 1, ct, 1));
        }
    }
    map
}

/// Random `(d_B, d_C)`-biregular classical code from the configuration
/// model, rejecting draws with repeated bit-check pairs.
///
/// # Errors
///
/// Fails if a degree is `<= 2`, `n d_B` is not divisible by `d_C`, or 100
/// draws all contain repeated pairs.
pub fn random_biregular_classical(
    n: usize,
    bit_degree: usize,
    check_degree: usize,
    seed: u64,
) -> Result<ClassicalCode, ConstructError> {
    const ATTEMPTS: usize = 100;
    if bit_degree <= 2 || check_degree <= 2 {
        return Err(ConstructError::DegreeTooSmall {
            bit: bit_degree,
            check: check_degree,
        });
    }
    if !(n * bit_degree).is_multiple_of(check_degree) {
        return Err(ConstructError::NotDivisible(n * bit_degree, check_degree));
    }
    let m = n * bit_degree / check_degree;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sockets: Vec<usize> = (0..n).flat_map(|b| std::iter::repeat_n(b, bit_degree)).collect();
    'attempt: for _ in 0..ATTEMPTS {
        sockets.shuffle(&mut rng);
        let mut h = BitMatrix::zeros(m, n);
        for (c, chunk) in sockets.chunks(check_degree).enumerate() {
            for &b in chunk {
                if h.get(c, b) {
                    continue 'attempt;
                }
                h.set(c, b, true);
            }
        }
        return Ok(ClassicalCode::new(h));
    }
    Err(ConstructError::RetriesExhausted(ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = Graph {
            n: 4,
            edges: vec![(0, 1), (2, 3)],
        };
        assert_eq!(ising_code(&g), Err(ConstructError::Disconnected));
    }

    #[test]
    fn small_lattices_are_rejected() {
        assert_eq!(toric_code(1), Err(ConstructError::LatticeTooSmall(1)));
        assert_eq!(ising_toric(0), Err(ConstructError::LatticeTooSmall(0)));
    }

    #[test]
    fn biregular_degrees_hold() {
        let c = random_biregular_classical(12, 3, 4, 5).unwrap();
        assert_eq!(c.m(), 9);
        for b in 0..12 {
            assert_eq!(c.bit_checks(b).len(), 3);
        }
        for r in 0..9 {
            assert_eq!(c.check_bits(r).len(), 4);
        }
        assert_eq!(c, random_biregular_classical(12, 3, 4, 5).unwrap());
    }

    #[test]
    fn biregular_preconditions() {
        assert!(matches!(
            random_biregular_classical(10, 2, 4, 0),
            Err(ConstructError::DegreeTooSmall { .. })
        ));
        assert_eq!(
            random_biregular_classical(10, 3, 4, 0),
            Err(ConstructError::NotDivisible(30, 4))
        );
    }
}
