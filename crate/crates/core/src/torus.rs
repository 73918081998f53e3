//! Lattice fields on the discrete torus ℤ/N × ℤ/M, their file format, and
//! seeded random generation.
//!
//! A phase point of the system is a pair of complex fields A, B on an N×M
//! torus with gcd(N, M) = 1 and every B entry nonzero. Grids are stored
//! m-major (the second index is more significant), matching the row/column
//! ordering used by the spectral operator.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A canonicalized position on the torus: `0 <= n < N`, `0 <= m < M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusIndex {
    pub n: usize,
    pub m: usize,
}

impl TorusIndex {
    /// Flat offset in an m-major grid with row length `big_n`.
    pub fn flat(&self, big_n: usize) -> usize {
        self.m * big_n + self.n
    }
}

/// Reduce arbitrary integer coordinates to canonical torus residues.
pub fn canonical_index(n: i64, m: i64, big_n: usize, big_m: usize) -> TorusIndex {
    TorusIndex {
        n: n.rem_euclid(big_n as i64) as usize,
        m: m.rem_euclid(big_m as i64) as usize,
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Check torus dimensions: both at least 2 and coprime.
pub(crate) fn validate_dims(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 2 || gcd(n, m) != 1 {
        return Err(Error::InvalidTorus { n, m });
    }
    Ok(())
}

///// The phase point: complex fields A and B on the torus.
///
/// Immutable after construction; construction validates all invariants
/// (dimensions, nonzero B, finite entries).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    n: usize,
    m: usize,
    a: Vec<C64>,
    b: Vec<C64>,
}

impl LatticeState {
    /// Build a state from m-major grids (`grid[m * N + n]`).
    pub fn new(n: usize, m: usize, a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        validate_dims(n, m)?;
        let sites = n * m;
        if a.len() != sites || b.len() != sites {
            return Err(Error::MalformedState(format!(
                "expected {} entries per field, got A: {}, B: {}",
                sites,
                a.len(),
                b.len()
            )));
        }
        for mi in 0..m {
            for ni in 0..n {
                let idx = mi * n + ni;
                if !a[idx].re.is_finite() || !a[idx].im.is_finite() {
                    return Err(Error::InvalidEntry {
                        field: "A",
                        n: ni,
                        m: mi,
                        reason: "non-finite value",
                    });
                }
                if !b[idx].re.is_finite() || !b[idx].im.is_finite() {
                    return Err(Error::InvalidEntry {
                        field: "B",
                        n: ni,
                        m: mi,
                        reason: "non-finite value",
                    });
                }
                if b[idx] == C64::new(0.0, 0.0) {
                    return Err(Error::InvalidEntry {
                        field: "B",
                        n: ni,
                        m: mi,
                        reason: "must be nonzero",
                    });
                }
            }
        }
        Ok(LatticeState { n, m, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of torus sites, N·M.
    pub fn sites(&self) -> usize {
        self.n * self.m
    }

    /// A(n, m) with arbitrary integer indices (canonicalized onto the torus).
    pub fn a(&self, n: i64, m: i64) -> C64 {
        self.a[canonical_index(n, m, self.n, self.m).flat(self.n)]
    }

    /// B(n, m) with arbitrary integer indices (canonicalized onto the torus).
    pub fn b(&self, n: i64, m: i64) -> C64 {
        self.b[canonical_index(n, m, self.n, self.m).flat(self.n)]
    }

    /// Raw m-major A grid.
    pub fn a_grid(&self) -> &[C64] {
        &self.a
    }

    /// Raw m-major B grid.
    pub fn b_grid(&self) -> &[C64] {
        &self.b
    }

    /// Sum of all A entries (a linear invariant of the flow).
    pub fn sum_a(&self) -> C64 {
        self.a.iter().sum()
    }

    /// Product of all B entries (a multiplicative invariant of the flow).
    pub fn prod_b(&self) -> C64 {
        self.b.iter().product()
    }

    /// The state translated by (dn, dm): A'(n, m) = A(n + dn, m + dm).
    pub fn translated(&self, dn: i64, dm: i64) -> LatticeState {
        let mut a = vec![C64::new(0.0, 0.0); self.sites()];
        let mut b = vec![C64::new(0.0, 0.0); self.sites()];
        for mi in 0..self.m {
            for ni in 0..self.n {
                let dst = mi * self.n + ni;
                a[dst] = self.a(ni as i64 + dn, mi as i64 + dm);
                b[dst] = self.b(ni as i64 + dn, mi as i64 + dm);
            }
        }
        LatticeState {
            n: self.n,
            m: self.m,
            a,
            b,
        }
    }
}

/// Seeded random state: A uniform on the disk of radius `a_radius`,
/// B with modulus uniform in `b_annulus` and uniform phase.
///
/// Draw order is fixed (all A sites in m-major order, then all B sites), so a
/// seed fully determines the state on every platform.
pub fn random_state(
    n: usize,
    m: usize,
    seed: u64,
    a_radius: f64,
    b_annulus: (f64, f64),
) -> Result<LatticeState> {
    validate_dims(n, m)?;
    let (b_min, b_max) = b_annulus;
    if !(a_radius > 0.0) || !(b_min > 0.0) || !(b_max >= b_min) {
        return Err(Error::MalformedState(format!(
            "bad sampling parameters: a_radius={a_radius}, b_annulus=({b_min}, {b_max})"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sites = n * m;
    let tau = std::f64::consts::TAU;
    let mut a = Vec::with_capacity(sites);
    for _ in 0..sites {
        let r = a_radius * rng.gen::<f64>().sqrt();
        let th = tau * rng.gen::<f64>();
        a.push(C64::from_polar(r, th));
    }
    let mut b = Vec::with_capacity(sites);
    for _ in 0..sites {
        let r = b_min + (b_max - b_min) * rng.gen::<f64>();
        let th = tau * rng.gen::<f64>();
        b.push(C64::from_polar(r, th));
    }
    LatticeState::new(n, m, a, b)
}

/// Default random state: disk radius 1 for A, modulus in [0.5, 1.5] for B.
pub fn random_state_default(n: usize, m: usize, seed: u64) -> Result<LatticeState> {
    random_state(n, m, seed, 1.0, (0.5, 1.5))
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    version: u32,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "B")]
    b: Vec<Vec<[f64; 2]>>,
}

fn grid_to_rows(n: usize, m: usize, grid: &[C64]) -> Vec<Vec<[f64; 2]>> {
    (0..m)
        .map(|mi| {
            (0..n)
                .map(|ni| {
                    let z = grid[mi * n + ni];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

fn rows_to_grid(n: usize, m: usize, rows: &[Vec<[f64; 2]>], field: &str) -> Result<Vec<C64>> {
    if rows.len() != m {
        return Err(Error::MalformedState(format!(
            "{field}: expected {m} rows (one per m), got {}",
            rows.len()
        )));
    }
    let mut grid = Vec::with_capacity(n * m);
    for (mi, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::MalformedState(format!(
                "{field} row {mi}: expected {n} entries, got {}",
                row.len()
            )));
        }
        for &[re, im] in row {
            grid.push(C64::new(re, im));
        }
    }
    Ok(grid)
}

/// Serialize a state to the JSON schema
/// `{"version":1,"N":…,"M":…,"A":[[[re,im],…],…],"B":…}` (outer arrays indexed
/// by m, inner by n). Values round-trip bit-exactly.
pub fn state_to_json(state: &LatticeState) -> String {
    let file = StateFile {
        version: 1,
        n: state.n,
        m: state.m,
        a: grid_to_rows(state.n, state.m, &state.a),
        b: grid_to_rows(state.n, state.m, &state.b),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("state serialization cannot fail");
    s.push('\n');
    s
}

/// Parse and validate a state from its JSON form.
pub fn state_from_json(text: &str) -> Result<LatticeState> {
    let file: StateFile = serde_json::from_str(text)?;
    if file.version != 1 {
        return Err(Error::UnsupportedVersion(file.version));
    }
    let a = rows_to_grid(file.n, file.m, &file.a, "A")?;
    let b = rows_to_grid(file.n, file.m, &file.b, "B")?;
    LatticeState::new(file.n, file.m, a, b)
}

/// Write a state file.
pub fn save_state(state: &LatticeState, path: &Path) -> Result<()> {
    std::fs::write(path, state_to_json(state))?;
    Ok(())
}

/// Read and validate a state file.
pub fn load_state(path: &Path) -> Result<LatticeState> {
    let text = std::fs::read_to_string(path)?;
    state_from_json(&text)
}
