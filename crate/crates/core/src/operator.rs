//! The spectral operator W(α, β) of the lattice recurrence and its β = 0
//! factorization into cyclic band blocks.
//!
//! W acts on functions of the torus, rows and columns indexed by (n, m) with
//! m more significant (flat index `m·N + n`). In block form (N×N blocks
//! indexed by m): block (0,0) is −β·I, every other diagonal block is −I, and
//! block (m+1 mod M, m) carries the one-row transfer matrix X(m). All other
//! blocks vanish.
//!
//! X(m) couples row m to row m+1: its diagonal is −A(·,m), its subdiagonal
//! −B(·,m) with the wrap-around corner carrying −B(0,m)/α, and its
//! superdiagonal 1 with the wrap-around corner carrying α. The two corners
//! implement the multiplier picked up when an index crosses the horizontal
//! period.
//!
//! Assembly is additive: every contribution is `+=` into the target entry, so
//! on tori where distinct structural entries land on the same site (N = 2,
//! where the sub- and superdiagonal coincide) the matrix is the sum of the
//! contributions rather than an arbitrary overwrite.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus::{LatticeState, TorusIndex};

/// The assembled NM×NM spectral operator at a fixed (α, β).
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    n: usize,
    m: usize,
    mat: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total dimension NM.
    pub fn size(&self) -> usize {
        self.n * self.m
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    /// Entry indexed by torus sites (row, column).
    pub fn entry(&self, row: TorusIndex, col: TorusIndex) -> Complex64 {
        self.mat[(row.flat(self.n), col.flat(self.n))]
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> Complex64 {
        self.mat.clone().lu().determinant()
    }

    /// Hadamard bound: product of row 2-norms, an upper bound for |det|.
    /// Used as the natural scale when deciding whether a determinant is zero.
    pub fn det_scale(&self) -> f64 {
        (0..self.size())
            .map(|r| {
                self.mat
                    .row(r)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .product()
    }
}

fn require_alpha(alpha: Complex64) -> Result<()> {
    if alpha == Complex64::new(0.0, 0.0) {
        return Err(Error::AlphaZero);
    }
    Ok(())
}

/// The N×N transfer block X(m) coupling lattice row `block_m` to the next row.
pub fn x_block(
    state: &LatticeState,
    block_m: usize,
    alpha: Complex64,
) -> Result<DMatrix<Complex64>> {
    require_alpha(alpha)?;
    assert!(block_m < state.m(), "block index out of range");
    let n = state.n();
    let mb = block_m as i64;
    let one = Complex64::new(1.0, 0.0);
    let mut x = DMatrix::zeros(n, n);
    for i in 0..n {
        let ii = i as i64;
        x[(i, i)] += -state.a(ii, mb);
        let sub = (i + n - 1) % n;
        x[(i, sub)] += if i == 0 {
            -state.b(0, mb) / alpha
        } else {
            -state.b(ii, mb)
        };
        let sup = (i + 1) % n;
        x[(i, sup)] += if i == n - 1 { alpha } else { one };
    }
    Ok(x)
}

/// Assemble the full operator W(α, β) for the given state.
pub fn assemble_w(
    state: &LatticeState,
    alpha: Complex64,
    beta: Complex64,
) -> Result<OperatorMatrix> {
    require_alpha(alpha)?;
    let (n, m) = (state.n(), state.m());
    let nm = n * m;
    let mut mat = DMatrix::zeros(nm, nm);
    for mb in 0..m {
        let diag = if mb == 0 {
            -beta
        } else {
            -Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            mat[(mb * n + i, mb * n + i)] += diag;
        }
        let x = x_block(state, mb, alpha)?;
        let rb = (mb + 1) % m;
        for i in 0..n {
            for j in 0..n {
                mat[(rb * n + i, mb * n + j)] += x[(i, j)];
            }
        }
    }
    Ok(OperatorMatrix { n, m, mat })
}

/// det W(α, β), via LU with partial pivoting.
pub fn det_w(state: &LatticeState, alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    Ok(assemble_w(state, alpha, beta)?.det())
}

/// det W(α, 0) computed from the block factorization instead of LU:
/// (−1)^{N(M−1)} · Π_m det X(m)(α). The sign is the parity of the block
/// permutation that makes the β = 0 operator block-diagonal.
pub fn beta_zero_product(state: &LatticeState, alpha: Complex64) -> Result<Complex64> {
    let sign = if (state.n() * (state.m() - 1)) % 2 == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0, 0.0)
    };
    let mut prod = sign;
    for mb in 0..state.m() {
        prod *= x_block(state, mb, alpha)?.lu().determinant();
    }
    Ok(prod)
}

/// Roots of one block's cleared characteristic polynomial
/// α·det X(m)(α) = c₀ + c₁α + c₂α².
#[derive(Debug, Clone)]
pub struct BlockRoots {
    /// Which lattice row this block couples out of.
    pub block: usize,
    /// Coefficients [c₀, c₁, c₂] of the cleared quadratic.
    pub coeffs: [Complex64; 3],
    /// The two roots, in no particular order.
    pub roots: [Complex64; 2],
    /// True when the two roots coincide to within 1e−8 (relative).
    pub degenerate: bool,
}

/// The 2M points where the spectral curve meets β = 0, block by block.
#[derive(Debug, Clone)]
pub struct BetaZeroSpectrum {
    blocks: Vec<BlockRoots>,
}

impl BetaZeroSpectrum {
    pub fn blocks(&self) -> &[BlockRoots] {
        &self.blocks
    }

    /// All 2M roots, concatenated in block order.
    pub fn all_roots(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|b| b.roots).collect()
    }

    /// True when any block has a (near-)double root: the state is not generic.
    pub fn any_degenerate(&self) -> bool {
        self.blocks.iter().any(|b| b.degenerate)
    }
}

/// Stable roots of c₂x² + c₁x + c₀ = 0 over ℂ.
fn quadratic_roots(c0: Complex64, c1: Complex64, c2: Complex64) -> [Complex64; 2] {
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    // pick the sqrt branch that adds constructively to c1
    let s = if (c1.conj() * disc).re >= 0.0 {
        disc
    } else {
        -disc
    };
    let q = -(c1 + s) / 2.0;
    if q.norm() == 0.0 {
        // c1 = 0 and zero discriminant: double root at the origin
        return [Complex64::new(0.0, 0.0); 2];
    }
    [q / c2, c0 / q]
}

/// Interpolate each block determinant det X(m)(α) = c₀/α + c₁ + c₂α on the
/// cube roots of unity and solve the cleared quadratic for its two roots.
pub fn beta_zero_spectrum(state: &LatticeState) -> Result<BetaZeroSpectrum> {
    use std::f64::consts::TAU;
    let omega = Complex64::from_polar(1.0, TAU / 3.0);
    let nodes = [Complex64::new(1.0, 0.0), omega, omega * omega];
    let mut blocks = Vec::with_capacity(state.m());
    for mb in 0..state.m() {
        let samples: Vec<Complex64> = nodes
            .iter()
            .map(|&a| x_block(state, mb, a).map(|x| x.lu().determinant()))
            .collect::<Result<_>>()?;
        // inverse DFT of length 3; Laurent exponents (−1, 0, 1) ≡ (2, 0, 1) mod 3
        let mut q = [Complex64::new(0.0, 0.0); 3];
        for (j, qj) in q.iter_mut().enumerate() {
            for (k, &sk) in samples.iter().enumerate() {
                *qj += sk * Complex64::from_polar(1.0, -TAU * (j * k) as f64 / 3.0);
            }
            *qj /= 3.0;
        }
        let coeffs = [q[2], q[0], q[1]]; // ascending powers of α after clearing
        let roots = quadratic_roots(coeffs[0], coeffs[1], coeffs[2]);
        let scale = roots[0].norm().max(roots[1].norm()).max(1.0);
        let degenerate = (roots[0] - roots[1]).norm() <= 1e-8 * scale;
        blocks.push(BlockRoots {
            block: mb,
            coeffs,
            roots,
            degenerate,
        });
    }
    Ok(BetaZeroSpectrum { blocks })
}
