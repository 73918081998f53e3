//! The spectral curve: the bivariate Laurent polynomial det W(α, β) = 0.
//!
//! det W is a Laurent polynomial Σ c[i][j] α^i β^j with i ∈ [−M, M] and
//! j ∈ [0, N]. Its coefficients are recovered by evaluating α^M·det W on a
//! (2M+1)×(N+1) tensor grid of roots of unity and inverting with an exact
//! inverse DFT along each axis — interpolation at unit-root nodes is
//! perfectly conditioned, unlike a general Vandermonde solve.
//!
//! Not every exponent pair in the rectangle can occur. Assigning weight N to
//! α, weight M to β, weight 1 to A and weight 2 to B makes det W homogeneous
//! of weight NM, which confines the support to the cone N·|i| + M·j ≤ NM.
//! Exponents outside the cone carry nothing but interpolation roundoff, so
//! they are pinned to exactly zero; the largest magnitude discarded this way
//! is kept as an audit value (`discarded_max`) and is checked against the
//! support threshold by the test suite rather than trusted blindly.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::det_w;
use crate::torus::LatticeState;

/// Relative factor for the default support threshold τ = factor · max|c|.
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 1e-9;

/// The interpolated curve polynomial Σ c[i][j] α^i β^j.
#[derive(Debug, Clone)]
pub struct CurvePolynomial {
    n: usize,
    m: usize,
    /// Coefficients stored i-major: index (i+M)·(N+1) + j.
    coeffs: Vec<Complex64>,
    /// Support threshold τ (absolute).
    threshold: f64,
    /// Largest raw magnitude seen outside the admissible cone before pinning.
    discarded_max: f64,
}

impl CurvePolynomial {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn discarded_max(&self) -> f64 {
        self.discarded_max
    }

    /// Largest coefficient magnitude — the curve's natural scale.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Test-only: wrap a raw coefficient table (no interpolation, no pinning).
    #[cfg(test)]
    pub(crate) fn from_raw(n: usize, m: usize, coeffs: Vec<Complex64>) -> CurvePolynomial {
        assert_eq!(coeffs.len(), (2 * m + 1) * (n + 1));
        let max_abs = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        CurvePolynomial {
            n,
            m,
            coeffs,
            threshold: DEFAULT_THRESHOLD_FACTOR * max_abs,
            discarded_max: 0.0,
        }
    }

    fn index(&self, i: i64, j: i64) -> usize {
        let m = self.m as i64;
        let n = self.n as i64;
        assert!(
            -m <= i && i <= m && 0 <= j && j <= n,
            "curve exponent ({i},{j}) out of range"
        );
        ((i + m) as usize) * (self.n + 1) + j as usize
    }

    /// Coefficient of α^i β^j, for i ∈ [−M, M], j ∈ [0, N].
    pub fn coeff(&self, i: i64, j: i64) -> Complex64 {
        self.coeffs[self.index(i, j)]
    }

    /// Exponent pairs with |c[i][j]| > τ, sorted by (i, j).
    pub fn support(&self) -> Vec<(i64, i64)> {
        let (n, m) = (self.n as i64, self.m as i64);
        let mut out = Vec::new();
        for i in -m..=m {
            for j in 0..=n {
                if self.coeff(i, j).norm() > self.threshold {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// True when the support equals the full admissible cone — the generic
    /// situation for random states.
    pub fn is_generic(&self) -> bool {
        self.support() == admissible_support(self.n, self.m)
    }

    /// Evaluate Σ c[i][j] α^i β^j. Needs α ≠ 0 (negative powers).
    pub fn eval(&self, alpha: Complex64, beta: Complex64) -> Result<Complex64> {
        if alpha == Complex64::new(0.0, 0.0) {
            return Err(Error::AlphaZero);
        }
        let (n, m) = (self.n as i64, self.m as i64);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in -m..=m {
            // Horner in β for the row of fixed α-exponent
            let mut row = Complex64::new(0.0, 0.0);
            for j in (0..=n).rev() {
                row = row * beta + self.coeff(i, j);
            }
            acc += row * alpha.powi(i as i32);
        }
        Ok(acc)
    }

    /// Coefficients p_k of α^k in α^M·(curve at fixed β), k = 0..2M.
    /// The roots of this polynomial are the α-coordinates of the curve
    /// points over β.
    pub fn alpha_poly_at_beta(&self, beta: Complex64) -> Vec<Complex64> {
        let (n, m) = (self.n as i64, self.m as i64);
        (-m..=m)
            .map(|i| {
                let mut row = Complex64::new(0.0, 0.0);
                for j in (0..=n).rev() {
                    row = row * beta + self.coeff(i, j);
                }
                row
            })
            .collect()
    }

    /// The full coefficient vector in storage order (i ascending, then j
    /// ascending), length (2M+1)(N+1). These are the conserved quantities of
    /// the flows; the flow module tracks their drift.
    pub fn conserved_vector(&self) -> Vec<Complex64> {
        self.coeffs.clone()
    }
}

/// The admissible exponent cone {(i, j) : N·|i| + M·j ≤ NM}, sorted by (i, j).
pub fn admissible_support(n: usize, m: usize) -> Vec<(i64, i64)> {
    let (ni, mi) = (n as i64, m as i64);
    let mut out = Vec::new();
    for i in -mi..=mi {
        for j in 0..=ni {
            if ni * i.abs() + mi * j <= ni * mi {
                out.push((i, j));
            }
        }
    }
    out
}

/// Interpolate the curve polynomial with the default support threshold.
pub fn curve_polynomial(state: &LatticeState) -> Result<CurvePolynomial> {
    curve_polynomial_with_threshold(state, DEFAULT_THRESHOLD_FACTOR)
}

/// Interpolate the curve polynomial; τ = `threshold_factor` · max|c|.
pub fn curve_polynomial_with_threshold(
    state: &LatticeState,
    threshold_factor: f64,
) -> Result<CurvePolynomial> {
    assert!(
        threshold_factor.is_finite() && threshold_factor > 0.0,
        "threshold factor must be positive"
    );
    use std::f64::consts::TAU;
    let (n, m) = (state.n(), state.m());
    let na = 2 * m + 1; // α-nodes for α-degrees 0..2M of α^M·det W
    let nb = n + 1; // β-nodes for β-degrees 0..N

    let samples: Vec<Complex64> = (0..na * nb)
        .into_par_iter()
        .map(|idx| {
            let (p, q) = (idx / nb, idx % nb);
            let alpha = Complex64::from_polar(1.0, TAU * p as f64 / na as f64);
            let beta = Complex64::from_polar(1.0, TAU * q as f64 / nb as f64);
            det_w(state, alpha, beta).map(|d| alpha.powi(m as i32) * d)
        })
        .collect::<Result<_>>()?;

    // exact inverse DFT, axis by axis
    let mut shifted = vec![Complex64::new(0.0, 0.0); na * nb];
    for a in 0..na {
        for j in 0..nb {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..na {
                for q in 0..nb {
                    let phase = -TAU * ((a * p) as f64 / na as f64 + (j * q) as f64 / nb as f64);
                    acc += samples[p * nb + q] * Complex64::from_polar(1.0, phase);
                }
            }
            shifted[a * nb + j] = acc / (na * nb) as f64;
        }
    }

    // pin the structurally-impossible exponents to exact zero
    let (ni, mi) = (n as i64, m as i64);
    let mut discarded_max = 0.0f64;
    let mut max_abs = 0.0f64;
    for a in 0..na {
        let i = a as i64 - mi;
        for j in 0..nb {
            let v = &mut shifted[a * nb + j];
            if ni * i.abs() + mi * (j as i64) > ni * mi {
                discarded_max = discarded_max.max(v.norm());
                *v = Complex64::new(0.0, 0.0);
            } else {
                max_abs = max_abs.max(v.norm());
            }
        }
    }

    Ok(CurvePolynomial {
        n,
        m,
        coeffs: shifted,
        threshold: threshold_factor * max_abs,
        discarded_max,
    })
}

/// The maximally degenerate reference state: A ≡ 0 and B assigned the powers
/// of a primitive NM-th root of unity along the (1,1)-orbit of the torus.
/// Its curve collapses to three monomials α^M, β^N, α^{−M}, each with a
/// unimodular coefficient.
pub fn special_state(n: usize, m: usize) -> Result<LatticeState> {
    use std::f64::consts::TAU;
    crate::torus::validate_dims(n, m)?;
    let nm = n * m;
    let eta = Complex64::from_polar(1.0, TAU / nm as f64);
    let a_grid = vec![Complex64::new(0.0, 0.0); nm];
    let mut b_grid = vec![Complex64::new(0.0, 0.0); nm];
    for a in 0..nm {
        b_grid[(a % m) * n + (a % n)] = eta.powi(a as i32);
    }
    LatticeState::new(n, m, a_grid, b_grid)
}

/// Newton polygon of the curve: shifted support, hull, interior lattice count.
#[derive(Debug, Clone)]
pub struct NewtonPolygon {
    points: Vec<(i64, i64)>,
    hull: Vec<(i64, i64)>,
    interior: Vec<(i64, i64)>,
    generic_support: bool,
}

impl NewtonPolygon {
    /// Support of α^M·(curve), i.e. pairs (i+M, j); all lie in [0,2M]×[0,N].
    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    /// Convex hull vertices in counterclockwise order.
    pub fn hull(&self) -> &[(i64, i64)] {
        &self.hull
    }

    /// Lattice points strictly inside the hull.
    pub fn interior(&self) -> &[(i64, i64)] {
        &self.interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    /// False when the support is smaller than the full admissible cone —
    /// the interior count then need not match the generic value.
    pub fn has_generic_support(&self) -> bool {
        self.generic_support
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain convex hull; returns vertices counterclockwise with
/// collinear boundary points dropped.
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Build the Newton polygon and return it with its interior lattice-point
/// count. For generic states the count is the curve's genus, (N−1)·M.
pub fn newton_genus(curve: &CurvePolynomial) -> (NewtonPolygon, usize) {
    let m = curve.m() as i64;
    let points: Vec<(i64, i64)> = curve.support().iter().map(|&(i, j)| (i + m, j)).collect();
    let hull = convex_hull(points.clone());
    let mut interior = Vec::new();
    if hull.len() >= 3 {
        let (min_x, max_x) = (
            hull.iter().map(|p| p.0).min().unwrap(),
            hull.iter().map(|p| p.0).max().unwrap(),
        );
        let (min_y, max_y) = (
            hull.iter().map(|p| p.1).min().unwrap(),
            hull.iter().map(|p| p.1).max().unwrap(),
        );
        for x in min_x..=max_x {
            for y in min_y..=max_y {
                let strictly_inside = hull
                    .iter()
                    .zip(hull.iter().cycle().skip(1))
                    .all(|(&v0, &v1)| cross(v0, v1, (x, y)) > 0);
                if strictly_inside {
                    interior.push((x, y));
                }
            }
        }
    }
    let generic_support = curve.is_generic();
    let count = interior.len();
    (
        NewtonPolygon {
            points,
            hull,
            interior,
            generic_support,
        },
        count,
    )
}

/// The interior lattice-point count a generic curve must have: (N−1)·M.
pub fn expected_genus(n: usize, m: usize) -> usize {
    (n - 1) * m
}

/// Evaluate det W from the interpolated polynomial and from LU directly and
/// return the worst relative mismatch over the given probe points.
pub fn interpolation_residual(
    state: &LatticeState,
    curve: &CurvePolynomial,
    probes: &[(Complex64, Complex64)],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(alpha, beta) in probes {
        let direct = det_w(state, alpha, beta)?;
        let interp = curve.eval(alpha, beta)?;
        let scale = direct.norm().max(1e-300);
        worst = worst.max((direct - interp).norm() / scale);
    }
    Ok(worst)
}
