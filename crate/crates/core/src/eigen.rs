//! Points of the spectral curve, the kernel (eigen)vector of W there, and the
//! structural cross-checks: the minor-ratio formula, the lattice recurrence on
//! the covering plane, quasi-periodicity multipliers, and the two asymptotic
//! branches over β → ∞.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::curve::CurvePolynomial;
use crate::error::{Error, Result};
use crate::operator::assemble_w;
use crate::torus::{LatticeState, TorusIndex};

/// Leading/trailing α-coefficients below this (relative to the largest) make
/// a β value non-generic: the cleared polynomial would drop degree.
const COEFF_FLOOR: f64 = 1e-12;

/// Two α-roots closer than this flag a non-generic β.
const SEPARATION_FLOOR: f64 = 1e-8;

/// |β| at or above this switches root-finding to the scaled branch path,
/// where the two root clusters differ in magnitude by ~|β|^{2N/M}.
const BRANCH_SPLIT_RADIUS: f64 = 1e3;

/// A located point (α, β) with det W(α, β) = 0.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// |p(α)| / Σ_k |p_k||α|^k for the cleared α-polynomial p at this β —
    /// the determinant magnitude relative to its term-by-term scale.
    pub residual: f64,
}

/// A kernel vector of W at a curve point, normalized to Ψ(0,0) = 1.
#[derive(Debug, Clone)]
pub struct KernelVector {
    n: usize,
    m: usize,
    psi: Vec<Complex64>,
    residual: f64,
    isolation: f64,
}

impl KernelVector {
    /// Components in m-major order.
    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    /// Component at a torus site (indices canonicalized).
    pub fn at(&self, n: i64, m: i64) -> Complex64 {
        self.psi[crate::torus::canonical_index(n, m, self.n, self.m).flat(self.n)]
    }

    /// ‖Wψ‖₂ / (‖W‖_F ‖ψ‖₂).
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Ratio of second-smallest to smallest singular value of W: how
    /// one-dimensional the kernel is.
    pub fn isolation(&self) -> f64 {
        self.isolation
    }
}

fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_derivative_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (1..coeffs.len()).rev() {
        acc = acc * z + k as f64 * coeffs[k];
    }
    acc
}

/// |p(z)| relative to the sum of term magnitudes at z.
fn poly_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0f64;
    let mut zp = Complex64::new(1.0, 0.0);
    for &c in coeffs {
        num += c * zp;
        den += c.norm() * zp.norm();
        zp *= z;
    }
    num.norm() / den.max(1e-300)
}

/// All roots of the polynomial via companion-matrix Schur factorization.
fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    assert!(deg >= 1, "need a nonconstant polynomial");
    let lead = coeffs[deg];
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for k in 1..deg {
        comp[(k, k - 1)] = Complex64::new(1.0, 0.0);
    }
    for k in 0..deg {
        comp[(k, deg - 1)] = -coeffs[k] / lead;
    }
    let schur = Schur::try_new(comp, 1e-14, 10_000).ok_or(Error::EigenConvergence)?;
    let eigs = schur.eigenvalues().ok_or(Error::EigenConvergence)?;
    Ok(eigs.iter().copied().collect())
}

/// A few Newton steps; keeps the polished value only if it improves the
/// relative residual.
fn polish_root(coeffs: &[Complex64], root: Complex64) -> Complex64 {
    let mut z = root;
    // enough iterations for the linear convergence toward a multiple root;
    // simple roots exit on the step criterion after two or three
    for _ in 0..24 {
        let d = poly_derivative_eval(coeffs, z);
        if d.norm() < 1e-300 {
            break;
        }
        let step = poly_eval(coeffs, z) / d;
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    if poly_residual(coeffs, z) <= poly_residual(coeffs, root) {
        z
    } else {
        root
    }
}

/// The floor is relative to the curve's own coefficient scale, not to
/// max|p_k(β)| — the latter grows like |β|^N and would wrongly reject every
/// large β even though the extreme coefficients stay O(1) by structure.
fn check_generic_coeffs(p: &[Complex64], curve_scale: f64) -> Result<()> {
    if p[0].norm() <= COEFF_FLOOR * curve_scale
        || p[p.len() - 1].norm() <= COEFF_FLOOR * curve_scale
    {
        return Err(Error::DegenerateBeta(format!(
            "leading/trailing coefficient ratio {:.3e}/{:.3e} below floor",
            p[p.len() - 1].norm() / curve_scale,
            p[0].norm() / curve_scale
        )));
    }
    Ok(())
}

fn check_separation(roots: &[Complex64]) -> Result<()> {
    for (k, &a) in roots.iter().enumerate() {
        for &b in &roots[k + 1..] {
            if (a - b).norm() < SEPARATION_FLOOR {
                return Err(Error::DegenerateBeta(format!(
                    "alpha roots collide: |{a} - {b}| below separation floor"
                )));
            }
        }
    }
    Ok(())
}

/// All 2M points of the curve over a fixed β, each with its residual.
///
/// Moderate |β| uses a single companion-matrix solve. At |β| ≥ 1e3 the two
/// root clusters (moduli ~|β|^{±N/M}) are found separately in rescaled
/// variables, where both clusters are O(1) and well conditioned.
pub fn curve_points_at_beta(curve: &CurvePolynomial, beta: Complex64) -> Result<Vec<CurvePoint>> {
    let (n, m) = (curve.n(), curve.m());
    let p = curve.alpha_poly_at_beta(beta);
    check_generic_coeffs(&p, curve.max_abs_coeff())?;

    // Separation is checked in the variable each solve actually works in:
    // α itself on the plain path, the O(1) rescaled variable within each
    // cluster on the branch path. The two clusters cannot collide — their
    // moduli differ by a factor ~|β|^{2N/M}.
    let mut alphas: Vec<Complex64> = Vec::with_capacity(2 * m);
    if beta.norm() < BRANCH_SPLIT_RADIUS {
        for r in companion_roots(&p)? {
            alphas.push(polish_root(&p, r));
        }
        check_separation(&alphas)?;
    } else {
        let s = beta.norm().powf(n as f64 / m as f64);
        // large cluster: substitute α = s·γ, keep the M roots with |γ| ~ 1
        let q: Vec<Complex64> = p
            .iter()
            .enumerate()
            .map(|(k, &pk)| pk * s.powi(k as i32))
            .collect();
        let mut gammas = companion_roots(&q)?;
        gammas.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        let taken: Vec<Complex64> = gammas.iter().take(m).map(|&g| polish_root(&q, g)).collect();
        check_separation(&taken)?;
        alphas.extend(taken.iter().map(|&g| s * g));
        // small cluster: reverse the polynomial (u = 1/α), substitute u = s·γ
        let rev: Vec<Complex64> = p
            .iter()
            .rev()
            .enumerate()
            .map(|(k, &pk)| pk * s.powi(k as i32))
            .collect();
        let mut gammas = companion_roots(&rev)?;
        gammas.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        let taken: Vec<Complex64> = gammas
            .iter()
            .take(m)
            .map(|&g| polish_root(&rev, g))
            .collect();
        check_separation(&taken)?;
        alphas.extend(taken.iter().map(|&g| 1.0 / (s * g)));
    }
    let mut points: Vec<CurvePoint> = alphas
        .into_iter()
        .map(|alpha| CurvePoint {
            alpha,
            beta,
            residual: poly_residual(&p, alpha),
        })
        .collect();
    points.sort_by(|x, y| {
        y.alpha
            .norm()
            .total_cmp(&x.alpha.norm())
            .then(x.alpha.arg().total_cmp(&y.alpha.arg()))
    });
    Ok(points)
}

fn frobenius(mat: &DMatrix<Complex64>) -> f64 {
    mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn hadamard(mat: &DMatrix<Complex64>) -> f64 {
    (0..mat.nrows())
        .map(|r| mat.row(r).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product()
}

/// The kernel vector of W at a curve point, from the smallest singular
/// direction, normalized so Ψ(0,0) = 1.
pub fn kernel_vector(state: &LatticeState, point: &CurvePoint) -> Result<KernelVector> {
    let w = assemble_w(state, point.alpha, point.beta)?;
    let nm = w.size();
    let mat = w.matrix().clone();
    let svd = mat.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smallest = sv[nm - 1];
    let isolation = if smallest > 0.0 {
        sv[nm - 2] / smallest
    } else {
        f64::INFINITY
    };
    if isolation < 1e3 {
        return Err(Error::KernelNotIsolated { isolation });
    }
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let mut psi: Vec<Complex64> = v_t.row(nm - 1).iter().map(|z| z.conj()).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let at_origin = psi[0];
    if at_origin.norm() < 1e-8 * norm {
        return Err(Error::KernelNormalization(at_origin.norm() / norm));
    }
    for z in &mut psi {
        *z /= at_origin;
    }
    psi[0] = Complex64::new(1.0, 0.0);
    let psi_vec = nalgebra::DVector::from_column_slice(&psi);
    let residual = (&mat * &psi_vec).norm() / (frobenius(&mat) * psi_vec.norm());
    Ok(KernelVector {
        n: state.n(),
        m: state.m(),
        psi,
        residual,
        isolation,
    })
}

/// Ratio of two kernel components computed from minors of W: delete `row` and
/// one column, attach the adjugate sign, and divide. Independent of `row` as
/// long as the denominator minor is nonzero.
pub fn minor_ratio(
    state: &LatticeState,
    point: &CurvePoint,
    row: TorusIndex,
    col1: TorusIndex,
    col2: TorusIndex,
) -> Result<Complex64> {
    let w = assemble_w(state, point.alpha, point.beta)?;
    let n = state.n();
    let r = row.flat(n);
    let minor = |c: usize| -> (Complex64, f64) {
        let sub = w.matrix().clone().remove_row(r).remove_column(c);
        let scale = hadamard(&sub);
        let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
        (sign * sub.lu().determinant(), scale)
    };
    let (num, _) = minor(col1.flat(n));
    let (den, den_scale) = minor(col2.flat(n));
    let rel = den.norm() / den_scale.max(1e-300);
    if rel <= 1e-12 {
        return Err(Error::MinorDenominator(rel));
    }
    Ok(num / den)
}

/// ψ extended to the covering plane: Ψ(n + kN, m + lM) = α^k β^l Ψ(n, m).
fn covering_value(
    psi: &KernelVector,
    alpha: Complex64,
    beta: Complex64,
    n: i64,
    m: i64,
) -> Complex64 {
    let (nd, md) = (psi.n as i64, psi.m as i64);
    let k = n.div_euclid(nd) as i32;
    let l = m.div_euclid(md) as i32;
    alpha.powi(k) * beta.powi(l) * psi.psi[(m.rem_euclid(md) * nd + n.rem_euclid(nd)) as usize]
}

/// Worst relative violation of the lattice recurrence
/// Ψ(n,m+1) = Ψ(n+1,m) − A(n,m)Ψ(n,m) − B(n,m)Ψ(n−1,m)
/// over all torus sites, with ψ interpreted on the covering plane.
pub fn recurrence_residual(state: &LatticeState, point: &CurvePoint, psi: &KernelVector) -> f64 {
    let (alpha, beta) = (point.alpha, point.beta);
    let mut worst = 0.0f64;
    for m in 0..state.m() as i64 {
        for n in 0..state.n() as i64 {
            let up = covering_value(psi, alpha, beta, n, m + 1);
            let right = covering_value(psi, alpha, beta, n + 1, m);
            let here = state.a(n, m) * covering_value(psi, alpha, beta, n, m);
            let left = state.b(n, m) * covering_value(psi, alpha, beta, n - 1, m);
            let r = up - right + here + left;
            let scale = up.norm() + right.norm() + here.norm() + left.norm() + 1e-300;
            worst = worst.max(r.norm() / scale);
        }
    }
    worst
}

/// Independent multiplier check: seed row m = 0 of the covering plane from ψ,
/// rebuild rows 1..M with the recurrence alone (the fields are strictly
/// periodic — no multipliers enter), then verify that N horizontal steps
/// multiply by α inside every rebuilt row and that the full climb of M rows
/// multiplies by β. Returns the worst relative violation.
pub fn quasi_periodicity_check(
    state: &LatticeState,
    point: &CurvePoint,
    psi: &KernelVector,
) -> f64 {
    let (alpha, beta) = (point.alpha, point.beta);
    let (n_dim, m_dim) = (state.n() as i64, state.m() as i64);
    let (n_lo, n_hi) = (-(m_dim + 1), n_dim + m_dim + 1);

    // rows[m][n - (n_lo + m)] holds the value at covering site (n, m)
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(m_dim as usize + 1);
    rows.push(
        (n_lo..=n_hi)
            .map(|n| covering_value(psi, alpha, beta, n, 0))
            .collect(),
    );
    for m in 0..m_dim {
        let prev = &rows[m as usize];
        let prev_lo = n_lo + m;
        let (lo, hi) = (prev_lo + 1, n_hi - m - 1);
        let next: Vec<Complex64> = (lo..=hi)
            .map(|n| {
                let idx = (n - prev_lo) as usize;
                prev[idx + 1] - state.a(n, m) * prev[idx] - state.b(n, m) * prev[idx - 1]
            })
            .collect();
        rows.push(next);
    }

    let mut worst = 0.0f64;
    for (m, row) in rows.iter().enumerate() {
        let lo = n_lo + m as i64;
        let scale = row.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1e-300;
        for (idx, &v) in row.iter().enumerate() {
            let n = lo + idx as i64;
            let shifted = n + n_dim;
            if shifted <= n_hi - m as i64 {
                let vs = row[(shifted - lo) as usize];
                worst = worst.max((vs - alpha * v).norm() / scale);
            }
        }
    }
    let top = &rows[m_dim as usize];
    let top_lo = n_lo + m_dim;
    let scale = top.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1e-300;
    for (idx, &v) in top.iter().enumerate() {
        let n = top_lo + idx as i64;
        let base = covering_value(psi, alpha, beta, n, 0);
        worst = worst.max((v - beta * base).norm() / scale);
    }
    worst
}

/// The two root clusters over a large |β| circle and their limiting products.
#[derive(Debug, Clone)]
pub struct AsymptoticBranches {
    pub radius: f64,
    /// Points with |α| > 1 (moduli ~ radius^{N/M}).
    pub large: Vec<CurvePoint>,
    /// Points with |α| ≤ 1 (moduli ~ radius^{−N/M}).
    pub small: Vec<CurvePoint>,
    /// Mean of α^M / β^N over the large cluster.
    pub large_ratio_mean: Complex64,
    /// Mean of α^M · β^N over the small cluster.
    pub small_ratio_mean: Complex64,
}

/// Locate both branches at β = radius (real positive) and average the branch
/// products α^M/β^N and α^M·β^N, which tend to constants as radius → ∞.
pub fn asymptotic_branches(curve: &CurvePolynomial, radius: f64) -> Result<AsymptoticBranches> {
    assert!(radius.is_finite() && radius > 1.0, "radius must exceed 1");
    let beta = Complex64::new(radius, 0.0);
    let points = curve_points_at_beta(curve, beta)?;
    let (n, m) = (curve.n() as i32, curve.m() as i32);
    let (large, small): (Vec<CurvePoint>, Vec<CurvePoint>) =
        points.into_iter().partition(|p| p.alpha.norm() > 1.0);
    let mean = |v: &[Complex64]| -> Complex64 {
        if v.is_empty() {
            Complex64::new(f64::NAN, f64::NAN)
        } else {
            v.iter().sum::<Complex64>() / v.len() as f64
        }
    };
    let large_ratios: Vec<Complex64> = large
        .iter()
        .map(|p| p.alpha.powi(m) / beta.powi(n))
        .collect();
    let small_ratios: Vec<Complex64> = small
        .iter()
        .map(|p| p.alpha.powi(m) * beta.powi(n))
        .collect();
    Ok(AsymptoticBranches {
        radius,
        large,
        small,
        large_ratio_mean: mean(&large_ratios),
        small_ratio_mean: mean(&small_ratios),
    })
}
