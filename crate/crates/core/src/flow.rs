//! The explicit flow on the fields (A, B) and a fixed-step integrator that
//! monitors how well the curve coefficients are conserved along it.
//!
//! The vector field convolves A against the κ and ρ sign tables:
//!
//! ```text
//! dA(n,m) = B(n,m) − B(n+1,m) + (Σ_{k,l} κ(k−n, l−m)·A(k,l))·A(n,m)
//! dB(n,m) = (Σ_{k,l} ρ(k−n, l−m)·A(k,l))·B(n,m)
//! ```
//!
//! Every coefficient of the spectral curve is a first integral of this field,
//! so a trajectory's per-coefficient drift measures nothing but integrator
//! error. ΣA is conserved exactly (κ is antisymmetric and the B-difference
//! telescopes), and Σ dB/B = 0 because ρ sums to zero, which keeps ΠB
//! invariant as well.

use num_complex::Complex64;

use crate::curve::curve_polynomial;
use crate::error::{Error, Result};
use crate::kappa::{build_kappa, build_rho, SignKind, SignTable};
use crate::torus::LatticeState;

/// Floor for the per-coefficient drift scale max(|c(0)|, floor), so
/// structurally-zero coefficients cannot blow up the report.
pub const DRIFT_FLOOR: f64 = 1e-12;

/// Integration aborts when any |B| falls below this (the flow multiplies B,
/// so a true zero is unreachable; underflow means the log-derivative blew up).
pub const B_UNDERFLOW: f64 = 1e-300;

/// The flow's right-hand side on the two field grids (m-major storage).
#[derive(Debug, Clone)]
pub struct FlowDerivative {
    n: usize,
    m: usize,
    da: Vec<Complex64>,
    db: Vec<Complex64>,
}

impl FlowDerivative {
    pub fn da(&self, n: i64, m: i64) -> Complex64 {
        self.da[crate::torus::canonical_index(n, m, self.n, self.m).flat(self.n)]
    }

    pub fn db(&self, n: i64, m: i64) -> Complex64 {
        self.db[crate::torus::canonical_index(n, m, self.n, self.m).flat(self.n)]
    }

    pub fn da_grid(&self) -> &[Complex64] {
        &self.da
    }

    pub fn db_grid(&self) -> &[Complex64] {
        &self.db
    }
}

fn rhs_raw(
    n: usize,
    m: usize,
    a: &[Complex64],
    b: &[Complex64],
    kappa: &SignTable,
    rho: &SignTable,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut da = vec![Complex64::new(0.0, 0.0); n * m];
    let mut db = vec![Complex64::new(0.0, 0.0); n * m];
    for mm in 0..m {
        for nn in 0..n {
            let site = mm * n + nn;
            let mut kappa_sum = Complex64::new(0.0, 0.0);
            let mut rho_sum = Complex64::new(0.0, 0.0);
            for ll in 0..m {
                for kk in 0..n {
                    let av = a[ll * n + kk];
                    let dn = kk as i64 - nn as i64;
                    let dm = ll as i64 - mm as i64;
                    kappa_sum += kappa.at(dn, dm) as f64 * av;
                    rho_sum += rho.at(dn, dm) as f64 * av;
                }
            }
            let b_next = b[mm * n + (nn + 1) % n];
            da[site] = b[site] - b_next + kappa_sum * a[site];
            db[site] = rho_sum * b[site];
        }
    }
    (da, db)
}

/// Evaluate the flow field for a state, using prebuilt sign tables.
pub fn flow_rhs(
    state: &LatticeState,
    kappa: &SignTable,
    rho: &SignTable,
) -> Result<FlowDerivative> {
    assert!(kappa.kind() == SignKind::Kappa, "first table must be kappa");
    assert!(rho.kind() == SignKind::Rho, "second table must be rho");
    let (n, m) = (state.n(), state.m());
    for t in [kappa, rho] {
        if (t.n(), t.m()) != (n, m) {
            return Err(Error::DimensionMismatch {
                state_n: n,
                state_m: m,
                table_n: t.n(),
                table_m: t.m(),
            });
        }
    }
    let (da, db) = rhs_raw(n, m, state.a_grid(), state.b_grid(), kappa, rho);
    Ok(FlowDerivative { n, m, da, db })
}

/// The conserved fingerprint of a state: the full curve-coefficient vector in
/// fixed (i, j) order.
pub fn conserved_vector(state: &LatticeState) -> Result<Vec<Complex64>> {
    Ok(curve_polynomial(state)?.conserved_vector())
}

/// Drift measured at one recorded step.
#[derive(Debug, Clone)]
pub struct DriftSample {
    pub step: usize,
    pub time: f64,
    /// Worst per-coefficient relative drift at this step.
    pub max_rel_drift: f64,
    /// Relative drift of each tracked coefficient, in `exponents` order.
    pub per_coeff: Vec<f64>,
}

/// Conservation record of one integration run.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    /// Exponent pairs (i, j) of the tracked coefficients, in storage order.
    pub exponents: Vec<(i64, i64)>,
    /// Coefficient vector at t = 0.
    pub baseline: Vec<Complex64>,
    pub samples: Vec<DriftSample>,
    /// Worst drift over all coefficients and recorded steps.
    pub max_drift: f64,
    /// Worst relative drift of ΣA over recorded steps.
    pub sum_a_drift: f64,
    /// Worst relative drift of ΠB over recorded steps.
    pub prod_b_drift: f64,
}

fn axpy(y: &[Complex64], h: f64, k: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(k).map(|(&yi, &ki)| yi + h * ki).collect()
}

/// Integrate the flow with classical fixed-step RK4, recording conservation
/// drift every `record_every` steps (plus step 0 and the final step).
pub fn integrate(
    state: &LatticeState,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<(LatticeState, DriftReport)> {
    assert!(dt.is_finite() && dt > 0.0, "dt must be positive");
    assert!(steps >= 1, "need at least one step");
    assert!(record_every >= 1, "record_every must be at least 1");
    let (n, m) = (state.n(), state.m());
    let kappa = build_kappa(n, m)?;
    let rho = build_rho(n, m)?;

    let baseline = conserved_vector(state)?;
    let scales: Vec<f64> = baseline.iter().map(|c| c.norm().max(DRIFT_FLOOR)).collect();
    let exponents: Vec<(i64, i64)> = (-(m as i64)..=m as i64)
        .flat_map(|i| (0..=n as i64).map(move |j| (i, j)))
        .collect();
    let sum_a0 = state.sum_a();
    let prod_b0 = state.prod_b();

    let mut a = state.a_grid().to_vec();
    let mut b = state.b_grid().to_vec();
    let mut samples = Vec::new();
    let mut max_drift = 0.0f64;
    let mut sum_a_drift = 0.0f64;
    let mut prod_b_drift = 0.0f64;

    let mut record = |step: usize, a: &[Complex64], b: &[Complex64]| -> Result<()> {
        let now = LatticeState::new(n, m, a.to_vec(), b.to_vec())?;
        let current = conserved_vector(&now)?;
        let per_coeff: Vec<f64> = current
            .iter()
            .zip(&baseline)
            .zip(&scales)
            .map(|((&c, &c0), &s)| (c - c0).norm() / s)
            .collect();
        let worst = per_coeff.iter().cloned().fold(0.0f64, f64::max);
        max_drift = max_drift.max(worst);
        sum_a_drift =
            sum_a_drift.max((now.sum_a() - sum_a0).norm() / sum_a0.norm().max(DRIFT_FLOOR));
        prod_b_drift =
            prod_b_drift.max((now.prod_b() - prod_b0).norm() / prod_b0.norm().max(DRIFT_FLOOR));
        samples.push(DriftSample {
            step,
            time: step as f64 * dt,
            max_rel_drift: worst,
            per_coeff,
        });
        Ok(())
    };

    record(0, &a, &b)?;
    for step in 1..=steps {
        let (k1a, k1b) = rhs_raw(n, m, &a, &b, &kappa, &rho);
        let (k2a, k2b) = rhs_raw(
            n,
            m,
            &axpy(&a, dt / 2.0, &k1a),
            &axpy(&b, dt / 2.0, &k1b),
            &kappa,
            &rho,
        );
        let (k3a, k3b) = rhs_raw(
            n,
            m,
            &axpy(&a, dt / 2.0, &k2a),
            &axpy(&b, dt / 2.0, &k2b),
            &kappa,
            &rho,
        );
        let (k4a, k4b) = rhs_raw(n, m, &axpy(&a, dt, &k3a), &axpy(&b, dt, &k3b), &kappa, &rho);
        for i in 0..n * m {
            a[i] += dt / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
            b[i] += dt / 6.0 * (k1b[i] + 2.0 * k2b[i] + 2.0 * k3b[i] + k4b[i]);
        }
        for i in 0..n * m {
            let bad_a = !a[i].re.is_finite() || !a[i].im.is_finite();
            let bad_b = !b[i].re.is_finite() || !b[i].im.is_finite() || b[i].norm() < B_UNDERFLOW;
            if bad_a || bad_b {
                return Err(Error::FlowBlowup {
                    n: i % n,
                    m: i / n,
                    step,
                });
            }
        }
        if step % record_every == 0 || step == steps {
            record(step, &a, &b)?;
        }
    }

    let final_state = LatticeState::new(n, m, a, b)?;
    let report = DriftReport {
        dt,
        steps,
        record_every,
        exponents,
        baseline,
        samples,
        max_drift,
        sum_a_drift,
        prod_b_drift,
    };
    Ok((final_state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::random_state_default;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tables(n: usize, m: usize) -> (SignTable, SignTable) {
        (build_kappa(n, m).unwrap(), build_rho(n, m).unwrap())
    }

    #[test]
    fn site_formula_3_2() {
        let state = random_state_default(3, 2, 17).unwrap();
        let (kappa, rho) = tables(3, 2);
        let d = flow_rhs(&state, &kappa, &rho).unwrap();
        let expected = state.b(0, 0) - state.b(1, 0)
            + (-state.a(1, 0) + state.a(2, 0) + state.a(1, 1) - state.a(2, 1)) * state.a(0, 0);
        assert!((d.da(0, 0) - expected).norm() < 1e-14);
    }

    #[test]
    fn rhs_conservation_identities() {
        for (n, m, seed) in [(3usize, 2usize, 2u64), (4, 3, 3), (5, 2, 4)] {
            let state = random_state_default(n, m, seed).unwrap();
            let (kappa, rho) = tables(n, m);
            let d = flow_rhs(&state, &kappa, &rho).unwrap();
            let sum_da: Complex64 = d.da_grid().iter().sum();
            let scale: f64 = d.da_grid().iter().map(|z| z.norm()).sum::<f64>() + 1.0;
            assert!(sum_da.norm() < 1e-13 * scale, "sum dA = {sum_da}");
            let sum_log: Complex64 = d
                .db_grid()
                .iter()
                .zip(state.b_grid())
                .map(|(&db, &b)| db / b)
                .sum();
            assert!(sum_log.norm() < 1e-13 * scale, "sum dB/B = {sum_log}");
        }
    }

    #[test]
    fn zero_a_field_gives_pure_b_difference() {
        let base = random_state_default(3, 2, 5).unwrap();
        let state = LatticeState::new(3, 2, vec![c(0.0, 0.0); 6], base.b_grid().to_vec()).unwrap();
        let (kappa, rho) = tables(3, 2);
        let d = flow_rhs(&state, &kappa, &rho).unwrap();
        for mm in 0..2 {
            for nn in 0..3 {
                assert_eq!(d.da(nn, mm), state.b(nn, mm) - state.b(nn + 1, mm));
                assert_eq!(d.db(nn, mm), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn log_derivative_of_b_ignores_b() {
        let s1 = random_state_default(3, 2, 6).unwrap();
        let s2 = LatticeState::new(
            3,
            2,
            s1.a_grid().to_vec(),
            random_state_default(3, 2, 60).unwrap().b_grid().to_vec(),
        )
        .unwrap();
        let (kappa, rho) = tables(3, 2);
        let d1 = flow_rhs(&s1, &kappa, &rho).unwrap();
        let d2 = flow_rhs(&s2, &kappa, &rho).unwrap();
        for i in 0..6 {
            let r1 = d1.db_grid()[i] / s1.b_grid()[i];
            let r2 = d2.db_grid()[i] / s2.b_grid()[i];
            assert!((r1 - r2).norm() < 1e-14);
        }
    }

    #[test]
    fn table_dimension_mismatch_is_reported() {
        let state = random_state_default(5, 2, 1).unwrap();
        let (kappa, rho) = tables(3, 2);
        let err = flow_rhs(&state, &kappa, &rho).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn translation_equivariance() {
        let state = random_state_default(3, 2, 23).unwrap();
        let (kappa, rho) = tables(3, 2);
        let d = flow_rhs(&state, &kappa, &rho).unwrap();
        for dn in 0..3i64 {
            for dm in 0..2i64 {
                let shifted = state.translated(dn, dm);
                let ds = flow_rhs(&shifted, &kappa, &rho).unwrap();
                for mm in 0..2i64 {
                    for nn in 0..3i64 {
                        assert!(
                            (ds.da(nn, mm) - d.da(nn + dn, mm + dm)).norm() < 1e-13,
                            "dA shift ({dn},{dm}) site ({nn},{mm})"
                        );
                        assert!((ds.db(nn, mm) - d.db(nn + dn, mm + dm)).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn short_run_conserves_everything() {
        let state = random_state_default(3, 2, 11).unwrap();
        let (final_state, report) = integrate(&state, 1e-3, 100, 25).unwrap();
        assert_eq!(report.samples.len(), 5); // steps 0, 25, 50, 75, 100
        assert!(report.max_drift < 1e-9, "drift {}", report.max_drift);
        assert!(report.sum_a_drift < 1e-12);
        assert!(report.prod_b_drift < 1e-11);
        assert_eq!(report.exponents.len(), report.baseline.len());
        // the state actually moved
        let moved: f64 = final_state
            .a_grid()
            .iter()
            .zip(state.a_grid())
            .map(|(&x, &y)| (x - y).norm())
            .sum();
        assert!(moved > 1e-3, "flow did not move the state");
    }

    #[test]
    fn runaway_step_size_aborts() {
        let state = random_state_default(3, 2, 14).unwrap();
        let err = integrate(&state, 1e8, 50, 10).unwrap_err();
        assert!(matches!(err, Error::FlowBlowup { .. }));
    }
}
