//! The sign tables κ, ρ, φ on the torus and the Euclid-parity case predictor.
//!
//! κ is the unique {−1,0,1}-valued function on ℤ/N × ℤ/M with κ(0,0) = 0 whose
//! differences along the (−1,+1) direction are prescribed at four special
//! sites and vanish everywhere else:
//!
//! ```text
//! κ(0,0) − κ(1,−1) = −1      κ(0,1) − κ(1,0)  = +1
//! κ(−1,0) − κ(0,−1) = +1    κ(−1,1) − κ(0,0) = −1
//! κ(i−1, j+1) = κ(i, j)      otherwise
//! ```
//!
//! Because gcd(N, M) = 1 the step (−1,+1) generates the whole torus, so the
//! constraints can be solved by a single walk along that cycle; the forcing
//! constants sum to zero around the cycle, which the construction verifies.
//! ρ is derived from κ pointwise and φ from ρ; both land in {−1,0,1}, which is
//! checked rather than assumed.

use crate::error::{Error, Result};
use crate::torus::{canonical_index, validate_dims};

/// Which of the three tables a `SignTable` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignKind {
    Kappa,
    Rho,
    Phi,
}

/// A function torus → {−1, 0, 1}, stored m-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignTable {
    n: usize,
    m: usize,
    kind: SignKind,
    values: Vec<i8>,
}

impl SignTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> SignKind {
        self.kind
    }

    /// Table value at arbitrary integer coordinates (canonicalized).
    pub fn at(&self, n: i64, m: i64) -> i8 {
        self.values[canonical_index(n, m, self.n, self.m).flat(self.n)]
    }

    /// Sum of all entries.
    pub fn sum(&self) -> i64 {
        self.values.iter().map(|&v| v as i64).sum()
    }

    /// Raw m-major values.
    pub fn values(&self) -> &[i8] {
        &self.values
    }
}

/// The forcing constant for the step κ(n−1, m+1) − κ(n, m) at canonical (n, m).
fn kappa_step(n: usize, m: usize, big_n: usize, big_m: usize) -> i8 {
    let one_n = 1 % big_n;
    let neg_m = big_m - 1;
    match (n, m) {
        _ if (n, m) == (one_n, neg_m) => -1,
        _ if (n, m) == (one_n, 0) => 1,
        _ if (n, m) == (0, neg_m) => 1,
        _ if (n, m) == (0, 0) => -1,
        _ => 0,
    }
}

/// The forcing constant for the step ρ(n−1, m+1) − ρ(n, m) at canonical (n, m).
fn rho_step(n: usize, m: usize, big_n: usize, big_m: usize) -> i8 {
    let one_n = 1 % big_n;
    let neg_n = big_n - 1;
    let neg_m = big_m - 1;
    match (n, m) {
        _ if (n, m) == (neg_n, neg_m) => 1,
        _ if (n, m) == (one_n, 0) => 1,
        _ if (n, m) == (0, neg_m) => -1,
        _ if (n, m) == (0, 0) => -1,
        _ => 0,
    }
}

fn walk<F>(n: usize, m: usize, step: F, what: &str) -> Result<Vec<i8>>
where
    F: Fn(usize, usize) -> i8,
{
    let mut values = vec![0i8; n * m];
    let (mut cn, mut cm) = (0usize, 0usize);
    let mut val = 0i8;
    for _ in 0..n * m {
        values[cm * n + cn] = val;
        val += step(cn, cm);
        cn = (cn + n - 1) % n;
        cm = (cm + 1) % m;
    }
    if (cn, cm) != (0, 0) || val != 0 {
        return Err(Error::Internal(format!(
            "{what} walk did not close on the {n}x{m} torus (end value {val})"
        )));
    }
    Ok(values)
}

fn check_range(kind: &str, n: usize, m: usize, values: &[i8]) -> Result<()> {
    for mi in 0..m {
        for ni in 0..n {
            let v = values[mi * n + ni];
            if !(-1..=1).contains(&v) {
                return Err(Error::Internal(format!(
                    "{kind}({ni},{mi}) = {v} is outside {{-1,0,1}}"
                )));
            }
        }
    }
    Ok(())
}

/// Build κ by walking the (−1,+1) cycle from κ(0,0) = 0.
pub fn build_kappa(n: usize, m: usize) -> Result<SignTable> {
    validate_dims(n, m)?;
    let values = walk(n, m, |cn, cm| kappa_step(cn, cm, n, m), "kappa")?;
    check_range("kappa", n, m, &values)?;
    let table = SignTable {
        n,
        m,
        kind: SignKind::Kappa,
        values,
    };
    // antisymmetry is a consequence of the defining relations; verify it
    for mi in 0..m as i64 {
        for ni in 0..n as i64 {
            if table.at(ni, mi) != -table.at(-ni, -mi) {
                return Err(Error::Internal(format!(
                    "kappa antisymmetry failed at ({ni},{mi})"
                )));
            }
        }
    }
    Ok(table)
}

/// Build ρ from κ: ρ(n,m) = κ(n+1,m) + κ(n,m) + [n=0,m=0] − [n=−1,m=0].
pub fn build_rho(n: usize, m: usize) -> Result<SignTable> {
    let kappa = build_kappa(n, m)?;
    let mut values = vec![0i8; n * m];
    for mi in 0..m {
        for ni in 0..n {
            let mut v = kappa.at(ni as i64 + 1, mi as i64) + kappa.at(ni as i64, mi as i64);
            if (ni, mi) == (0, 0) {
                v += 1;
            }
            if (ni, mi) == (n - 1, 0) {
                v -= 1;
            }
            values[mi * n + ni] = v;
        }
    }
    check_range("rho", n, m, &values)?;
    let table = SignTable {
        n,
        m,
        kind: SignKind::Rho,
        values,
    };
    // the derived table must satisfy its own difference relation
    for mi in 0..m {
        for ni in 0..n {
            let d = table.at(ni as i64 - 1, mi as i64 + 1) - table.at(ni as i64, mi as i64);
            if d != rho_step(ni, mi, n, m) {
                return Err(Error::Internal(format!(
                    "rho difference relation failed at ({ni},{mi}) on the {n}x{m} torus"
                )));
            }
        }
    }
    Ok(table)
}

/// Build φ from ρ: φ(n,m) = −ρ(−n−1,−m) − ρ(−n,−m).
pub fn build_phi(n: usize, m: usize) -> Result<SignTable> {
    let rho = build_rho(n, m)?;
    let mut values = vec![0i8; n * m];
    for mi in 0..m {
        for ni in 0..n {
            let v = -rho.at(-(ni as i64) - 1, -(mi as i64)) - rho.at(-(ni as i64), -(mi as i64));
            values[mi * n + ni] = v;
        }
    }
    // the construction keeps φ in {−1,0,1} empirically; surface loudly if not
    check_range("phi", n, m, &values)?;
    Ok(SignTable {
        n,
        m,
        kind: SignKind::Phi,
        values,
    })
}

/// The two possible shapes of the κ table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EuclidCase {
    Case1,
    Case2,
}

impl std::fmt::Display for EuclidCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EuclidCase::Case1 => write!(f, "case1"),
            EuclidCase::Case2 => write!(f, "case2"),
        }
    }
}

/// Predict the case from the parity of the division-step count of the
/// Euclidean algorithm on the ordered pair (N, M): an even count gives
/// Case 1, an odd count Case 2. The parity→case mapping is calibrated against
/// `sequence_case` (see the tests and the acceptance suite).
pub fn euclid_case(n: usize, m: usize) -> Result<EuclidCase> {
    validate_dims(n, m)?;
    let (mut a, mut b) = (n, m);
    let mut steps = 0usize;
    while b != 0 {
        (a, b) = (b, a % b);
        steps += 1;
    }
    let _ = a;
    Ok(if steps % 2 == 0 {
        EuclidCase::Case1
    } else {
        EuclidCase::Case2
    })
}

/// Decide the case by direct enumeration: walk the sequence (−1,1), (−2,2), …
/// on the torus; Case 1 iff (1, 0) is reached strictly before (−1, 0).
/// (On tori with N = 2 the two targets coincide, which lands in Case 2.)
pub fn sequence_case(n: usize, m: usize) -> Result<EuclidCase> {
    validate_dims(n, m)?;
    let target_plus = canonical_index(1, 0, n, m);
    let target_minus = canonical_index(-1, 0, n, m);
    let mut first_plus = None;
    let mut first_minus = None;
    for a in 1..=(n * m) as i64 {
        let p = canonical_index(-a, a, n, m);
        if p == target_plus && first_plus.is_none() {
            first_plus = Some(a);
        }
        if p == target_minus && first_minus.is_none() {
            first_minus = Some(a);
        }
    }
    let (tp, tm) = (
        first_plus.ok_or_else(|| Error::Internal("(1,0) never reached".into()))?,
        first_minus.ok_or_else(|| Error::Internal("(-1,0) never reached".into()))?,
    );
    Ok(if tp < tm {
        EuclidCase::Case1
    } else {
        EuclidCase::Case2
    })
}
