//! Condition (C) for integer cohomological data.
//!
//! The symplectic class and the first Chern class are given by their values on
//! a basis of `H_2(M, Z)/torsion`. Condition (C) holds iff `c1` takes even
//! values on the kernel sublattice of `[omega]`. The kernel basis comes from a
//! column-style Hermite reduction of the (denominator-cleared) row vector
//! `omega`: unimodular column operations bring it to `(g, 0, ..., 0)` and the
//! trailing columns of the transform span the kernel over `Z`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyData {
    pub basis_rank: usize,
    /// Values of `[omega]/2pi` on the basis, exact rationals.
    pub omega: Vec<BigRational>,
    /// Values of `c_1(TM)` on the basis.
    pub c1: Vec<BigInt>,
}

/// Result of the lattice check, with the data needed to explain a verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub satisfied: bool,
    pub kernel_basis: Vec<Vec<BigInt>>,
    /// A kernel vector on which `c1` is odd, when the condition fails.
    pub witness: Option<Vec<BigInt>>,
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`. Decimal or exponent notation is refused:
/// parity questions need exact input.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.contains(['.', 'e', 'E']) {
        return Err(Error::Input(format!(
            "'{s}' looks like a floating-point value; write rationals as p/q"
        )));
    }
    let bad = || Error::Input(format!("cannot parse '{s}' as a rational"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Input(format!("zero denominator in '{s}'")));
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

impl CohomologyData {
    pub fn new(omega: Vec<BigRational>, c1: Vec<BigInt>) -> Result<Self> {
        let data = Self {
            basis_rank: omega.len(),
            omega,
            c1,
        };
        data.validate()?;
        Ok(data)
    }

    /// Convenience constructor from string rationals and integers.
    pub fn parse(omega: &[&str], c1: &[i64]) -> Result<Self> {
        let omega = omega
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(omega, c1.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.len() != self.basis_rank || self.c1.len() != self.basis_rank {
            return Err(Error::Input(format!(
                "length mismatch: basis_rank = {}, omega has {}, c1 has {}",
                self.basis_rank,
                self.omega.len(),
                self.c1.len()
            )));
        }
        if self.basis_rank > 0 && self.omega.iter().all(Zero::is_zero) {
            return Err(Error::Input(
                "omega vanishes on every basis class".to_string(),
            ));
        }
        Ok(())
    }

    /// `omega` scaled by the lcm of its denominators.
    fn integer_omega(&self) -> Vec<BigInt> {
        let lcm = self
            .omega
            .iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        self.omega
            .iter()
            .map(|r| (r * BigRational::from_integer(lcm.clone())).to_integer())
            .collect()
    }
}

/// Extended gcd with non-negative `g`: `x*a + y*b = g`.
fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Integer basis of `{v in Z^r : <row, v> = 0}`.
pub fn integer_kernel(row: &[BigInt]) -> Vec<Vec<BigInt>> {
    let r = row.len();
    if r == 0 {
        return Vec::new();
    }
    // Columns of the unimodular transform.
    let mut cols: Vec<Vec<BigInt>> = (0..r)
        .map(|j| {
            (0..r)
                .map(|i| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut lead = row[0].clone();
    for j in 1..r {
        let aj = &row[j];
        if aj.is_zero() {
            continue;
        }
        let (g, x, y) = ext_gcd(&lead, aj);
        let p = &lead / &g;
        let q = aj / &g;
        let c0 = cols[0].clone();
        let cj = cols[j].clone();
        cols[0] = c0.iter().zip(&cj).map(|(a, b)| &x * a + &y * b).collect();
        cols[j] = c0.iter().zip(&cj).map(|(a, b)| &p * b - &q * a).collect();
        lead = g;
    }
    if lead.is_zero() {
        // Zero row: the whole lattice is the kernel.
        return cols;
    }
    cols.into_iter().skip(1).collect()
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn analyze_condition_c(data: &CohomologyData) -> Result<ConditionReport> {
    data.validate()?;
    let kernel = integer_kernel(&data.integer_omega());
    let witness = kernel
        .iter()
        .find(|v| dot(&data.c1, v).is_odd())
        .cloned();
    Ok(ConditionReport {
        satisfied: witness.is_none(),
        kernel_basis: kernel,
        witness,
    })
}

pub fn check_condition_c(data: &CohomologyData) -> Result<bool> {
    analyze_condition_c(data).map(|r| r.satisfied)
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.satisfied {
            write!(f, "satisfied")
        } else {
            write!(f, "violated")?;
            if let Some(w) = &self.witness {
                let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, " (witness: ({}))", parts.join(", "))?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blow_up_same_parity_is_satisfied() {
        let d = CohomologyData::parse(&["3", "1"], &[3, -1]).unwrap();
        let r = analyze_condition_c(&d).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.kernel_basis.len(), 1);
        let v = &r.kernel_basis[0];
        // Spans the same line as (1, -3).
        assert_eq!(&v[0] * BigInt::from(-3), v[1].clone());
        assert_eq!(dot(&d.c1, v).abs(), BigInt::from(6));
    }

    #[test]
    fn blow_up_mixed_parity_is_violated() {
        let d = CohomologyData::parse(&["2", "1"], &[3, -1]).unwrap();
        let r = analyze_condition_c(&d).unwrap();
        assert!(!r.satisfied);
        let w = r.witness.clone().unwrap();
        assert_eq!(dot(&d.c1, &w).abs(), BigInt::from(5));
        assert!(r.to_string().starts_with("violated"));
    }

    #[test]
    fn rank_one_has_trivial_kernel() {
        let d = CohomologyData::parse(&["1"], &[2]).unwrap();
        let r = analyze_condition_c(&d).unwrap();
        assert!(r.satisfied && r.kernel_basis.is_empty());
        // Odd c1 is fine too: nothing to test.
        assert!(check_condition_c(&CohomologyData::parse(&["5/7"], &[1]).unwrap()).unwrap());
    }

    #[test]
    fn empty_basis_is_vacuous() {
        let d = CohomologyData::new(vec![], vec![]).unwrap();
        assert!(check_condition_c(&d).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("2/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(parse_rational(" -3/6 ").unwrap(), BigRational::new((-1).into(), 2.into()));
        let mismatch = CohomologyData {
            basis_rank: 2,
            omega: vec![BigRational::one()],
            c1: vec![BigInt::one(), BigInt::one()],
        };
        assert!(matches!(check_condition_c(&mismatch), Err(Error::Input(_))));
        assert!(CohomologyData::parse(&["0", "0"], &[1, 1]).is_err());
    }

    #[test]
    fn rational_omega_is_cleared() {
        // omega = (1/2, 1/3) ~ (3, 2): kernel (2, -3) -> c1 value 2*1 - 3*1 = -1.
        let d = CohomologyData::parse(&["1/2", "1/3"], &[1, 1]).unwrap();
        assert!(!check_condition_c(&d).unwrap());
    }

    #[test]
    fn kernel_is_unimodular_complement() {
        let row: Vec<BigInt> = [6, 10, 15].iter().map(|&x| BigInt::from(x)).collect();
        let k = integer_kernel(&row);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(dot(&row, v).is_zero());
        }
    }
}
