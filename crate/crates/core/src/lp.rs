//! Exact feasibility of `A x = b, x >= 0` over the rationals.
//!
//! Phase-one revised simplex with one artificial variable per row and
//! Bland's rule for both the entering and the leaving variable, so the
//! method terminates even on the highly degenerate, rank-deficient systems
//! that decomposition problems produce. The verdict always comes with a
//! certificate that can be checked by substitution alone.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, zero, Rational};

/// Equality constraints over nonnegative variables, stored sparsely.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LpProblem {
    n_vars: usize,
    rows: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
}

impl LpProblem {
    pub fn new(n_vars: usize) -> Self {
        LpProblem {
            n_vars,
            ..Default::default()
        }
    }

    /// Dense constructor; every row must have `n_vars` entries.
    pub fn from_dense(n_vars: usize, rows: Vec<Vec<Rational>>, rhs: Vec<Rational>) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::MalformedLp(format!(
                "{} rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        let mut p = LpProblem::new(n_vars);
        for (i, (row, b)) in rows.into_iter().zip(rhs).enumerate() {
            if row.len() != n_vars {
                return Err(Error::MalformedLp(format!(
                    "row {i} has {} entries, expected {n_vars}",
                    row.len()
                )));
            }
            let sparse = row
                .into_iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .collect();
            p.add_row(sparse, b)?;
        }
        Ok(p)
    }

    /// Adds `sum coeffs = rhs`. Repeated indices are summed.
    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) -> Result<()> {
        let mut row: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|(j, _)| *j);
        for (j, a) in coeffs {
            if j >= self.n_vars {
                return Err(Error::MalformedLp(format!(
                    "variable {j} out of range for {} variables",
                    self.n_vars
                )));
            }
            match row.last_mut() {
                Some((k, acc)) if *k == j => *acc += a,
                _ => row.push((j, a)),
            }
        }
        row.retain(|(_, a)| !a.is_zero());
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.rows[i]
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    fn columns(&self) -> Vec<Vec<(usize, Rational)>> {
        let mut cols = vec![Vec::new(); self.n_vars];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, a) in row {
                cols[*j].push((i, a.clone()));
            }
        }
        cols
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpCertificate {
    /// A nonnegative point satisfying every row.
    Feasible { point: Vec<Rational> },
    /// Row multipliers `y` with `y^T A <= 0` and `y^T b > 0`.
    Infeasible { farkas: Vec<Rational> },
}

impl LpCertificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpCertificate::Feasible { .. })
    }

    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpCertificate::Feasible { point } => Some(point),
            LpCertificate::Infeasible { .. } => None,
        }
    }

    pub fn farkas(&self) -> Option<&[Rational]> {
        match self {
            LpCertificate::Infeasible { farkas } => Some(farkas),
            LpCertificate::Feasible { .. } => None,
        }
    }

    /// Re-checks the certificate against `p` by direct substitution.
    pub fn verify(&self, p: &LpProblem) -> bool {
        match self {
            LpCertificate::Feasible { point } => {
                point.len() == p.n_vars
                    && point.iter().all(|v| !v.is_negative())
                    && p.rows.iter().zip(&p.rhs).all(|(row, b)| {
                        let lhs: Rational = row.iter().map(|(j, a)| a * &point[*j]).sum();
                        lhs == *b
                    })
            }
            LpCertificate::Infeasible { farkas } => {
                if farkas.len() != p.n_rows() {
                    return false;
                }
                let mut combo = vec![zero(); p.n_vars];
                for (row, y) in p.rows.iter().zip(farkas) {
                    if y.is_zero() {
                        continue;
                    }
                    for (j, a) in row {
                        combo[*j] += a * y;
                    }
                }
                let yb: Rational = p.rhs.iter().zip(farkas).map(|(b, y)| b * y).sum();
                combo.iter().all(|c| !c.is_positive()) && yb.is_positive()
            }
        }
    }

    /// Parses the text produced by `Display`. `len` is the dense length
    /// (variables for a feasible point, rows for a Farkas vector).
    pub fn parse(text: &str, len: usize) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, head) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty certificate"))?;
        let feasible = match head {
            "feasible" => true,
            "infeasible" => false,
            other => return Err(Error::parse(1, format!("unknown verdict `{other}`"))),
        };
        let mut values = vec![zero(); len];
        for (line, body) in lines {
            let (idx, v) = body
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "missing `=`"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .ok()
                .filter(|&i| i < len)
                .ok_or_else(|| Error::parse(line, format!("bad index `{}`", idx.trim())))?;
            values[idx] = parse_rational(v)
                .ok_or_else(|| Error::parse(line, format!("bad rational `{}`", v.trim())))?;
        }
        Ok(if feasible {
            LpCertificate::Feasible { point: values }
        } else {
            LpCertificate::Infeasible { farkas: values }
        })
    }
}

impl fmt::Display for LpCertificate {
    /// `feasible` or `infeasible`, then sparse `index = value` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, values) = match self {
            LpCertificate::Feasible { point } => ("feasible", point),
            LpCertificate::Infeasible { farkas } => ("infeasible", farkas),
        };
        writeln!(f, "{head}")?;
        for (i, v) in values.iter().enumerate() {
            if !v.is_zero() {
                writeln!(f, "{i} = {v}")?;
            }
        }
        Ok(())
    }
}

/// Decides feasibility of `p` exactly.
pub fn lp_feasible(p: &LpProblem) -> LpCertificate {
    let m = p.n_rows();
    let n = p.n_vars;
    // Rows with negative right-hand side are negated so the all-artificial
    // basis starts feasible.
    let flip: Vec<bool> = p.rhs.iter().map(|b| b.is_negative()).collect();
    let mut cols = p.columns();
    for col in &mut cols {
        for (i, a) in col.iter_mut() {
            if flip[*i] {
                *a = -a.clone();
            }
        }
    }
    let int_cols: Vec<IntColumn> = cols.iter().map(|c| IntColumn::new(c)).collect();
    let mut xb: Vec<Rational> = p.rhs.iter().map(|b| b.abs()).collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut is_basic = vec![false; n + m];
    for &j in &basis {
        is_basic[j] = true;
    }
    let mut binv: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = vec![zero(); m];
            row[i] = Rational::one();
            row
        })
        .collect();

    loop {
        // Duals of the phase-one objective (sum of artificials).
        let mut y = vec![zero(); m];
        for (i, &j) in basis.iter().enumerate() {
            if j >= n {
                for (k, v) in binv[i].iter().enumerate() {
                    if !v.is_zero() {
                        y[k] += v;
                    }
                }
            }
        }

        let entering = price(&int_cols, &y, &is_basic, n);

        let Some(enter) = entering else {
            let objective: Rational = basis
                .iter()
                .zip(&xb)
                .filter(|(&j, _)| j >= n)
                .map(|(_, v)| v)
                .sum();
            if objective.is_zero() {
                let mut point = vec![zero(); n];
                for (&j, v) in basis.iter().zip(&xb) {
                    if j < n {
                        point[j] = v.clone();
                    }
                }
                return LpCertificate::Feasible { point };
            }
            let farkas = y
                .into_iter()
                .zip(&flip)
                .map(|(v, &f)| if f { -v } else { v })
                .collect();
            return LpCertificate::Infeasible { farkas };
        };

        // Entering column in the current basis.
        let direction: Vec<Rational> = (0..m)
            .map(|i| {
                if enter < n {
                    cols[enter]
                        .iter()
                        .filter(|(k, _)| !binv[i][*k].is_zero())
                        .map(|(k, a)| &binv[i][*k] * a)
                        .sum()
                } else {
                    binv[i][enter - n].clone()
                }
            })
            .collect();

        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !direction[i].is_positive() {
                continue;
            }
            let ratio = &xb[i] / &direction[i];
            let better = match &leave {
                None => true,
                Some((r, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*r]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // The phase-one objective is bounded below by zero.
        let (r, _) = leave.expect("phase one cannot be unbounded");

        let pivot = direction[r].clone();
        for v in binv[r].iter_mut() {
            if !v.is_zero() {
                *v /= &pivot;
            }
        }
        xb[r] /= &pivot;
        let pivot_row = binv[r].clone();
        let pivot_x = xb[r].clone();
        for i in 0..m {
            if i == r || direction[i].is_zero() {
                continue;
            }
            let factor = &direction[i];
            for (v, pr) in binv[i].iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *v -= factor * pr;
                }
            }
            xb[i] -= factor * &pivot_x;
        }
        is_basic[basis[r]] = false;
        is_basic[enter] = true;
        basis[r] = enter;
    }
}

/// A structural column scaled by a positive integer so that every entry is
/// an integer. Structural costs are zero, so the sign of a reduced cost is
/// unchanged by the scaling.
struct IntColumn {
    big: Vec<(usize, BigInt)>,
    small: Option<Vec<(usize, i64)>>,
}

impl IntColumn {
    fn new(col: &[(usize, Rational)]) -> Self {
        let scale = col
            .iter()
            .fold(BigInt::one(), |acc, (_, a)| acc.lcm(a.denom()));
        let big: Vec<(usize, BigInt)> = col
            .iter()
            .map(|(i, a)| (*i, a.numer() * (&scale / a.denom())))
            .collect();
        let small = big
            .iter()
            .map(|(i, a)| fits_small(a).map(|v| (*i, v)))
            .collect();
        IntColumn { big, small }
    }
}

/// Values below 2^56 in magnitude, so that up to 2^12 products sum
/// without overflowing an i128.
fn fits_small(v: &BigInt) -> Option<i64> {
    v.to_i64().filter(|x| x.unsigned_abs() < 1 << 56)
}

/// Bland's rule: the lowest-index nonbasic variable with negative reduced
/// cost under duals `y`, or `None` at optimality.
fn price(cols: &[IntColumn], y: &[Rational], is_basic: &[bool], n: usize) -> Option<usize> {
    // y = scaled / denom with a positive common denominator.
    let denom = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled: Vec<BigInt> = y.iter().map(|v| v.numer() * (&denom / v.denom())).collect();
    let small: Option<Vec<i64>> = scaled.iter().map(fits_small).collect();
    let structural = (0..n).find(|&j| {
        if is_basic[j] {
            return false;
        }
        // Reduced cost is -(y . a_j); negative iff y . a_j > 0.
        match (&small, &cols[j].small) {
            (Some(ys), Some(col)) if col.len() <= 1 << 12 => {
                let dot: i128 = col.iter().map(|&(i, a)| a as i128 * ys[i] as i128).sum();
                dot > 0
            }
            _ => {
                let dot: BigInt = cols[j].big.iter().map(|(i, a)| a * &scaled[*i]).sum();
                dot.is_positive()
            }
        }
    });
    // Artificial column i has reduced cost 1 - y_i.
    structural.or_else(|| {
        (0..y.len())
            .map(|i| n + i)
            .find(|&j| !is_basic[j] && scaled[j - n] > denom)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn simple_feasible() {
        let p = LpProblem::from_dense(2, vec![vec![int(1), int(1)]], vec![int(1)]).unwrap();
        let cert = lp_feasible(&p);
        assert!(cert.is_feasible());
        assert!(cert.verify(&p));
    }

    #[test]
    fn negative_target_is_infeasible() {
        let p = LpProblem::from_dense(1, vec![vec![int(1)]], vec![int(-1)]).unwrap();
        let cert = lp_feasible(&p);
        assert!(!cert.is_feasible());
        assert!(cert.verify(&p));
        assert_eq!(cert.farkas().unwrap(), &[int(-1)]);
    }

    #[test]
    fn redundant_and_contradictory_rows() {
        // x + y = 1 twice, and x - y = 1/3: feasible despite the repeat.
        let rows = vec![
            vec![int(1), int(1)],
            vec![int(1), int(1)],
            vec![int(1), int(-1)],
        ];
        let p = LpProblem::from_dense(2, rows.clone(), vec![int(1), int(1), rat(1, 3)]).unwrap();
        let cert = lp_feasible(&p);
        assert_eq!(cert.point().unwrap(), &[rat(2, 3), rat(1, 3)]);
        assert!(cert.verify(&p));
        // x + y = 1 and x + y = 2.
        let q = LpProblem::from_dense(2, rows[..2].to_vec(), vec![int(1), int(2)]).unwrap();
        let cert = lp_feasible(&q);
        assert!(!cert.is_feasible() && cert.verify(&q));
    }

    #[test]
    fn empty_system_is_feasible() {
        let p = LpProblem::new(3);
        assert_eq!(lp_feasible(&p).point().unwrap(), &[zero(), zero(), zero()]);
    }

    #[test]
    fn malformed_dimensions() {
        assert!(LpProblem::from_dense(2, vec![vec![int(1)]], vec![int(1)]).is_err());
        assert!(LpProblem::from_dense(1, vec![vec![int(1)]], vec![]).is_err());
        assert!(LpProblem::new(1)
            .add_row(vec![(1, int(1))], int(0))
            .is_err());
    }

    #[test]
    fn tampered_certificates_fail() {
        let p = LpProblem::from_dense(2, vec![vec![int(1), int(1)]], vec![int(1)]).unwrap();
        assert!(!LpCertificate::Feasible {
            point: vec![int(2), int(-1)]
        }
        .verify(&p));
        assert!(!LpCertificate::Infeasible {
            farkas: vec![int(1)]
        }
        .verify(&p));
    }

    #[test]
    fn certificate_text_roundtrip() {
        let c = LpCertificate::Feasible {
            point: vec![zero(), rat(1, 2), zero(), rat(1, 2)],
        };
        assert_eq!(c.to_string(), "feasible\n1 = 1/2\n3 = 1/2\n");
        assert_eq!(LpCertificate::parse(&c.to_string(), 4).unwrap(), c);
        let d = LpCertificate::Infeasible {
            farkas: vec![int(-1)],
        };
        assert_eq!(LpCertificate::parse(&d.to_string(), 1).unwrap(), d);
        assert!(LpCertificate::parse("feasible\n7 = 1\n", 4).is_err());
    }

    /// Beale's cycling example as a feasibility system: Bland's rule must
    /// still terminate with a valid certificate.
    #[test]
    fn degenerate_system_terminates() {
        let rows = vec![
            vec![rat(1, 4), int(-8), int(-1), int(9), int(1), int(0), int(0)],
            vec![
                rat(1, 2),
                int(-12),
                rat(-1, 2),
                int(3),
                int(0),
                int(1),
                int(0),
            ],
            vec![int(0), int(0), int(1), int(0), int(0), int(0), int(1)],
        ];
        let p = LpProblem::from_dense(7, rows, vec![int(0), int(0), int(1)]).unwrap();
        let cert = lp_feasible(&p);
        assert!(cert.is_feasible() && cert.verify(&p));
    }
}
