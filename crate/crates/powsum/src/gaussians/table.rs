//! Moment tables: `x1,x2,...; order; value` lines from an external source.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::MomentOracle;
use crate::algebra::{format_rational, parse_rational, Field, Matrix};
use crate::error::{Error, Result};
use crate::multipoly::{monomial_enumeration, MonomialKind, SparsePoly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentEntry {
    pub x: Vec<BigRational>,
    pub order: usize,
    pub value: BigRational,
}

#[derive(Clone, Debug, Default)]
pub struct MomentTable {
    pub n: usize,
    pub entries: Vec<MomentEntry>,
    index: HashMap<(Vec<BigRational>, usize), usize>,
}

impl MomentTable {
    pub fn new(n: usize, entries: Vec<MomentEntry>) -> Result<Self> {
        let mut index: HashMap<(Vec<BigRational>, usize), usize> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if e.x.len() != n {
                return Err(Error::DimensionMismatch(format!("entry {i} has {} coordinates, expected {n}", e.x.len())));
            }
            if let Some(&j) = index.get(&(e.x.clone(), e.order)) {
                if entries[j].value != e.value {
                    return Err(Error::InvalidInput(format!("entries {j} and {i} disagree on the same moment")));
                }
            }
            index.insert((e.x.clone(), e.order), i);
        }
        Ok(MomentTable { n, entries, index })
    }

    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(';').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected `x; order; value`", lineno + 1)));
            }
            let x = parts[0].split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
            let order = parts[1]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: order: {e}", lineno + 1)))?;
            entries.push(MomentEntry { x, order, value: parse_rational(parts[2])? });
        }
        let n = entries.first().map_or(0, |e| e.x.len());
        if n == 0 {
            return Err(Error::Parse("moment table has no entries".into()));
        }
        MomentTable::new(n, entries)
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let xs: Vec<String> = e.x.iter().map(format_rational).collect();
            let _ = writeln!(out, "{}; {}; {}", xs.join(","), e.order, format_rational(&e.value));
        }
        out
    }

    /// Queries `oracle` at every point for every order.
    pub fn from_oracle(oracle: &dyn MomentOracle, points: &[Vec<BigRational>], orders: &[usize]) -> Result<Self> {
        let mut entries = Vec::with_capacity(points.len() * orders.len());
        for x in points {
            for &r in orders {
                entries.push(MomentEntry { x: x.clone(), order: r, value: oracle.moment(x, r)? });
            }
        }
        MomentTable::new(oracle.dim(), entries)
    }

    pub fn entries_of_order(&self, r: usize) -> impl Iterator<Item = &MomentEntry> {
        self.entries.iter().filter(move |e| e.order == r)
    }

    /// `f_m(x) = m!/(2m)! E[<x, Y>^(2m)]` interpolated over `field` from the
    /// order-`2m` entries, as a dense homogeneous polynomial. Needs at least
    /// as many entries in general position as there are degree-`2m`
    /// monomials; `Ok(None)` means a denominator vanishes mod the
    /// characteristic.
    pub fn interpolate_power<F: Field>(&self, field: &F, m: usize) -> Result<Option<SparsePoly<F>>> {
        let monos = monomial_enumeration(self.n, 2 * m, MonomialKind::All);
        let rows: Vec<&MomentEntry> = self.entries_of_order(2 * m).collect();
        if rows.len() < monos.len() {
            return Err(Error::InvalidInput(format!(
                "interpolating order {} in {} variables needs {} entries, the table has {}",
                2 * m,
                self.n,
                monos.len(),
                rows.len()
            )));
        }
        let scale: BigUint = (m + 1..=2 * m).fold(BigUint::one(), |a, i| a * BigUint::from(i));
        let Some(scale) = field.from_rational(&BigRational::from_integer(scale.into())).and_then(|s| field.inv(&s)) else {
            return Ok(None);
        };
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        for e in rows {
            let Some(x) = e.x.iter().map(|v| field.from_rational(v)).collect::<Option<Vec<_>>>() else {
                return Ok(None);
            };
            let Some(v) = field.from_rational(&e.value) else {
                return Ok(None);
            };
            a.push(monos.iter().map(|mo| mono_value(field, mo.exps(), &x)).collect());
            b.push(field.mul(&v, &scale));
        }
        let coeffs = Matrix::from_rows(field, a)?.solve_unique(&b).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::InvalidInput(format!("table points are not unisolvent: {msg}")),
            other => other,
        })?;
        Ok(Some(SparsePoly::from_coeff_vector(field, self.n, &monos, &coeffs)))
    }
}

fn mono_value<F: Field>(field: &F, exps: &[u32], x: &[F::Elem]) -> F::Elem {
    exps.iter().zip(x).fold(field.one(), |acc, (&e, v)| field.mul(&acc, &field.pow(v, e as u64)))
}

impl MomentOracle for MomentTable {
    fn dim(&self) -> usize {
        self.n
    }

    fn moment(&self, x: &[BigRational], r: usize) -> Result<BigRational> {
        if r % 2 == 1 {
            return Ok(BigRational::zero());
        }
        match self.index.get(&(x.to_vec(), r)) {
            Some(&i) => Ok(self.entries[i].value.clone()),
            None => Err(Error::InvalidInput(format!(
                "moment of order {r} at ({}) is not in the table",
                x.iter().map(format_rational).collect::<Vec<_>>().join(",")
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Fp64;
    use crate::gaussians::{random_mixture, random_rational_point};
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn parse_format_round_trip() {
        let text = "# header\n1,0; 2; 1\n1,0; 4; 3\n\n1/2,-3; 2; 5/4\n";
        let t = MomentTable::parse(text).unwrap();
        assert_eq!(t.n, 2);
        assert_eq!(t.entries.len(), 3);
        let back = MomentTable::parse(&t.format()).unwrap();
        assert_eq!(back.entries, t.entries);
        let r = |v: i64| BigRational::from_integer(BigInt::from(v));
        assert_eq!(t.moment(&[r(1), r(0)], 4).unwrap(), r(3));
        assert_eq!(t.moment(&[r(1), r(0)], 3).unwrap(), r(0));
        assert!(t.moment(&[r(0), r(1)], 2).is_err());
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(MomentTable::parse("1,2; 2").is_err());
        assert!(MomentTable::parse("1,2; x; 3").is_err());
        assert!(MomentTable::parse("1,2; 2; 3\n1; 2; 3").is_err());
        assert!(MomentTable::parse("1,2; 2; 3\n1,2; 2; 4").is_err());
        assert!(MomentTable::parse("").is_err());
    }

    #[test]
    fn interpolation_recovers_the_power_sum() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let g = random_mixture(2, 2, 3, &mut rng).unwrap();
        let m = 2;
        let pts: Vec<_> = (0..12).map(|_| random_rational_point(2, 20, &mut rng)).collect();
        let table = MomentTable::from_oracle(&g, &pts, &[2, 4]).unwrap();
        let f = Fp64::new(&1_000_000_007u64.into()).unwrap();
        let p = table.interpolate_power(&f, m).unwrap().unwrap();
        let mut expected = SparsePoly::zero(&f, 2);
        for i in 0..2 {
            let w = f.from_rational(&g.components[i].weight).unwrap();
            expected = expected.add(&g.quadratic(&f, i).unwrap().pow(m as u32).scale(&w)).unwrap();
        }
        assert_eq!(p, expected);
        let short = MomentTable::from_oracle(&g, &pts[..3], &[4]).unwrap();
        assert!(short.interpolate_power(&f, m).is_err());
    }
}
