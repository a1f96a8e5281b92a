//! The circuit representation `f = sum_i c_i Q_i^m`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{Field, FieldSpec};
use crate::blackbox::{BlackBox, PowerSumBox};
use crate::error::{Error, Result};
use crate::multipoly::{SparsePoly, SparsePolyJson};

#[derive(Clone, Debug)]
pub struct PowerSumCircuit<F: Field> {
    field: F,
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub terms: Vec<(F::Elem, SparsePoly<F>)>,
}

impl<F: Field> PowerSumCircuit<F> {
    pub fn new(field: &F, n: usize, t: usize, m: usize, terms: Vec<(F::Elem, SparsePoly<F>)>) -> Result<Self> {
        if t == 0 || m == 0 {
            return Err(Error::InvalidInput("t and m must be positive".into()));
        }
        for (i, (c, q)) in terms.iter().enumerate() {
            if field.is_zero(c) {
                return Err(Error::InvalidInput(format!("term {i} has a zero coefficient")));
            }
            if q.nvars() != n {
                return Err(Error::InvalidInput(format!("term {i} lives in {} variables, expected {n}", q.nvars())));
            }
            if q.is_zero() || q.homogeneous_degree() != Some(t as u32) {
                return Err(Error::InvalidInput(format!("term {i} is not homogeneous of degree {t}")));
            }
        }
        Ok(PowerSumCircuit { field: field.clone(), n, t, m, terms })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn d(&self) -> usize {
        self.t * self.m
    }

    pub fn s(&self) -> usize {
        self.terms.len()
    }

    /// White-box oracle answering from the `Q_i`.
    pub fn oracle(&self) -> BlackBox<F> {
        Arc::new(PowerSumBox::new(&self.field, self.n, self.m as u32, self.terms.clone()))
    }

    pub fn evaluate(&self, x: &[F::Elem]) -> Result<F::Elem> {
        let f = &self.field;
        let mut acc = f.zero();
        for (c, q) in &self.terms {
            let v = f.pow(&q.evaluate(x)?, self.m as u64);
            f.mul_add_assign(&mut acc, c, &v);
        }
        Ok(acc)
    }

    /// The dense expansion; only sensible for small instances.
    pub fn expand(&self) -> SparsePoly<F> {
        let mut acc = SparsePoly::zero(&self.field, self.n);
        for (c, q) in &self.terms {
            acc = acc.add(&q.pow(self.m as u32).scale(c)).expect("same ring");
        }
        acc
    }

    pub fn to_json(&self) -> CircuitJson {
        CircuitJson {
            field: self.field.spec(),
            n: self.n,
            t: self.t,
            m: self.m,
            terms: self
                .terms
                .iter()
                .map(|(c, q)| TermJson { coeff: self.field.format(c), q: q.to_json() })
                .collect(),
        }
    }

    pub fn from_json(field: &F, j: &CircuitJson) -> Result<Self> {
        if j.field != field.spec() {
            return Err(Error::InvalidInput("circuit was written over a different field".into()));
        }
        let terms = j
            .terms
            .iter()
            .map(|t| Ok((field.parse(&t.coeff)?, SparsePoly::from_json(field, &t.q)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, j.n, j.t, j.m, terms)
    }
}

/// `{"field": .., "n": .., "t": .., "m": .., "terms": [{"coeff": "..", "Q": ..}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub field: FieldSpec,
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    #[serde(rename = "Q")]
    pub q: SparsePolyJson,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;
    use crate::blackbox::{eval1, random_point};
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn oracle_expansion_and_json_agree() {
        let f = PrimeField::<1>::new(&BigUint::from(1_000_000_007u64)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(81);
        let terms = (0..2).map(|i| (f.from_i64(i + 2), SparsePoly::random_homogeneous(&f, 3, 2, &mut rng))).collect();
        let c = PowerSumCircuit::new(&f, 3, 2, 3, terms).unwrap();
        let x = random_point(&f, 3, &mut rng);
        let direct = c.evaluate(&x).unwrap();
        assert_eq!(eval1(c.oracle().as_ref(), &x), direct);
        assert_eq!(c.expand().evaluate(&x).unwrap(), direct);
        let text = serde_json::to_string(&c.to_json()).unwrap();
        assert!(text.contains("\"Q\""));
        let back = PowerSumCircuit::from_json(&f, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.evaluate(&x).unwrap(), direct);
    }

    #[test]
    fn rejects_malformed_terms() {
        let f = PrimeField::<1>::new(&BigUint::from(101u64)).unwrap();
        let x = SparsePoly::var(&f, 2, 0);
        assert!(PowerSumCircuit::new(&f, 2, 2, 2, vec![(f.one(), x.clone())]).is_err());
        assert!(PowerSumCircuit::new(&f, 2, 1, 2, vec![(f.zero(), x.clone())]).is_err());
        assert!(PowerSumCircuit::new(&f, 3, 1, 2, vec![(f.one(), x)]).is_err());
    }
}
