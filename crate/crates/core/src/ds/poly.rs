//! Zero-read polynomial tables: all the work happens in preprocessing.
//!
//! `EvalTable` reads the tape as coefficients and stores every evaluation at
//! the powers of a fixed root of unity; `InterpTable` reads the tape as
//! evaluations at those same powers and stores every coefficient. Either one
//! can serve a request for sum_i w_i sigma^(i e) over the raw tape w via the
//! index remap in [`PolyTableKind`].

use super::{DsError, OracleTape, SystematicDs};
use crate::bits::BitString;
use crate::field::{ffft, ffft_inverse, FieldElement, PrimeField, RootOfUnity};

fn tape_elements(
    tape: &OracleTape,
    field: PrimeField,
) -> Result<Vec<FieldElement>, DsError> {
    let raw = tape.snapshot()?;
    let p = field.modulus();
    raw.iter()
        .enumerate()
        .map(|(pos, &v)| {
            if v >= p {
                Err(DsError::ValueOutOfRange { pos, value: v, domain: p })
            } else {
                Ok(field.element(v))
            }
        })
        .collect()
}

fn pack(values: &[FieldElement], width: usize) -> BitString {
    let mut advice = BitString::new();
    for v in values {
        advice.push_uint(v.value(), width);
    }
    advice
}

fn unpack_one(advice: &BitString, j: usize, width: usize) -> Result<u64, DsError> {
    advice
        .read_uint(j * width, width)
        .map_err(|_| DsError::Unanswerable { q: j })
}

/// Tape = coefficients alpha; advice = all n evaluations at sigma^j.
#[derive(Debug, Clone)]
pub struct EvalTable {
    root: RootOfUnity,
}

impl EvalTable {
    pub fn new(root: RootOfUnity) -> Self {
        Self { root }
    }

    pub fn root(&self) -> RootOfUnity {
        self.root
    }
}

impl SystematicDs for EvalTable {
    fn name(&self) -> String {
        format!("eval_table(p={},n={})", self.root.field().modulus(), self.root.order())
    }
    fn n(&self) -> usize {
        self.root.order() as usize
    }
    fn s_bits(&self) -> usize {
        self.n() * self.root.field().element_bits()
    }
    fn t_queries(&self) -> usize {
        0
    }
    fn adaptive(&self) -> bool {
        false
    }
    fn query_set(&self, _q: usize) -> Option<Vec<usize>> {
        Some(Vec::new())
    }

    fn preprocess_impl(&self, input: &OracleTape) -> Result<BitString, DsError> {
        let coeffs = tape_elements(input, self.root.field())?;
        let values = ffft(&coeffs, &self.root)?;
        Ok(pack(&values, self.root.field().element_bits()))
    }

    fn answer_impl(
        &self,
        advice: &BitString,
        q: usize,
        _oracle: &mut OracleTape,
    ) -> Result<u64, DsError> {
        unpack_one(advice, q, self.root.field().element_bits())
    }
}

/// Tape = evaluations at sigma^i (points fixed in advance); advice = all n
/// coefficients of the interpolating polynomial.
#[derive(Debug, Clone)]
pub struct InterpTable {
    root: RootOfUnity,
}

impl InterpTable {
    pub fn new(root: RootOfUnity) -> Self {
        Self { root }
    }

    pub fn root(&self) -> RootOfUnity {
        self.root
    }
}

impl SystematicDs for InterpTable {
    fn name(&self) -> String {
        format!("interp_table(p={},n={})", self.root.field().modulus(), self.root.order())
    }
    fn n(&self) -> usize {
        self.root.order() as usize
    }
    fn s_bits(&self) -> usize {
        self.n() * self.root.field().element_bits()
    }
    fn t_queries(&self) -> usize {
        0
    }
    fn adaptive(&self) -> bool {
        false
    }
    fn query_set(&self, _q: usize) -> Option<Vec<usize>> {
        Some(Vec::new())
    }

    fn preprocess_impl(&self, input: &OracleTape) -> Result<BitString, DsError> {
        let values = tape_elements(input, self.root.field())?;
        let coeffs = ffft_inverse(&values, &self.root)?;
        Ok(pack(&coeffs, self.root.field().element_bits()))
    }

    fn answer_impl(
        &self,
        advice: &BitString,
        q: usize,
        _oracle: &mut OracleTape,
    ) -> Result<u64, DsError> {
        unpack_one(advice, q, self.root.field().element_bits())
    }
}

/// Which polynomial table backs a scheme pass. Both kinds can produce the
/// power sum sum_i w_i sigma^(i e) over the raw tape w: an evaluation table
/// returns it directly at index e, while an interpolation table holds
/// (1/n) sum_i w_i sigma^(-i j) at index j, so index n - e recovers the sum
/// up to a factor of n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyTableKind {
    Eval,
    Interp,
}

impl PolyTableKind {
    pub fn build(self, root: RootOfUnity) -> Box<dyn SystematicDs> {
        match self {
            PolyTableKind::Eval => Box::new(EvalTable::new(root)),
            PolyTableKind::Interp => Box::new(InterpTable::new(root)),
        }
    }

    /// Index to query for the power sum at exponent e.
    pub fn power_sum_query(self, n: u64, e: u64) -> usize {
        let e = e % n;
        match self {
            PolyTableKind::Eval => e as usize,
            PolyTableKind::Interp => ((n - e) % n) as usize,
        }
    }

    /// Rescales the raw answer from [`Self::power_sum_query`]'s index into
    /// the power sum itself.
    pub fn power_sum_unscale(self, field: PrimeField, n: u64, raw: u64) -> u64 {
        match self {
            PolyTableKind::Eval => raw,
            PolyTableKind::Interp => field.mul(n % field.modulus(), raw),
        }
    }
}

impl std::fmt::Display for PolyTableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolyTableKind::Eval => write!(f, "eval_table"),
            PolyTableKind::Interp => write!(f, "interp_table"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ds::{answer, preprocess};
    use crate::field::{lagrange_interpolate, poly_eval};
    use rand::{Rng, SeedableRng};

    fn root_16_17() -> RootOfUnity {
        RootOfUnity::find(PrimeField::new(17).unwrap(), 16).unwrap()
    }

    fn random_tape(n: usize, p: u64, rng: &mut impl Rng) -> Vec<u64> {
        (0..n).map(|_| rng.random_range(0..p)).collect()
    }

    #[test]
    fn eval_table_identity_polynomial() {
        // p(x) = x: the table holds sigma^j itself.
        let root = root_16_17();
        let ds = EvalTable::new(root);
        let mut alpha = vec![0u64; 16];
        alpha[1] = 1;
        let mut tape = OracleTape::new(alpha);
        let advice = preprocess(&ds, &tape).unwrap();
        assert_eq!(advice.len(), 16 * 5);
        for j in 0..16u64 {
            let got = answer(&ds, &advice, j as usize, &mut tape).unwrap();
            assert_eq!(got, root.sigma().pow(j).value());
            assert!(tape.read_log().is_empty());
        }
    }

    #[test]
    fn eval_table_matches_horner_oracle() {
        let root = root_16_17();
        let field = root.field();
        let ds = EvalTable::new(root);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100);
        for _ in 0..50 {
            let alpha = random_tape(16, 17, &mut rng);
            let coeffs: Vec<FieldElement> = alpha.iter().map(|&v| field.element(v)).collect();
            let mut tape = OracleTape::new(alpha);
            let advice = preprocess(&ds, &tape).unwrap();
            for j in 0..16u64 {
                let x = root.sigma().pow(j);
                let expect = poly_eval(&coeffs, x).unwrap().value();
                assert_eq!(answer(&ds, &advice, j as usize, &mut tape).unwrap(), expect);
            }
        }
    }

    #[test]
    fn interp_table_matches_lagrange_oracle() {
        let root = root_16_17();
        let field = root.field();
        let ds = InterpTable::new(root);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        for _ in 0..50 {
            let coeffs_raw = random_tape(16, 17, &mut rng);
            let coeffs: Vec<FieldElement> =
                coeffs_raw.iter().map(|&v| field.element(v)).collect();
            let values: Vec<u64> = (0..16u64)
                .map(|i| poly_eval(&coeffs, root.sigma().pow(i)).unwrap().value())
                .collect();
            let pts: Vec<_> = values
                .iter()
                .enumerate()
                .map(|(i, &w)| (root.sigma().pow(i as u64), field.element(w)))
                .collect();
            let by_lagrange = lagrange_interpolate(&pts).unwrap();
            let mut tape = OracleTape::new(values);
            let advice = preprocess(&ds, &tape).unwrap();
            for j in 0..16 {
                let got = answer(&ds, &advice, j, &mut tape).unwrap();
                assert_eq!(got, by_lagrange[j].value());
                assert_eq!(got, coeffs_raw[j]);
            }
        }
    }

    #[test]
    fn power_sum_remap_agrees_across_kinds() {
        let root = root_16_17();
        let field = root.field();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(102);
        let w = random_tape(16, 17, &mut rng);
        for kind in [PolyTableKind::Eval, PolyTableKind::Interp] {
            let ds = kind.build(root);
            let mut tape = OracleTape::new(w.clone());
            let advice = preprocess(ds.as_ref(), &tape).unwrap();
            for e in 0..16u64 {
                // Independent direct sum: sum_i w_i sigma^(i e).
                let mut direct = 0u64;
                for (i, &wi) in w.iter().enumerate() {
                    direct = field.add(direct, field.mul(wi, field.pow(root.sigma().value(), i as u64 * e)));
                }
                let q = kind.power_sum_query(16, e);
                let raw = answer(ds.as_ref(), &advice, q, &mut tape).unwrap();
                assert_eq!(kind.power_sum_unscale(field, 16, raw), direct, "{kind} e={e}");
            }
        }
    }

    #[test]
    fn out_of_field_tape_values_are_rejected() {
        let root = root_16_17();
        let ds = EvalTable::new(root);
        let mut cells = vec![0u64; 16];
        cells[3] = 17;
        let tape = OracleTape::new(cells);
        assert_eq!(
            preprocess(&ds, &tape),
            Err(DsError::ValueOutOfRange { pos: 3, value: 17, domain: 17 })
        );
    }

    #[test]
    fn zero_read_budget_is_armed() {
        let root = root_16_17();
        let ds = EvalTable::new(root);
        let mut tape = OracleTape::new(vec![1; 16]);
        let advice = preprocess(&ds, &tape).unwrap();
        answer(&ds, &advice, 0, &mut tape).unwrap();
        assert!(tape.read_log().is_empty());
    }
}
