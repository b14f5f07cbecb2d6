//! Free noncommutative polynomials: parsing, evaluation, multilinearity,
//! variable-sorting normalization, standard polynomials, and the two-variable
//! expansion p(xy) - p(yx) of a univariate polynomial.
//!
//! Terms are kept in canonical form: no zero coefficients, pairwise distinct
//! words, words ordered by length then lexicographically. Variables are the
//! indices x1, x2, ...; coefficients live in a field domain (GF(p) or Q).

use crate::error::{AlgebraError, Result};
use crate::matrix::Matrix;
use crate::scalar::{Scalar, ScalarDomain};
use std::cmp::Ordering;
use std::fmt;

/// A word is a sequence of 1-based variable indices.
pub type Word = Vec<u32>;

fn word_cmp(a: &Word, b: &Word) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreePoly {
    domain: ScalarDomain,
    /// (coefficient, word), sorted by `word_cmp`, no zero coefficients.
    terms: Vec<(Scalar, Word)>,
}

impl FreePoly {
    pub fn zero(domain: ScalarDomain) -> Result<FreePoly> {
        if !domain.is_field() {
            return Err(AlgebraError::DomainMismatch(
                "polynomial coefficients must come from a field domain".into(),
            ));
        }
        Ok(FreePoly {
            domain,
            terms: Vec::new(),
        })
    }

    pub fn from_terms(domain: ScalarDomain, terms: Vec<(Scalar, Word)>) -> Result<FreePoly> {
        let mut poly = FreePoly::zero(domain)?;
        for (c, w) in terms {
            if c.domain() != domain {
                return Err(AlgebraError::DomainMismatch(
                    "coefficient domain differs from the polynomial domain".into(),
                ));
            }
            poly.add_term(c, w);
        }
        Ok(poly)
    }

    /// The single variable x_idx.
    pub fn variable(domain: ScalarDomain, idx: u32) -> Result<FreePoly> {
        FreePoly::from_terms(domain, vec![(Scalar::one(domain), vec![idx])])
    }

    /// [x1, x2] = x1 x2 - x2 x1.
    pub fn commutator_poly(domain: ScalarDomain) -> FreePoly {
        FreePoly::from_terms(
            domain,
            vec![
                (Scalar::one(domain), vec![1, 2]),
                (-&Scalar::one(domain), vec![2, 1]),
            ],
        )
        .expect("field domain")
    }

    fn add_term(&mut self, coeff: Scalar, word: Word) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(_, w)| word_cmp(w, &word)) {
            Ok(pos) => {
                let merged = &self.terms[pos].0 + &coeff;
                if merged.is_zero() {
                    self.terms.remove(pos);
                } else {
                    self.terms[pos].0 = merged;
                }
            }
            Err(pos) => self.terms.insert(pos, (coeff, word)),
        }
    }

    pub fn domain(&self) -> ScalarDomain {
        self.domain
    }

    pub fn terms(&self) -> &[(Scalar, Word)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest variable index used (0 for constant polynomials).
    pub fn nvars(&self) -> u32 {
        self.terms
            .iter()
            .flat_map(|(_, w)| w.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &FreePoly) -> FreePoly {
        assert_eq!(self.domain, other.domain);
        let mut out = self.clone();
        for (c, w) in &other.terms {
            out.add_term(c.clone(), w.clone());
        }
        out
    }

    pub fn neg(&self) -> FreePoly {
        FreePoly {
            domain: self.domain,
            terms: self.terms.iter().map(|(c, w)| (-c, w.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &FreePoly) -> FreePoly {
        assert_eq!(self.domain, other.domain);
        let mut out = FreePoly::zero(self.domain).expect("field domain");
        for (c1, w1) in &self.terms {
            for (c2, w2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(c1 * c2, w);
            }
        }
        out
    }

    pub fn scale(&self, k: &Scalar) -> FreePoly {
        let mut out = FreePoly::zero(self.domain).expect("field domain");
        for (c, w) in &self.terms {
            out.add_term(c * k, w.clone());
        }
        out
    }

    /// Evaluates the polynomial at square matrices. The matrices must share a
    /// domain whose center contains the coefficient domain.
    pub fn evaluate(&self, args: &[Matrix]) -> Result<Matrix> {
        let needed = self.nvars() as usize;
        if args.len() < needed {
            return Err(AlgebraError::ArityMismatch {
                needed,
                given: args.len(),
            });
        }
        if args.is_empty() {
            return Err(AlgebraError::ArityMismatch { needed: 1, given: 0 });
        }
        let target = args[0].domain();
        let n = args[0].rows();
        for a in args {
            if a.rows() != n || a.cols() != n {
                return Err(AlgebraError::ShapeMismatch(
                    "evaluation requires equal square matrices".into(),
                ));
            }
            if a.domain() != target {
                return Err(AlgebraError::DomainMismatch(
                    "evaluation arguments must share one domain".into(),
                ));
            }
        }
        let mut acc = Matrix::zeros(target, n, n);
        for (c, w) in &self.terms {
            let coeff = c.embed(target)?;
            let mut prod = Matrix::identity(target, n);
            for &v in w {
                prod = prod.mul(&args[(v - 1) as usize])?;
            }
            acc = acc.add(&prod.scale_left(&coeff))?;
        }
        Ok(acc)
    }

    /// True iff every word is a permutation of (1, ..., nvars).
    pub fn is_multilinear(&self) -> bool {
        let m = self.nvars();
        if m == 0 {
            return false;
        }
        self.terms.iter().all(|(_, w)| {
            if w.len() != m as usize {
                return false;
            }
            let mut seen = vec![false; m as usize];
            for &v in w {
                let idx = (v - 1) as usize;
                if seen[idx] {
                    return false;
                }
                seen[idx] = true;
            }
            true
        })
    }

    /// Sorts the variables inside every monomial (preserving multiplicity)
    /// and merges the result back into canonical form. Idempotent.
    pub fn tilde_normalize(&self) -> FreePoly {
        let mut out = FreePoly::zero(self.domain).expect("field domain");
        for (c, w) in &self.terms {
            let mut sorted = w.clone();
            sorted.sort_unstable();
            out.add_term(c.clone(), sorted);
        }
        out
    }

    /// Sum of the coefficients of a multilinear polynomial.
    pub fn coefficient_sum(&self) -> Result<Scalar> {
        if !self.is_multilinear() {
            return Err(AlgebraError::NotMultilinear);
        }
        Ok(self
            .terms
            .iter()
            .fold(Scalar::zero(self.domain), |acc, (c, _)| &acc + c))
    }
}

/// The standard polynomial S_m = sum over permutations of sign * word.
/// m is capped at 7 to keep the m! term count within the enumeration budget.
pub fn standard_poly(m: usize, domain: ScalarDomain) -> Result<FreePoly> {
    if m < 2 {
        return Err(AlgebraError::HypothesisViolated(
            "standard polynomial needs degree >= 2".into(),
        ));
    }
    if m > 7 {
        return Err(AlgebraError::BudgetExceeded {
            needed: (1..=m as u128).product(),
            budget: 5040,
        });
    }
    let mut poly = FreePoly::zero(domain)?;
    let mut perm: Vec<u32> = (1..=m as u32).collect();
    // Heap's algorithm; each swap flips the sign.
    let mut c = vec![0usize; m];
    let mut sign = true;
    let one = Scalar::one(domain);
    poly.add_term(one.clone(), perm.clone());
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = !sign;
            poly.add_term(if sign { one.clone() } else { -&one }, perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(poly)
}

/// The two-variable polynomial p(xy) - p(yx) for a univariate p given by its
/// coefficients beta_0..beta_m; the constant term cancels.
pub fn p_commutator_poly(coeffs: &[Scalar], domain: ScalarDomain) -> Result<FreePoly> {
    let mut poly = FreePoly::zero(domain)?;
    for (k, beta) in coeffs.iter().enumerate().skip(1) {
        if beta.domain() != domain {
            return Err(AlgebraError::DomainMismatch(
                "coefficient domain differs from the polynomial domain".into(),
            ));
        }
        let mut xy = Vec::with_capacity(2 * k);
        let mut yx = Vec::with_capacity(2 * k);
        for _ in 0..k {
            xy.extend_from_slice(&[1, 2]);
            yx.extend_from_slice(&[2, 1]);
        }
        poly.add_term(beta.clone(), xy);
        poly.add_term(-beta, yx);
    }
    Ok(poly)
}

// ---- parser ---------------------------------------------------------------

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    domain: ScalarDomain,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> AlgebraError {
        AlgebraError::SyntaxError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_digit())
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    /// coeff := int ['/' int]
    fn coefficient(&mut self) -> Result<Scalar> {
        let num = self.integer()?;
        if self.peek() == Some(b'/') {
            self.bump();
            let den = self.integer()?;
            if den == 0 {
                return Err(self.err("zero denominator"));
            }
            match self.domain {
                ScalarDomain::Rational => Ok(Scalar::rational(num, den)),
                ScalarDomain::PrimeField(_) => {
                    let d = Scalar::from_i64(self.domain, den);
                    let d = d.inv().map_err(|_| self.err("denominator is 0 mod p"))?;
                    Ok(&Scalar::from_i64(self.domain, num) * &d)
                }
                _ => Err(self.err("coefficients live in a field domain")),
            }
        } else {
            Ok(Scalar::from_i64(self.domain, num))
        }
    }

    /// factor := 'x' int ['^' int]
    fn factor(&mut self) -> Result<Word> {
        match self.peek() {
            Some(b'x') => {
                self.bump();
                let at = self.pos;
                let idx = self.integer().map_err(|_| AlgebraError::UnknownVariable { offset: at })?;
                if idx < 1 {
                    return Err(AlgebraError::UnknownVariable { offset: at });
                }
                let mut exp = 1i64;
                if self.peek() == Some(b'^') {
                    self.bump();
                    exp = self.integer()?;
                    if exp < 0 {
                        return Err(self.err("negative exponent"));
                    }
                }
                Ok(vec![idx as u32; exp as usize])
            }
            _ => Err(self.err("expected a variable like x1")),
        }
    }

    /// term := [coeff '*'] factor ('*' factor)* | coeff
    fn term(&mut self) -> Result<(Scalar, Word)> {
        let mut coeff = Scalar::one(self.domain);
        let mut word = Vec::new();
        if matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            coeff = self.coefficient()?;
            if self.peek() == Some(b'*') {
                self.bump();
            } else {
                // bare constant term
                return Ok((coeff, word));
            }
        }
        loop {
            word.extend(self.factor()?);
            if self.peek() == Some(b'*') {
                self.bump();
            } else {
                break;
            }
        }
        Ok((coeff, word))
    }

    /// expr := ['+'|'-'] term (('+'|'-') term)*
    fn expr(&mut self) -> Result<FreePoly> {
        let mut poly = FreePoly::zero(self.domain)?;
        let mut negated = false;
        match self.peek() {
            Some(b'-') => {
                self.bump();
                negated = true;
            }
            Some(b'+') => {
                self.bump();
            }
            _ => {}
        }
        loop {
            let (c, w) = self.term()?;
            poly.add_term(if negated { -&c } else { c }, w);
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    negated = false;
                }
                Some(b'-') => {
                    self.bump();
                    negated = true;
                }
                None => break,
                Some(other) => {
                    return Err(self.err(format!("unexpected byte {:?}", other as char)))
                }
            }
        }
        Ok(poly)
    }
}

/// Parses the polynomial grammar
/// `expr := term (('+'|'-') term)*; term := [coeff '*'] factor ('*' factor)*;
/// factor := var ['^' int]; var := 'x' int; coeff := int | int '/' int`.
pub fn parse_poly(text: &str, domain: ScalarDomain) -> Result<FreePoly> {
    if !domain.is_field() {
        return Err(AlgebraError::DomainMismatch(
            "polynomial coefficients must come from a field domain".into(),
        ));
    }
    let mut parser = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        domain,
    };
    let poly = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(poly)
}

impl fmt::Display for FreePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (c, w)) in self.terms.iter().enumerate() {
            let c_str = c.to_string();
            let neg = c_str.starts_with('-');
            let abs = if neg { &c_str[1..] } else { &c_str[..] };
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut pieces: Vec<String> = Vec::new();
            if abs != "1" || w.is_empty() {
                pieces.push(abs.to_string());
            }
            // compress runs of one variable into x^e
            let mut run = 0usize;
            while run < w.len() {
                let v = w[run];
                let mut end = run;
                while end < w.len() && w[end] == v {
                    end += 1;
                }
                if end - run == 1 {
                    pieces.push(format!("x{v}"));
                } else {
                    pieces.push(format!("x{v}^{}", end - run));
                }
                run = end;
            }
            write!(f, "{}", pieces.join("*"))?;
        }
        Ok(())
    }
}
