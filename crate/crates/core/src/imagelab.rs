//! Exhaustive finite-ring laboratory: polynomial images on M_n(GF(p)),
//! additive and subring closures, product sets, sum-length profiles, and the
//! dichotomy checks on M_2(GF(2)).
//!
//! Matrices are packed into dense integer ids (mixed radix base p over the
//! n^2 entries), sets are bitsets over the id space, and enumeration over
//! substitution tuples is a pure map + set-union reduce, parallelized when
//! the `parallel` feature is on. Everything a verdict depends on is computed
//! by full enumeration; sampling runs are flagged non-exhaustive and never
//! produce refutation claims.

use crate::error::{AlgebraError, Result};
use crate::freealg::FreePoly;
use crate::matrix::Matrix;
use crate::scalar::{Scalar, ScalarDomain};
use serde::Serialize;

/// A finite matrix ring M_n(GF(p)) with an enumeration budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteRingSpec {
    pub n: usize,
    pub p: u64,
    pub budget: u128,
}

pub const DEFAULT_BUDGET: u128 = 1 << 28;

impl FiniteRingSpec {
    pub fn new(n: usize, p: u64) -> Result<FiniteRingSpec> {
        ScalarDomain::prime_field(p)?;
        if n == 0 {
            return Err(AlgebraError::ShapeMismatch("ring size must be positive".into()));
        }
        Ok(FiniteRingSpec {
            n,
            p,
            budget: DEFAULT_BUDGET,
        })
    }

    /// Parses "2x2@3".
    pub fn parse(text: &str) -> Result<FiniteRingSpec> {
        let err = || AlgebraError::SyntaxError {
            offset: 0,
            message: format!("expected a ring like 2x2@3, got {text:?}"),
        };
        let (shape, p) = text.split_once('@').ok_or_else(err)?;
        let (r, c) = shape.split_once('x').ok_or_else(err)?;
        let r: usize = r.parse().map_err(|_| err())?;
        let c: usize = c.parse().map_err(|_| err())?;
        if r != c {
            return Err(err());
        }
        let p: u64 = p.parse().map_err(|_| err())?;
        FiniteRingSpec::new(r, p)
    }

    pub fn label(&self) -> String {
        format!("{}x{}@{}", self.n, self.n, self.p)
    }
}

/// Packed-id arithmetic for M_n(GF(p)).
pub struct FiniteRing {
    pub n: usize,
    pub p: u64,
    size: u64,
}

pub type ElemId = u32;

impl FiniteRing {
    pub fn new(spec: FiniteRingSpec) -> Result<FiniteRing> {
        let entries = spec.n * spec.n;
        let mut size: u64 = 1;
        for _ in 0..entries {
            size = size
                .checked_mul(spec.p)
                .filter(|&s| s <= u32::MAX as u64)
                .ok_or(AlgebraError::BudgetExceeded {
                    needed: (spec.p as u128).pow(entries as u32),
                    budget: u32::MAX as u128,
                })?;
        }
        Ok(FiniteRing {
            n: spec.n,
            p: spec.p,
            size,
        })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn decode(&self, id: ElemId) -> Vec<u64> {
        let mut out = vec![0u64; self.n * self.n];
        let mut v = id as u64;
        for slot in out.iter_mut() {
            *slot = v % self.p;
            v /= self.p;
        }
        out
    }

    pub fn encode(&self, entries: &[u64]) -> ElemId {
        let mut id: u64 = 0;
        for &e in entries.iter().rev() {
            id = id * self.p + (e % self.p);
        }
        id as ElemId
    }

    pub fn zero(&self) -> ElemId {
        0
    }

    pub fn one(&self) -> ElemId {
        let mut entries = vec![0u64; self.n * self.n];
        for i in 0..self.n {
            entries[i * self.n + i] = 1;
        }
        self.encode(&entries)
    }

    pub fn add(&self, a: ElemId, b: ElemId) -> ElemId {
        let (ea, eb) = (self.decode(a), self.decode(b));
        let sum: Vec<u64> = ea.iter().zip(&eb).map(|(x, y)| (x + y) % self.p).collect();
        self.encode(&sum)
    }

    pub fn neg(&self, a: ElemId) -> ElemId {
        let ea = self.decode(a);
        let neg: Vec<u64> = ea.iter().map(|x| (self.p - x) % self.p).collect();
        self.encode(&neg)
    }

    pub fn sub(&self, a: ElemId, b: ElemId) -> ElemId {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: ElemId, b: ElemId) -> ElemId {
        let (ea, eb) = (self.decode(a), self.decode(b));
        let n = self.n;
        let mut out = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = ea[i * n + k];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = (out[i * n + j] + x * eb[k * n + j]) % self.p;
                }
            }
        }
        self.encode(&out)
    }

    pub fn scale(&self, c: u64, a: ElemId) -> ElemId {
        let ea = self.decode(a);
        let out: Vec<u64> = ea.iter().map(|x| (x * (c % self.p)) % self.p).collect();
        self.encode(&out)
    }

    pub fn bracket(&self, a: ElemId, b: ElemId) -> ElemId {
        self.sub(self.mul(a, b), self.mul(b, a))
    }

    /// Central elements are the scalar matrices.
    pub fn is_central(&self, id: ElemId) -> bool {
        let e = self.decode(id);
        let lambda = e[0];
        for i in 0..self.n {
            for j in 0..self.n {
                let want = if i == j { lambda } else { 0 };
                if e[i * self.n + j] != want {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_matrix(&self, id: ElemId) -> Matrix {
        let domain = ScalarDomain::PrimeField(self.p);
        let e = self.decode(id);
        let mut m = Matrix::zeros(domain, self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = Scalar::from_i64(domain, e[i * self.n + j] as i64);
            }
        }
        m
    }

    pub fn from_matrix(&self, m: &Matrix) -> Result<ElemId> {
        if m.rows() != self.n || m.cols() != self.n {
            return Err(AlgebraError::ShapeMismatch("ring element size".into()));
        }
        let mut entries = vec![0u64; self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                match &m[(i, j)] {
                    Scalar::Fp { p, v } if *p == self.p => entries[i * self.n + j] = *v,
                    _ => {
                        return Err(AlgebraError::DomainMismatch(
                            "entry outside the ring's field".into(),
                        ))
                    }
                }
            }
        }
        Ok(self.encode(&entries))
    }
}

// ---- dense id sets ---------------------------------------------------------

/// A bitset over the ring's id space.
#[derive(Clone, PartialEq, Eq)]
pub struct IdSet {
    words: Vec<u64>,
    len: usize,
    universe: usize,
}

impl IdSet {
    pub fn new(universe: usize) -> IdSet {
        IdSet {
            words: vec![0; universe.div_ceil(64)],
            len: 0,
            universe,
        }
    }

    pub fn insert(&mut self, id: ElemId) -> bool {
        let (w, b) = ((id / 64) as usize, id % 64);
        let mask = 1u64 << b;
        if self.words[w] & mask == 0 {
            self.words[w] |= mask;
            self.len += 1;
            true
        } else {
            false
        }
    }

    pub fn contains(&self, id: ElemId) -> bool {
        let (w, b) = ((id / 64) as usize, id % 64);
        self.words[w] & (1u64 << b) != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn union_with(&mut self, other: &IdSet) {
        debug_assert_eq!(self.universe, other.universe);
        let mut count = 0usize;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
            count += a.count_ones() as usize;
        }
        self.len = count;
    }

    pub fn is_subset(&self, other: &IdSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ElemId> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some((w as u32) * 64 + b)
                }
            })
        })
    }

    pub fn from_ids(universe: usize, ids: &[ElemId]) -> IdSet {
        let mut s = IdSet::new(universe);
        for &id in ids {
            s.insert(id);
        }
        s
    }

    pub fn full(universe: usize) -> IdSet {
        let mut s = IdSet::new(universe);
        for id in 0..universe as u32 {
            s.insert(id);
        }
        s
    }
}

impl std::fmt::Debug for IdSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IdSet({} of {})", self.len, self.universe)
    }
}

// ---- compiled polynomial evaluation -----------------------------------------

/// A free polynomial lowered onto a finite ring: coefficients reduced mod p,
/// words as byte strings of 0-based variable indices.
pub struct CompiledPoly {
    terms: Vec<(u64, Vec<u8>)>,
    pub nvars: usize,
}

impl CompiledPoly {
    pub fn compile(poly: &FreePoly, ring: &FiniteRing) -> Result<CompiledPoly> {
        let mut terms = Vec::with_capacity(poly.terms().len());
        for (coeff, word) in poly.terms() {
            let c = match coeff {
                Scalar::Fp { p, v } if *p == ring.p => *v,
                Scalar::Rat(r) => {
                    // reduce a rational coefficient mod p when the
                    // denominator is invertible
                    let p = ring.p;
                    let fp = ScalarDomain::PrimeField(p);
                    let num = r.numer();
                    let den = r.denom();
                    let rem = |b: &num_bigint::BigInt| -> i64 {
                        use num_traits::ToPrimitive;
                        let m = b % num_bigint::BigInt::from(p);
                        m.to_i64().unwrap_or(0)
                    };
                    let num_s = Scalar::from_i64(fp, rem(num));
                    let den_s = Scalar::from_i64(fp, rem(den));
                    if den_s.is_zero() {
                        return Err(AlgebraError::DomainMismatch(
                            "coefficient denominator vanishes mod p".into(),
                        ));
                    }
                    match &num_s * &den_s.inv()? {
                        Scalar::Fp { v, .. } => v,
                        _ => unreachable!(),
                    }
                }
                _ => {
                    return Err(AlgebraError::DomainMismatch(
                        "polynomial coefficients must live in the ring's field".into(),
                    ))
                }
            };
            if c == 0 {
                continue;
            }
            terms.push((c, word.iter().map(|&v| (v - 1) as u8).collect()));
        }
        Ok(CompiledPoly {
            terms,
            nvars: poly.nvars() as usize,
        })
    }

    pub fn eval(&self, ring: &FiniteRing, args: &[ElemId]) -> ElemId {
        let mut acc = ring.zero();
        let one = ring.one();
        for (c, word) in &self.terms {
            let mut prod = one;
            for &v in word {
                prod = ring.mul(prod, args[v as usize]);
            }
            acc = ring.add(acc, ring.scale(*c, prod));
        }
        acc
    }
}

// ---- images and closures ------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumerationMode {
    ExhaustiveOnly,
    /// Sample this many tuples from the given seed when over budget.
    SampleOnOverflow(u64),
}

/// The image set {f(a_1..a_m)} by full enumeration of substitution tuples
/// (parallel map + union reduce); over-budget runs either fail or sample.
pub fn image_set(
    ring: &FiniteRing,
    poly: &FreePoly,
    spec: &FiniteRingSpec,
    mode: EnumerationMode,
) -> Result<(IdSet, bool)> {
    let compiled = CompiledPoly::compile(poly, ring)?;
    let m = compiled.nvars.max(1);
    let size = ring.size();
    let tuples = (size as u128).pow(m as u32);
    let universe = size as usize;
    if tuples > spec.budget {
        match mode {
            EnumerationMode::ExhaustiveOnly => {
                return Err(AlgebraError::BudgetExceeded {
                    needed: tuples,
                    budget: spec.budget,
                })
            }
            EnumerationMode::SampleOnOverflow(seed) => {
                use rand::rngs::SmallRng;
                use rand::{Rng, SeedableRng};
                let mut rng = SmallRng::seed_from_u64(seed);
                let mut out = IdSet::new(universe);
                for _ in 0..spec.budget.min(1 << 20) as usize {
                    let args: Vec<ElemId> =
                        (0..m).map(|_| rng.random_range(0..size) as ElemId).collect();
                    out.insert(compiled.eval(ring, &args));
                }
                return Ok((out, false));
            }
        }
    }
    let total = tuples as usize;
    let set = crate::par_chunk_reduce(
        total,
        4096,
        |range| {
            let mut s = IdSet::new(universe);
            let mut args = vec![0 as ElemId; m];
            for idx in range {
                let mut v = idx as u64;
                for slot in args.iter_mut() {
                    *slot = (v % size) as ElemId;
                    v /= size;
                }
                s.insert(compiled.eval(ring, &args));
            }
            s
        },
        IdSet::new(universe),
        |mut a, b| {
            a.union_with(&b);
            a
        },
    );
    Ok((set, true))
}

/// Additive subgroup generated by a set (fixed point of adding generators;
/// inverses come free in characteristic p).
pub fn additive_closure(ring: &FiniteRing, gens: &IdSet) -> IdSet {
    let universe = ring.size() as usize;
    let mut out = IdSet::new(universe);
    out.insert(ring.zero());
    let gen_ids: Vec<ElemId> = gens.iter().collect();
    let mut frontier: Vec<ElemId> = vec![ring.zero()];
    while let Some(x) = frontier.pop() {
        for &g in &gen_ids {
            let y = ring.add(x, g);
            if out.insert(y) {
                frontier.push(y);
            }
        }
    }
    out
}

/// Subring generated by a set: closure under addition and multiplication.
pub fn subring_closure(ring: &FiniteRing, gens: &IdSet) -> IdSet {
    let mut out = additive_closure(ring, gens);
    loop {
        let members: Vec<ElemId> = out.iter().collect();
        let mut products = IdSet::new(ring.size() as usize);
        for &x in &members {
            for &y in &members {
                let xy = ring.mul(x, y);
                if !out.contains(xy) {
                    products.insert(xy);
                }
            }
        }
        if products.is_empty() {
            return out;
        }
        let mut gens2 = out.clone();
        gens2.union_with(&products);
        out = additive_closure(ring, &gens2);
    }
}

/// Elementwise product set S1 * S2 * ... * Sk.
pub fn product_set(ring: &FiniteRing, sets: &[&IdSet]) -> IdSet {
    let universe = ring.size() as usize;
    assert!(!sets.is_empty());
    let mut acc: Vec<ElemId> = sets[0].iter().collect();
    for s in &sets[1..] {
        let mut next = IdSet::new(universe);
        for &x in &acc {
            for y in s.iter() {
                next.insert(ring.mul(x, y));
            }
        }
        acc = next.iter().collect();
    }
    IdSet::from_ids(universe, &acc)
}

/// S^[k], the k-fold elementwise product set.
pub fn power_product_set(ring: &FiniteRing, s: &IdSet, k: usize) -> IdSet {
    assert!(k >= 1);
    let sets: Vec<&IdSet> = std::iter::repeat_n(s, k).collect();
    product_set(ring, &sets)
}

/// The set of additive commutators {[a, b]}.
pub fn commutator_set(ring: &FiniteRing) -> IdSet {
    let size = ring.size();
    let universe = size as usize;
    crate::par_map_reduce(
        universe,
        |a| {
            let mut s = IdSet::new(universe);
            for b in 0..size as ElemId {
                s.insert(ring.bracket(a as ElemId, b));
            }
            s
        },
        IdSet::new(universe),
        |mut x, y| {
            x.union_with(&y);
            x
        },
    )
}

/// Two-sided ideal generated by a set in the (unital) ring.
pub fn ideal_closure(ring: &FiniteRing, gens: &IdSet) -> IdSet {
    let size = ring.size();
    let mut out = additive_closure(ring, gens);
    loop {
        let members: Vec<ElemId> = out.iter().collect();
        let mut fresh = IdSet::new(size as usize);
        for &x in &members {
            for r in 0..size as ElemId {
                let rx = ring.mul(r, x);
                if !out.contains(rx) {
                    fresh.insert(rx);
                }
                let xr = ring.mul(x, r);
                if !out.contains(xr) {
                    fresh.insert(xr);
                }
            }
        }
        if fresh.is_empty() {
            return out;
        }
        let mut gens2 = out.clone();
        gens2.union_with(&fresh);
        out = additive_closure(ring, &gens2);
    }
}

/// Whether the ideal generated by [S, R] is the whole ring.
pub fn fully_noncentral_check(ring: &FiniteRing, s: &IdSet) -> bool {
    let size = ring.size();
    let universe = size as usize;
    let mut gens = IdSet::new(universe);
    for x in s.iter() {
        for r in 0..size as ElemId {
            gens.insert(ring.bracket(x, r));
        }
    }
    let ideal = ideal_closure(ring, &gens);
    ideal.len() == universe
}

/// BFS layering of sums of elements of S^[k]: layer t holds sums of at most
/// t products. Returns (reaches_ring, minimal_N) where minimal_N is the
/// first layer equal to the full additive closure of S^[k].
pub fn sum_length_profile(ring: &FiniteRing, s: &IdSet, k: usize) -> (bool, usize) {
    let universe = ring.size() as usize;
    let skt = power_product_set(ring, s, k);
    let closure = additive_closure(ring, &skt);
    let products: Vec<ElemId> = skt.iter().collect();
    let mut layer = IdSet::new(universe);
    layer.insert(ring.zero());
    let mut t = 0usize;
    while layer != closure {
        let mut next = layer.clone();
        for x in layer.iter() {
            for &p in &products {
                next.insert(ring.add(x, p));
            }
        }
        if next == layer {
            break; // no growth; closure unreachable by bounded sums
        }
        layer = next;
        t += 1;
    }
    (closure.len() == universe, t)
}

// ---- M2(GF(2)) dichotomies -----------------------------------------------------

/// The two 4-element exceptional sets displayed for M_2(GF(2)): the span
/// copy of GF(4) {0, I, [[1,1],[1,0]], [[0,1],[1,1]]} and the off-diagonal
/// set {0, [[0,1],[1,0]], [[1,1],[0,1]], [[1,0],[1,1]]}.
pub fn m2f2_exceptional_sets(ring: &FiniteRing) -> (IdSet, IdSet) {
    let enc = |rows: [[u64; 2]; 2]| ring.encode(&[rows[0][0], rows[0][1], rows[1][0], rows[1][1]]);
    let gf4 = IdSet::from_ids(
        ring.size() as usize,
        &[
            ring.zero(),
            ring.one(),
            enc([[1, 1], [1, 0]]),
            enc([[0, 1], [1, 1]]),
        ],
    );
    let offdiag = IdSet::from_ids(
        ring.size() as usize,
        &[
            ring.zero(),
            enc([[0, 1], [1, 0]]),
            enc([[1, 1], [0, 1]]),
            enc([[1, 0], [1, 1]]),
        ],
    );
    (gf4, offdiag)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SquareSpanVerdict {
    CentralValued,
    FullRing,
    ExceptionalGf4,
    Refutation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AdditiveVerdict {
    CentralValued,
    ContainsCommutators,
    ExceptionalOffDiagonal,
    ExceptionalGf4,
    Refutation,
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub poly: String,
    pub image_size: usize,
    pub square_span: SquareSpanVerdict,
    pub additive: AdditiveVerdict,
}

/// Classifies (f(R)^2)^+ against the full ring / GF(4)-copy dichotomy and
/// f(R)^+ against the commutator-span containment with its two exceptional
/// sets, on R = M_2(GF(2)).
pub fn check_m2f2_dichotomies(poly: &FreePoly) -> Result<DichotomyReport> {
    let spec = FiniteRingSpec::new(2, 2)?;
    let ring = FiniteRing::new(spec)?;
    let (image, exhaustive) = image_set(&ring, poly, &spec, EnumerationMode::ExhaustiveOnly)?;
    debug_assert!(exhaustive);
    classify_m2f2(&ring, poly, &image)
}

fn classify_m2f2(ring: &FiniteRing, poly: &FreePoly, image: &IdSet) -> Result<DichotomyReport> {
    let universe = ring.size() as usize;
    let central = image.iter().all(|id| ring.is_central(id));
    let (gf4, offdiag) = m2f2_exceptional_sets(ring);
    let commutator_span = additive_closure(ring, &commutator_set(ring));
    if central {
        return Ok(DichotomyReport {
            poly: poly.to_string(),
            image_size: image.len(),
            square_span: SquareSpanVerdict::CentralValued,
            additive: AdditiveVerdict::CentralValued,
        });
    }
    let squares = product_set(ring, &[image, image]);
    let square_span = additive_closure(ring, &squares);
    let square_verdict = if square_span.len() == universe {
        SquareSpanVerdict::FullRing
    } else if square_span == gf4 {
        SquareSpanVerdict::ExceptionalGf4
    } else {
        SquareSpanVerdict::Refutation
    };
    let additive_span = additive_closure(ring, image);
    let additive_verdict = if commutator_span.is_subset(&additive_span) {
        AdditiveVerdict::ContainsCommutators
    } else if additive_span == offdiag {
        AdditiveVerdict::ExceptionalOffDiagonal
    } else if additive_span == gf4 {
        AdditiveVerdict::ExceptionalGf4
    } else {
        AdditiveVerdict::Refutation
    };
    Ok(DichotomyReport {
        poly: poly.to_string(),
        image_size: image.len(),
        square_span: square_verdict,
        additive: additive_verdict,
    })
}

// ---- the degree <= 3 sweep on M2(GF(2)) ------------------------------------------

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepSummary {
    pub total_polys: usize,
    pub central_valued: usize,
    pub full_ring: usize,
    pub exceptional_gf4: usize,
    pub square_refutations: usize,
    pub contains_commutators: usize,
    pub additive_exceptional_offdiag: usize,
    pub additive_exceptional_gf4: usize,
    pub additive_refutations: usize,
    /// polynomials hitting the square-span exceptional branch
    pub gf4_witnesses: Vec<String>,
}

/// All words over x1..x_nvars of length 0..=max_deg, in the canonical
/// length-then-lex order.
fn sweep_words(nvars: usize, max_deg: usize) -> Vec<Vec<u32>> {
    let mut words: Vec<Vec<u32>> = vec![vec![]];
    let mut out = words.clone();
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for w in &words {
            for v in 1..=nvars as u32 {
                let mut w2 = w.clone();
                w2.push(v);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        words = next;
    }
    out
}

/// Exhaustive classification of every GF(2)-coefficient polynomial in
/// <= `nvars` variables of degree <= `max_deg` on M_2(GF(2)), one report per
/// polynomial. Uses the packed-table fast path: per substitution tuple all
/// word values are computed once, and each polynomial image is an XOR-subset
/// sum of them (addition in M_2(GF(2)) is entrywise XOR of the packed bits).
pub fn sweep_m2f2_reports(nvars: usize, max_deg: usize) -> Result<Vec<DichotomyReport>> {
    let spec = FiniteRingSpec::new(2, 2)?;
    let ring = FiniteRing::new(spec)?;
    let size = ring.size() as usize; // 16
    let words = sweep_words(nvars, max_deg);
    let nwords = words.len();
    let tuples = size.pow(nvars as u32);
    // word-value table: value[tuple][word]
    let mut table = vec![0u32; tuples * nwords];
    for t in 0..tuples {
        let mut v = t;
        let mut args = Vec::with_capacity(nvars);
        for _ in 0..nvars {
            args.push((v % size) as ElemId);
            v /= size;
        }
        for (w, word) in words.iter().enumerate() {
            let mut prod = ring.one();
            for &var in word {
                prod = ring.mul(prod, args[(var - 1) as usize]);
            }
            table[t * nwords + w] = prod;
        }
    }
    let domain = ScalarDomain::PrimeField(2);
    let (gf4, offdiag) = m2f2_exceptional_sets(&ring);
    let commutator_span = additive_closure(&ring, &commutator_set(&ring));
    let total = (1usize << nwords) - 1;
    let classify = |mask: usize| -> DichotomyReport {
        let mut image = IdSet::new(size);
        for t in 0..tuples {
            let mut acc = 0u32;
            let mut bits = mask;
            while bits != 0 {
                let w = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                acc ^= table[t * nwords + w];
            }
            image.insert(acc);
        }
        let poly = {
            let terms: Vec<(Scalar, Vec<u32>)> = (0..nwords)
                .filter(|w| mask & (1 << w) != 0)
                .map(|w| (Scalar::one(domain), words[w].clone()))
                .collect();
            FreePoly::from_terms(domain, terms).expect("valid sweep poly")
        };
        classify_m2f2_with(&ring, &poly, &image, &gf4, &offdiag, &commutator_span)
    };
    Ok(crate::par_map_reduce(
        total,
        |idx| vec![classify(idx + 1)],
        Vec::new(),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    ))
}

/// Aggregated counts over [`sweep_m2f2_reports`].
pub fn sweep_m2f2(nvars: usize, max_deg: usize) -> Result<SweepSummary> {
    let reports = sweep_m2f2_reports(nvars, max_deg)?;
    let mut s = SweepSummary {
        total_polys: reports.len(),
        ..Default::default()
    };
    for report in &reports {
        match report.square_span {
            SquareSpanVerdict::CentralValued => s.central_valued += 1,
            SquareSpanVerdict::FullRing => s.full_ring += 1,
            SquareSpanVerdict::ExceptionalGf4 => {
                s.exceptional_gf4 += 1;
                s.gf4_witnesses.push(report.poly.clone());
            }
            SquareSpanVerdict::Refutation => s.square_refutations += 1,
        }
        match report.additive {
            AdditiveVerdict::CentralValued => {}
            AdditiveVerdict::ContainsCommutators => s.contains_commutators += 1,
            AdditiveVerdict::ExceptionalOffDiagonal => s.additive_exceptional_offdiag += 1,
            AdditiveVerdict::ExceptionalGf4 => s.additive_exceptional_gf4 += 1,
            AdditiveVerdict::Refutation => s.additive_refutations += 1,
        }
    }
    Ok(s)
}

/// CSV rows (poly, image_size, square_span, additive) for a sweep.
pub fn sweep_csv(reports: &[DichotomyReport]) -> String {
    let mut out = String::from("poly,image_size,square_span,additive\n");
    for r in reports {
        out.push_str(&format!(
            "\"{}\",{},{:?},{:?}\n",
            r.poly, r.image_size, r.square_span, r.additive
        ));
    }
    out
}

fn classify_m2f2_with(
    ring: &FiniteRing,
    poly: &FreePoly,
    image: &IdSet,
    gf4: &IdSet,
    offdiag: &IdSet,
    commutator_span: &IdSet,
) -> DichotomyReport {
    let universe = ring.size() as usize;
    let central = image.iter().all(|id| ring.is_central(id));
    if central {
        return DichotomyReport {
            poly: poly.to_string(),
            image_size: image.len(),
            square_span: SquareSpanVerdict::CentralValued,
            additive: AdditiveVerdict::CentralValued,
        };
    }
    let squares = product_set(ring, &[image, image]);
    let square_span = additive_closure(ring, &squares);
    let square_verdict = if square_span.len() == universe {
        SquareSpanVerdict::FullRing
    } else if &square_span == gf4 {
        SquareSpanVerdict::ExceptionalGf4
    } else {
        SquareSpanVerdict::Refutation
    };
    let additive_span = additive_closure(ring, image);
    let additive_verdict = if commutator_span.is_subset(&additive_span) {
        AdditiveVerdict::ContainsCommutators
    } else if &additive_span == offdiag {
        AdditiveVerdict::ExceptionalOffDiagonal
    } else if &additive_span == gf4 {
        AdditiveVerdict::ExceptionalGf4
    } else {
        AdditiveVerdict::Refutation
    };
    DichotomyReport {
        poly: poly.to_string(),
        image_size: image.len(),
        square_span: square_verdict,
        additive: additive_verdict,
    }
}

// ---- polynomial commutator sets -----------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PCommVerdict {
    /// p is central-valued on R, outside the dichotomy's hypothesis.
    CentralValued,
    /// p[R,R]^+ = [R,R].
    Equal,
    /// M_2(GF(2)) with p[R,R]^+ the off-diagonal 4-set.
    ExceptionalOffDiagonal,
    /// M_2(GF(2)) with p(R)^+ the GF(4) copy and p[R,R]^+ = {0, I}.
    ExceptionalCentralPair,
    Refutation,
}

#[derive(Clone, Debug, Serialize)]
pub struct PCommReport {
    pub ring: String,
    pub verdict: PCommVerdict,
    pub pcomm_span_size: usize,
    pub commutator_span_size: usize,
}

/// Evaluates a univariate p at a ring element (central coefficients reduced
/// mod p).
fn eval_univariate(ring: &FiniteRing, coeffs: &[u64], x: ElemId) -> ElemId {
    let mut acc = ring.zero();
    let mut pow = ring.one();
    for &c in coeffs {
        acc = ring.add(acc, ring.scale(c, pow));
        pow = ring.mul(pow, x);
    }
    acc
}

/// Computes p[R,R] = {p(ab) - p(ba)}, its additive span, and compares with
/// [R,R]; on M_2(GF(2)) the two displayed exceptional branches are matched.
pub fn p_commutator_set_check(coeffs_int: &[i64], spec: &FiniteRingSpec) -> Result<PCommReport> {
    if coeffs_int.len() < 2 || coeffs_int[1..].iter().all(|&c| c == 0) {
        return Err(AlgebraError::HypothesisViolated(
            "p must be nonconstant".into(),
        ));
    }
    let ring = FiniteRing::new(*spec)?;
    let size = ring.size();
    let coeffs: Vec<u64> = coeffs_int
        .iter()
        .map(|&c| c.rem_euclid(spec.p as i64) as u64)
        .collect();
    // central-valuedness of p itself
    let central = (0..size as ElemId).all(|x| ring.is_central(eval_univariate(&ring, &coeffs, x)));
    if central {
        return Ok(PCommReport {
            ring: spec.label(),
            verdict: PCommVerdict::CentralValued,
            pcomm_span_size: 0,
            commutator_span_size: 0,
        });
    }
    let universe = size as usize;
    let pcomm = crate::par_map_reduce(
        universe,
        |a| {
            let mut s = IdSet::new(universe);
            for b in 0..size as ElemId {
                let ab = ring.mul(a as ElemId, b);
                let ba = ring.mul(b, a as ElemId);
                s.insert(ring.sub(
                    eval_univariate(&ring, &coeffs, ab),
                    eval_univariate(&ring, &coeffs, ba),
                ));
            }
            s
        },
        IdSet::new(universe),
        |mut x, y| {
            x.union_with(&y);
            x
        },
    );
    let pcomm_span = additive_closure(&ring, &pcomm);
    let comm_span = additive_closure(&ring, &commutator_set(&ring));
    let verdict = if pcomm_span == comm_span {
        PCommVerdict::Equal
    } else if spec.n == 2 && spec.p == 2 {
        let (gf4, offdiag) = m2f2_exceptional_sets(&ring);
        let zero_one = IdSet::from_ids(universe, &[ring.zero(), ring.one()]);
        let p_image: IdSet = {
            let mut s = IdSet::new(universe);
            for x in 0..size as ElemId {
                s.insert(eval_univariate(&ring, &coeffs, x));
            }
            additive_closure(&ring, &s)
        };
        if pcomm_span == offdiag {
            PCommVerdict::ExceptionalOffDiagonal
        } else if p_image == gf4 && pcomm_span == zero_one {
            PCommVerdict::ExceptionalCentralPair
        } else {
            PCommVerdict::Refutation
        }
    } else {
        PCommVerdict::Refutation
    };
    Ok(PCommReport {
        ring: spec.label(),
        verdict,
        pcomm_span_size: pcomm_span.len(),
        commutator_span_size: comm_span.len(),
    })
}

// ---- variable-sorting membership equivalence --------------------------------------

/// For every substitution tuple, membership of f and of its variable-sorted
/// form in the commutator ideal must agree; any counterexample refutes the
/// equivalence and is returned.
pub fn tilde_equivalence_check(
    poly: &FreePoly,
    spec: &FiniteRingSpec,
) -> Result<std::result::Result<(), Vec<ElemId>>> {
    let ring = FiniteRing::new(*spec)?;
    let size = ring.size();
    let compiled = CompiledPoly::compile(poly, &ring)?;
    let tilde = poly.tilde_normalize();
    let compiled_tilde = CompiledPoly::compile(&tilde, &ring)?;
    let m = compiled.nvars.max(compiled_tilde.nvars).max(1);
    let tuples = (size as u128).pow(m as u32);
    if tuples > spec.budget {
        return Err(AlgebraError::BudgetExceeded {
            needed: tuples,
            budget: spec.budget,
        });
    }
    let ideal = ideal_closure(&ring, &commutator_set(&ring));
    let total = tuples as usize;
    let failure = crate::par_chunk_reduce(
        total,
        4096,
        |range| {
            let mut args = vec![0 as ElemId; m];
            for idx in range {
                let mut v = idx as u64;
                for slot in args.iter_mut() {
                    *slot = (v % size) as ElemId;
                    v /= size;
                }
                let lhs = ideal.contains(compiled.eval(&ring, &args));
                let rhs = ideal.contains(compiled_tilde.eval(&ring, &args));
                if lhs != rhs {
                    return Some(args.clone());
                }
            }
            None
        },
        None,
        |a, b| a.or(b),
    );
    Ok(match failure {
        None => Ok(()),
        Some(args) => Err(args),
    })
}

// ---- standard polynomial probes ------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct StandardPolyProbe {
    pub m: usize,
    pub k: usize,
    pub ring: String,
    pub image_size: usize,
    pub span_is_ring: bool,
    pub minimal_n: Option<usize>,
}

/// Computes (S_m(R)^k)^+ and, when it is the whole ring, the minimal number
/// of summands of k-fold products needed.
pub fn standard_poly_probe(m: usize, k: usize, spec: &FiniteRingSpec) -> Result<StandardPolyProbe> {
    let ring = FiniteRing::new(*spec)?;
    let domain = ScalarDomain::PrimeField(spec.p);
    let sm = crate::freealg::standard_poly(m, domain)?;
    let (image, _) = image_set(&ring, &sm, spec, EnumerationMode::ExhaustiveOnly)?;
    let (reaches, minimal_n) = sum_length_profile(&ring, &image, k);
    Ok(StandardPolyProbe {
        m,
        k,
        ring: spec.label(),
        image_size: image.len(),
        span_is_ring: reaches,
        minimal_n: if reaches { Some(minimal_n) } else { None },
    })
}

// ---- serialized reports ----------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ImageReport {
    pub poly: String,
    pub ring: String,
    pub exhaustive: bool,
    pub image_size: usize,
    pub additive_closure_size: usize,
    pub subring_closure_size: usize,
    pub verdict: String,
    pub minimal_n: Option<usize>,
    pub witnesses: Vec<String>,
}

/// Image + closures report for the CLI.
pub fn image_report(
    poly: &FreePoly,
    spec: &FiniteRingSpec,
    mode: EnumerationMode,
) -> Result<ImageReport> {
    let ring = FiniteRing::new(*spec)?;
    let (image, exhaustive) = image_set(&ring, poly, spec, mode)?;
    let additive = additive_closure(&ring, &image);
    let subring = subring_closure(&ring, &image);
    let full = ring.size() as usize;
    let verdict = if subring.len() == full {
        "subring-closure-is-ring"
    } else {
        "subring-closure-proper"
    };
    Ok(ImageReport {
        poly: poly.to_string(),
        ring: spec.label(),
        exhaustive,
        image_size: image.len(),
        additive_closure_size: additive.len(),
        subring_closure_size: subring.len(),
        verdict: verdict.to_string(),
        minimal_n: None,
        witnesses: vec![],
    })
}
