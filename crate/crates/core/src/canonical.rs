//! Similarity decompositions over division rings, each returned as a
//! [`SimilarityCertificate`] that replays by direct multiplication.
//!
//! The side conventions follow the matrix module: conjugation is
//! P^{-1} A P, columns form a right D-space, and all elimination is by left
//! row operations.

use crate::error::{AlgebraError, Result};
use crate::matrix::{non_eigenvector, Matrix};
use crate::scalar::{Scalar, ScalarDomain};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

/// A similarity witness: conjugator^{-1} * input * conjugator = canonical.
#[derive(Clone, Debug)]
pub struct SimilarityCertificate {
    pub kind: String,
    pub input: Matrix,
    pub conjugator: Matrix,
    pub canonical: Matrix,
}

impl SimilarityCertificate {
    pub fn new(kind: &str, input: Matrix, conjugator: Matrix, canonical: Matrix) -> Self {
        SimilarityCertificate {
            kind: kind.to_string(),
            input,
            conjugator,
            canonical,
        }
    }

    /// Recomputes P^{-1} * input * P and returns the residual against the
    /// stored canonical form; exact domains must match exactly.
    pub fn verify(&self) -> Result<f64> {
        let replay = crate::matrix::conjugate(&self.input, &self.conjugator)?;
        let residual = replay.relative_residual(&self.canonical);
        if self.input.domain().is_exact() {
            if replay != self.canonical {
                return Err(AlgebraError::NormResidual {
                    residual,
                    tolerance: 0.0,
                });
            }
        } else {
            let tol = self.input.domain().tolerance().max(1e-12) * 1e3;
            if residual > tol {
                return Err(AlgebraError::NormResidual {
                    residual,
                    tolerance: tol,
                });
            }
        }
        Ok(residual)
    }
}

// ---- univariate polynomials with central coefficients ---------------------

/// A univariate polynomial with central coefficients, stored ascending.
#[derive(Clone, Debug)]
pub struct ScalarPoly {
    coeffs: Vec<Scalar>,
}

impl ScalarPoly {
    pub fn new(coeffs: Vec<Scalar>) -> Result<ScalarPoly> {
        if coeffs.is_empty() {
            return Err(AlgebraError::HypothesisViolated(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        for c in &coeffs {
            if !c.is_central() {
                return Err(AlgebraError::HypothesisViolated(
                    "polynomial coefficients must be central".into(),
                ));
            }
        }
        Ok(ScalarPoly { coeffs })
    }

    /// Monic product of (t - r) over central roots.
    pub fn from_roots(roots: &[Scalar]) -> Result<ScalarPoly> {
        let domain = roots
            .first()
            .map(|r| r.domain())
            .ok_or_else(|| AlgebraError::HypothesisViolated("no roots".into()))?;
        let mut coeffs = vec![Scalar::one(domain)];
        for r in roots {
            if !r.is_central() {
                return Err(AlgebraError::HypothesisViolated(
                    "roots must be central".into(),
                ));
            }
            // multiply by (t - r)
            let mut next = vec![Scalar::zero(domain); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = &next[k + 1] + c;
                next[k] = &next[k] - &(c * r);
            }
            coeffs = next;
        }
        ScalarPoly::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn eval_scalar(&self, a: &Scalar) -> Scalar {
        let domain = a.domain();
        let mut acc = Scalar::zero(domain);
        let mut pow = Scalar::one(domain);
        for c in &self.coeffs {
            let c = c.embed(domain).expect("central coefficient embeds");
            acc = &acc + &(&c * &pow);
            pow = &pow * a;
        }
        acc
    }

    pub fn eval_matrix(&self, a: &Matrix) -> Result<Matrix> {
        let domain = a.domain();
        let n = a.rows();
        let mut acc = Matrix::zeros(domain, n, n);
        let mut pow = Matrix::identity(domain, n);
        for c in &self.coeffs {
            let c = c.embed(domain)?;
            acc = acc.add(&pow.scale_left(&c))?;
            pow = pow.mul(a)?;
        }
        Ok(acc)
    }
}

// ---- Sylvester equations ---------------------------------------------------

/// Solves AX - XB = C given p(A) = 0 and p(B) invertible, by the telescoping
/// identity: with X0 = sum_k c_k sum_{i+j=k-1} A^i C B^j one has
/// A X0 - X0 B = -C p(B), so X = -X0 p(B)^{-1}.
pub fn sylvester_solve(a: &Matrix, b: &Matrix, c: &Matrix, p: &ScalarPoly) -> Result<Matrix> {
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(AlgebraError::ShapeMismatch(
            "C must be n x m for A n x n, B m x m".into(),
        ));
    }
    let pa = p.eval_matrix(a)?;
    if !pa.approx_eq(&Matrix::zeros(a.domain(), a.rows(), a.rows())) {
        return Err(AlgebraError::HypothesisViolated("p(A) != 0".into()));
    }
    let pb = p.eval_matrix(b)?;
    let pb_inv = pb
        .inverse()
        .map_err(|_| AlgebraError::HypothesisViolated("p(B) is singular".into()))?;
    // T_1 = C, T_{k+1} = A T_k + C B^k, X0 = sum_{k>=1} c_k T_k
    let mut x0 = Matrix::zeros(c.domain(), c.rows(), c.cols());
    let mut t = c.clone();
    let mut bpow = Matrix::identity(b.domain(), b.rows());
    for k in 1..=p.degree() {
        if k > 1 {
            bpow = bpow.mul(b)?;
            t = a.mul(&t)?.add(&c.mul(&bpow)?)?;
        }
        let ck = p.coeffs()[k].embed(c.domain())?;
        x0 = x0.add(&t.scale_left(&ck))?;
    }
    let x = x0.neg().mul(&pb_inv)?;
    Ok(x)
}

/// Mirror form: solves AX - XB = C given p(A) invertible and p(B) = 0;
/// here A X0 - X0 B = p(A) C, so X = p(A)^{-1} X0.
pub fn sylvester_solve_mirror(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    p: &ScalarPoly,
) -> Result<Matrix> {
    if c.rows() != a.rows() || c.cols() != b.rows() {
        return Err(AlgebraError::ShapeMismatch(
            "C must be n x m for A n x n, B m x m".into(),
        ));
    }
    let pb = p.eval_matrix(b)?;
    if !pb.approx_eq(&Matrix::zeros(b.domain(), b.rows(), b.rows())) {
        return Err(AlgebraError::HypothesisViolated("p(B) != 0".into()));
    }
    let pa = p.eval_matrix(a)?;
    let pa_inv = pa
        .inverse()
        .map_err(|_| AlgebraError::HypothesisViolated("p(A) is singular".into()))?;
    let mut x0 = Matrix::zeros(c.domain(), c.rows(), c.cols());
    let mut t = c.clone();
    let mut bpow = Matrix::identity(b.domain(), b.rows());
    for k in 1..=p.degree() {
        if k > 1 {
            bpow = bpow.mul(b)?;
            t = a.mul(&t)?.add(&c.mul(&bpow)?)?;
        }
        let ck = p.coeffs()[k].embed(c.domain())?;
        x0 = x0.add(&t.scale_left(&ck))?;
    }
    pa_inv.mul(&x0)
}

// ---- block merging (corner elimination) ------------------------------------

/// Shows [[B, alpha], [0, a]] similar to B (+) (a) when p(B) = 0 and p(a) is
/// invertible; the conjugator comes from the Sylvester solution of
/// By - ya = alpha.
pub fn block_merge_similarity(
    b: &Matrix,
    alpha: &Matrix,
    a: &Scalar,
    p: &ScalarPoly,
) -> Result<SimilarityCertificate> {
    let n = b.rows();
    let domain = b.domain();
    if alpha.rows() != n || alpha.cols() != 1 {
        return Err(AlgebraError::ShapeMismatch("alpha must be n x 1".into()));
    }
    let a_mat = Matrix::scalar_matrix(1, a);
    let y = sylvester_solve(b, &a_mat, alpha, p)?;
    let mut input = Matrix::zeros(domain, n + 1, n + 1);
    input.set_block(0, 0, b);
    input.set_block(0, n, alpha);
    input[(n, n)] = a.clone();
    let canonical = b.direct_sum(&a_mat)?;
    // Q = [[I, y],[0,1]] conjugates input to canonical on the left; the
    // certificate stores P = Q^{-1}.
    let mut pinv = Matrix::identity(domain, n + 1);
    pinv.set_block(0, n, &y.neg());
    let cert = SimilarityCertificate::new("block-merge", input, pinv, canonical);
    cert.verify()?;
    Ok(cert)
}

/// Lower-corner variant: [[B, 0], [ell, a]] similar to B (+) (a) when
/// p(B) = 0 and p(a) is invertible, via the mirrored Sylvester solution of
/// ay - yB = ell.
pub fn block_merge_similarity_lower(
    b: &Matrix,
    ell: &Matrix,
    a: &Scalar,
    p: &ScalarPoly,
) -> Result<SimilarityCertificate> {
    let n = b.rows();
    let domain = b.domain();
    if ell.rows() != 1 || ell.cols() != n {
        return Err(AlgebraError::ShapeMismatch("ell must be 1 x n".into()));
    }
    let a_mat = Matrix::scalar_matrix(1, a);
    let y = sylvester_solve_mirror(&a_mat, b, ell, p)?;
    let mut input = Matrix::zeros(domain, n + 1, n + 1);
    input.set_block(0, 0, b);
    input.set_block(n, 0, ell);
    input[(n, n)] = a.clone();
    let canonical = b.direct_sum(&a_mat)?;
    let mut pinv = Matrix::identity(domain, n + 1);
    pinv.set_block(n, 0, &y.neg());
    let cert = SimilarityCertificate::new("block-merge-lower", input, pinv, canonical);
    cert.verify()?;
    Ok(cert)
}

// ---- basis completion -------------------------------------------------------

/// Extends independent columns to a full basis. Attempt 0 appends standard
/// basis vectors greedily; later attempts draw small random columns, which
/// is how the retry loops steer away from degenerate Schur complements.
fn complete_basis(
    initial: Vec<Matrix>,
    domain: ScalarDomain,
    n: usize,
    rng: &mut SmallRng,
    attempt: usize,
) -> Result<Matrix> {
    let mut cols = initial;
    let mut current = Matrix::hstack(&cols.iter().collect::<Vec<_>>())?;
    let mut rank = current.rank();
    if rank < cols.len() {
        return Err(AlgebraError::ShapeMismatch(
            "initial columns are dependent".into(),
        ));
    }
    let mut guard = 0usize;
    while cols.len() < n {
        let cand = if attempt == 0 {
            let i = guard;
            if i >= n {
                return Err(AlgebraError::RetryExhausted {
                    attempts: guard,
                    context: "basis completion ran out of standard vectors".into(),
                });
            }
            Matrix::unit_column(domain, n, i)
        } else {
            let mut v = Matrix::zeros(domain, n, 1);
            for t in 0..n {
                v[(t, 0)] = Scalar::from_i64(domain, rng.random_range(-2..=2));
            }
            v
        };
        guard += 1;
        if guard > 64 * n {
            return Err(AlgebraError::RetryExhausted {
                attempts: guard,
                context: "basis completion".into(),
            });
        }
        let trial = Matrix::hstack(&[&current, &cand])?;
        if trial.rank() > rank {
            rank += 1;
            cols.push(cand);
            current = trial;
        }
    }
    Ok(current)
}

// ---- Rowen form ---------------------------------------------------------------

/// Conjugates a noncentral matrix so the (1,1) entry becomes zero: the basis
/// (v, Av, ...) for a non-eigenvector v sends the first column to e_2.
pub fn rowen_form(a: &Matrix) -> Result<SimilarityCertificate> {
    if !a.is_square() || a.rows() < 2 {
        return Err(AlgebraError::ShapeMismatch("rowen_form needs n >= 2".into()));
    }
    let v = non_eigenvector(a)?;
    let av = a.mul(&v)?;
    let mut rng = SmallRng::seed_from_u64(0);
    let p = complete_basis(vec![v, av], a.domain(), a.rows(), &mut rng, 0)?;
    let canonical = crate::matrix::conjugate(a, &p)?;
    let cert = SimilarityCertificate::new("rowen", a.clone(), p, canonical);
    cert.verify()?;
    if !cert.canonical[(0, 0)].is_zero() {
        return Err(AlgebraError::HypothesisViolated(
            "rowen form failed to zero the corner".into(),
        ));
    }
    Ok(cert)
}

// ---- LHU decomposition -----------------------------------------------------

/// P^{-1} A P = L H U with L unit lower, U unit upper, and
/// H = diag(h_1, ..., h_{n-1}, h_n) for the prescribed h_1..h_{n-1}.
pub struct LhuDecomposition {
    pub conjugator: Matrix,
    pub lower: Matrix,
    pub diag: Matrix,
    pub upper: Matrix,
}

impl LhuDecomposition {
    pub fn h_last(&self) -> Scalar {
        let n = self.diag.rows();
        self.diag[(n - 1, n - 1)].clone()
    }

    pub fn verify(&self, input: &Matrix) -> Result<f64> {
        let lhu = self.lower.mul(&self.diag)?.mul(&self.upper)?;
        let conj = crate::matrix::conjugate(input, &self.conjugator)?;
        let residual = conj.relative_residual(&lhu);
        if !conj.approx_eq(&lhu) {
            return Err(AlgebraError::NormResidual {
                residual,
                tolerance: input.domain().tolerance(),
            });
        }
        Ok(residual)
    }
}

/// Prescribed-pivot Schur recursion: conjugate so the first column becomes
/// (h_1, 1, 0, ...)^T, split off the Schur complement through the
/// unit-triangular identity, and recurse with h_2.. on the complement.
/// A central complement of size >= 2 would make the prescription impossible,
/// so those trigger a basis-steering retry.
pub fn lhu_decompose(a: &Matrix, h: &[Scalar], seed: u64) -> Result<LhuDecomposition> {
    let n = a.rows();
    if !a.is_square() || n < 2 {
        return Err(AlgebraError::ShapeMismatch("lhu needs n >= 2".into()));
    }
    if h.len() != n - 1 {
        return Err(AlgebraError::ShapeMismatch(format!(
            "need {} prescribed pivots, got {}",
            n - 1,
            h.len()
        )));
    }
    if a.is_central_matrix() {
        return Err(AlgebraError::CentralInput);
    }
    if !a.is_invertible() {
        return Err(AlgebraError::Singular);
    }
    let domain = a.domain();
    let h: Vec<Scalar> = h
        .iter()
        .map(|x| x.embed(domain))
        .collect::<Result<Vec<_>>>()?;
    if h.iter().any(|x| x.is_zero()) {
        return Err(AlgebraError::HypothesisViolated(
            "prescribed pivots must be nonzero".into(),
        ));
    }
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut budget = 256usize;
    let dec = lhu_rec(a, &h, &mut rng, &mut budget)?;
    dec.verify(a)?;
    Ok(dec)
}

fn lhu_rec(
    a: &Matrix,
    h: &[Scalar],
    rng: &mut SmallRng,
    budget: &mut usize,
) -> Result<LhuDecomposition> {
    let n = a.rows();
    let domain = a.domain();
    if n == 1 {
        if a[(0, 0)].is_zero() {
            return Err(AlgebraError::Singular);
        }
        let id = Matrix::identity(domain, 1);
        return Ok(LhuDecomposition {
            conjugator: id.clone(),
            lower: id.clone(),
            diag: a.clone(),
            upper: id,
        });
    }
    let h1 = &h[0];
    let h1_inv = h1.inv()?;
    for attempt in 0..64usize {
        if *budget == 0 {
            return Err(AlgebraError::RetryExhausted {
                attempts: attempt,
                context: "lhu pivot steering budget".into(),
            });
        }
        *budget -= 1;
        // pick v with {v, Av} independent
        let v = if attempt == 0 {
            non_eigenvector(a)?
        } else {
            let mut cand = Matrix::zeros(domain, n, 1);
            for t in 0..n {
                cand[(t, 0)] = Scalar::from_i64(domain, rng.random_range(-2..=2));
            }
            let av = a.mul(&cand)?;
            if Matrix::hstack(&[&cand, &av])?.rank() != 2 {
                continue;
            }
            cand
        };
        let av = a.mul(&v)?;
        let w = av.sub(&v.scale_right(h1))?;
        if Matrix::hstack(&[&v, &w])?.rank() != 2 {
            continue;
        }
        let q = match complete_basis(vec![v, w], domain, n, rng, attempt) {
            Ok(q) => q,
            Err(_) => continue,
        };
        let m = crate::matrix::conjugate(a, &q)?;
        let b = m.submatrix(0, 1, 1, n - 1);
        let c = m.submatrix(1, 0, n - 1, 1);
        let mprime = m.submatrix(1, 1, n - 1, n - 1);
        // Schur complement S = M' - c h1^{-1} b
        let s = mprime.sub(&c.scale_right(&h1_inv).mul(&b)?)?;
        if n > 2 && s.is_central_matrix() {
            continue; // prescription impossible on a central block; steer away
        }
        if !s.is_invertible() {
            continue;
        }
        let inner = match lhu_rec(&s, &h[1..], rng, budget) {
            Ok(d) => d,
            Err(AlgebraError::RetryExhausted { .. }) | Err(AlgebraError::CentralInput) => continue,
            Err(e) => return Err(e),
        };
        let ps = &inner.conjugator;
        let ps_inv = ps.inverse()?;
        // P = Q (1 (+) P_s)
        let one = Matrix::identity(domain, 1);
        let t = one.direct_sum(ps)?;
        let conjugator = q.mul(&t)?;
        // L = [[1,0],[P_s^{-1} c h1^{-1}, L2]]
        let mut lower = Matrix::identity(domain, n);
        lower.set_block(1, 0, &ps_inv.mul(&c.scale_right(&h1_inv))?);
        lower.set_block(1, 1, &inner.lower);
        // H = h1 (+) H2
        let diag = Matrix::scalar_matrix(1, h1).direct_sum(&inner.diag)?;
        // U = [[1, h1^{-1} b P_s],[0, U2]]
        let mut upper = Matrix::identity(domain, n);
        upper.set_block(0, 1, &b.scale_left(&h1_inv).mul(ps)?);
        upper.set_block(1, 1, &inner.upper);
        return Ok(LhuDecomposition {
            conjugator,
            lower,
            diag,
            upper,
        });
    }
    Err(AlgebraError::RetryExhausted {
        attempts: 64,
        context: "lhu pivot steering".into(),
    })
}

// ---- scalar Sylvester over quaternions ---------------------------------------

/// Coordinates of the left-multiplication action x -> q x on the basis
/// (1, i, j, k), one value per basis vector.
fn left_mult_columns(q: &Scalar) -> Vec<Scalar> {
    let domain = q.domain();
    (0..4)
        .map(|t| {
            let e = if t == 0 {
                Scalar::one(domain)
            } else {
                Scalar::quat_unit(domain, t)
            };
            q * &e
        })
        .collect()
}

fn right_mult_columns(q: &Scalar) -> Vec<Scalar> {
    let domain = q.domain();
    (0..4)
        .map(|t| {
            let e = if t == 0 {
                Scalar::one(domain)
            } else {
                Scalar::quat_unit(domain, t)
            };
            &e * q
        })
        .collect()
}

/// Solves the scalar Sylvester equation a x - x b = c over a quaternion
/// domain as a 4x4 base-field linear system; fails with ConjugateDiagonal
/// when a and b are conjugate (the system is singular exactly then).
pub fn scalar_sylvester(a: &Scalar, b: &Scalar, c: &Scalar) -> Result<Scalar> {
    let domain = a.domain();
    if !domain.is_quaternion() {
        // field case: x (a - b) = c
        let d = a - b;
        if d.is_zero() {
            return Err(AlgebraError::ConjugateDiagonal);
        }
        return Ok(c * &d.inv()?);
    }
    let la = left_mult_columns(a);
    let rb = right_mult_columns(b);
    match domain {
        ScalarDomain::QuaternionRational => {
            let rd = ScalarDomain::Rational;
            let mut rows = vec![vec![Scalar::zero(rd); 4]; 4];
            for col in 0..4 {
                let diff_coords = (&la[col] - &rb[col]).coords_rat()?;
                for (row, coord) in diff_coords.iter().enumerate() {
                    rows[row][col] = Scalar::Rat(coord.clone());
                }
            }
            let m = Matrix::from_rows(rd, rows)?;
            let c_coords = c.coords_rat()?;
            let rhs = Matrix::from_rows(
                rd,
                c_coords.iter().map(|x| vec![Scalar::Rat(x.clone())]).collect(),
            )?;
            let x = m.solve_right(&rhs).ok_or(AlgebraError::ConjugateDiagonal)?;
            let mut coords = [
                num_rational::BigRational::from_integer(0.into()),
                num_rational::BigRational::from_integer(0.into()),
                num_rational::BigRational::from_integer(0.into()),
                num_rational::BigRational::from_integer(0.into()),
            ];
            for (t, coord) in coords.iter_mut().enumerate() {
                if let Scalar::Rat(r) = &x[(t, 0)] {
                    *coord = r.clone();
                }
            }
            Ok(Scalar::quat_rat_coords(coords))
        }
        ScalarDomain::QuaternionFloat(tol) => {
            let mut m = [[0.0f64; 4]; 4];
            for col in 0..4 {
                let diff = (&la[col] - &rb[col]).coords_f64();
                for (row, val) in diff.iter().enumerate() {
                    m[row][col] = *val;
                }
            }
            let rhs = c.coords_f64();
            let x = f64_solve4(m, rhs).ok_or(AlgebraError::ConjugateDiagonal)?;
            Ok(Scalar::quat_f64_tol(x, tol))
        }
        _ => unreachable!(),
    }
}

#[allow(clippy::needless_range_loop)]
fn f64_solve4(mut m: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    let n = 4;
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        let inv = 1.0 / m[col][col];
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[i][col] * inv;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[i][j] -= f * m[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    Some([
        b[0] / m[0][0],
        b[1] / m[1][1],
        b[2] / m[2][2],
        b[3] / m[3][3],
    ])
}

/// True iff two quaternions are conjugate: equal real parts and equal norms
/// (exactly, or within tolerance on the float domain).
pub fn quat_conjugate_pair(a: &Scalar, b: &Scalar) -> bool {
    if !a.domain().is_quaternion() {
        return a.approx_eq(b);
    }
    let re_match = a.re_part().approx_eq(&b.re_part());
    let n_match = a
        .quat_norm()
        .expect("quaternion")
        .approx_eq(&b.quat_norm().expect("quaternion"));
    re_match && n_match
}

// ---- triangular diagonalization ----------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiagMode {
    /// Diagonal entries pairwise distinct, the first n-1 of them central.
    CentralDistinct,
    /// Quaternion diagonal entries pairwise nonconjugate.
    PairwiseNonconjugate,
}

/// Conjugates a triangular matrix with suitable diagonal onto its diagonal:
/// the recursion peels the top-left entry and solves one scalar Sylvester
/// equation per remaining diagonal entry.
pub fn diagonalize_tri_distinct(t: &Matrix, mode: DiagMode) -> Result<SimilarityCertificate> {
    let n = t.rows();
    if !t.is_square() {
        return Err(AlgebraError::ShapeMismatch("square input required".into()));
    }
    let upper = t.is_upper_triangular();
    if !upper && !t.is_lower_triangular() {
        return Err(AlgebraError::NotTriangular);
    }
    let diag: Vec<Scalar> = (0..n).map(|i| t[(i, i)].clone()).collect();
    match mode {
        DiagMode::CentralDistinct => {
            for (idx, d) in diag.iter().take(n.saturating_sub(1)).enumerate() {
                if !d.is_central() {
                    return Err(AlgebraError::HypothesisViolated(format!(
                        "diagonal entry {idx} must be central"
                    )));
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    if diag[i].approx_eq(&diag[j]) {
                        return Err(AlgebraError::ConjugateDiagonal);
                    }
                }
            }
        }
        DiagMode::PairwiseNonconjugate => {
            for i in 0..n {
                for j in i + 1..n {
                    if quat_conjugate_pair(&diag[i], &diag[j]) {
                        return Err(AlgebraError::ConjugateDiagonal);
                    }
                }
            }
        }
    }
    let p = if upper {
        diag_tri_rec_upper(t)?
    } else {
        diag_tri_rec_lower(t)?
    };
    let canonical = Matrix::diag(t.domain(), &diag);
    let cert = SimilarityCertificate::new("tri-diagonalize", t.clone(), p, canonical);
    cert.verify()?;
    Ok(cert)
}

fn diag_tri_rec_upper(t: &Matrix) -> Result<Matrix> {
    let n = t.rows();
    let domain = t.domain();
    if n == 1 {
        return Ok(Matrix::identity(domain, 1));
    }
    let a1 = t[(0, 0)].clone();
    let alpha = t.submatrix(0, 1, 1, n - 1);
    let tail = t.submatrix(1, 1, n - 1, n - 1);
    let p_tail = diag_tri_rec_upper(&tail)?;
    let alpha_p = alpha.mul(&p_tail)?;
    // solve a1 x_j - x_j d_j = -(alpha P')_j per entry
    let mut x = Matrix::zeros(domain, 1, n - 1);
    for j in 0..n - 1 {
        let dj = &tail[(j, j)];
        let rhs = -&alpha_p[(0, j)];
        x[(0, j)] = scalar_sylvester(&a1, dj, &rhs)?;
    }
    let one = Matrix::identity(domain, 1);
    let mut shear = Matrix::identity(domain, n);
    shear.set_block(0, 1, &x);
    one.direct_sum(&p_tail)?.mul(&shear)
}

fn diag_tri_rec_lower(t: &Matrix) -> Result<Matrix> {
    let n = t.rows();
    let domain = t.domain();
    if n == 1 {
        return Ok(Matrix::identity(domain, 1));
    }
    let a1 = t[(0, 0)].clone();
    let beta = t.submatrix(1, 0, n - 1, 1);
    let tail = t.submatrix(1, 1, n - 1, n - 1);
    let p_tail = diag_tri_rec_lower(&tail)?;
    let beta_p = p_tail.inverse()?.mul(&beta)?;
    // solve d_j x_j - x_j a1 = -(P'^{-1} beta)_j per entry
    let mut x = Matrix::zeros(domain, n - 1, 1);
    for j in 0..n - 1 {
        let dj = &tail[(j, j)];
        let rhs = -&beta_p[(j, 0)];
        x[(j, 0)] = scalar_sylvester(dj, &a1, &rhs)?;
    }
    let one = Matrix::identity(domain, 1);
    let mut shear = Matrix::identity(domain, n);
    shear.set_block(1, 0, &x);
    one.direct_sum(&p_tail)?.mul(&shear)
}

// ---- nilpotent Jordan form ------------------------------------------------------

/// Jordan block sizes read off a nilpotent canonical form, descending.
pub fn nilpotent_block_sizes(cert: &SimilarityCertificate) -> Vec<usize> {
    let n = cert.canonical.rows();
    let mut sizes = Vec::new();
    let mut start = 0usize;
    while start < n {
        let mut len = 1usize;
        while start + len < n && cert.canonical[(start + len - 1, start + len)].is_one() {
            len += 1;
        }
        sizes.push(len);
        start += len;
    }
    sizes
}

/// Similarity onto a direct sum of nilpotent Jordan blocks, sizes descending,
/// built from Jordan chains chosen by elimination over the division ring.
pub fn nilpotent_jordan(m: &Matrix) -> Result<SimilarityCertificate> {
    let n = m.rows();
    if !m.is_square() {
        return Err(AlgebraError::ShapeMismatch("square input required".into()));
    }
    let domain = m.domain();
    let zero = Matrix::zeros(domain, n, n);
    if !m.pow(n)?.approx_eq(&zero) {
        return Err(AlgebraError::NotNilpotent);
    }
    // nilpotency index
    let mut s = 1usize;
    let mut pow = m.clone();
    while !pow.approx_eq(&zero) {
        pow = pow.mul(m)?;
        s += 1;
    }
    // kernel bases of m^k
    let mut kernels: Vec<Vec<Matrix>> = vec![Vec::new()]; // k = 0
    for k in 1..=s {
        kernels.push(m.pow(k)?.right_kernel_basis());
    }
    let mut chains: Vec<Vec<Matrix>> = Vec::new();
    let mut carried: Vec<Matrix> = Vec::new();
    for k in (1..=s).rev() {
        let lower: &[Matrix] = &kernels[k - 1];
        let mut context: Vec<Matrix> = lower.to_vec();
        context.extend(carried.iter().cloned());
        let mut rank = if context.is_empty() {
            0
        } else {
            Matrix::hstack(&context.iter().collect::<Vec<_>>())?.rank()
        };
        let mut tops: Vec<Matrix> = Vec::new();
        for cand in &kernels[k] {
            context.push(cand.clone());
            let r = Matrix::hstack(&context.iter().collect::<Vec<_>>())?.rank();
            if r > rank {
                rank = r;
                tops.push(cand.clone());
            } else {
                context.pop();
            }
        }
        for t in &tops {
            let mut chain = vec![t.clone()];
            for _ in 1..k {
                let prev = chain.last().unwrap();
                chain.push(m.mul(prev)?);
            }
            chain.reverse(); // kernel vector first
            chains.push(chain);
        }
        let mut next_carried = Vec::new();
        for v in carried.iter().chain(tops.iter()) {
            next_carried.push(m.mul(v)?);
        }
        carried = next_carried;
    }
    chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let cols: Vec<&Matrix> = chains.iter().flatten().collect();
    if cols.len() != n {
        return Err(AlgebraError::HypothesisViolated(format!(
            "jordan chains span {} of {} dimensions",
            cols.len(),
            n
        )));
    }
    let p = Matrix::hstack(&cols)?;
    if !p.is_invertible() {
        return Err(AlgebraError::HypothesisViolated(
            "jordan chain matrix is singular".into(),
        ));
    }
    let mut canonical = Matrix::zeros(domain, n, n);
    let mut at = 0usize;
    for chain in &chains {
        let len = chain.len();
        for t in 0..len.saturating_sub(1) {
            canonical[(at + t, at + t + 1)] = Scalar::one(domain);
        }
        at += len;
    }
    let cert = SimilarityCertificate::new("nilpotent-jordan", m.clone(), p, canonical);
    cert.verify()?;
    Ok(cert)
}

// ---- Fitting split ------------------------------------------------------------

/// Splits a singular non-nilpotent matrix as G (+) N with G invertible and N
/// nilpotent, from the right-space decomposition im(A^n) (+) ker(A^n).
pub fn fitting_split(a: &Matrix) -> Result<SimilarityCertificate> {
    let n = a.rows();
    if !a.is_square() || n < 2 {
        return Err(AlgebraError::ShapeMismatch(
            "fitting_split needs n >= 2".into(),
        ));
    }
    if a.is_invertible() {
        return Err(AlgebraError::Invertible);
    }
    let domain = a.domain();
    let an = a.pow(n)?;
    if an.approx_eq(&Matrix::zeros(domain, n, n)) {
        return Err(AlgebraError::Nilpotent);
    }
    let im_basis = an.column_space_basis();
    let ker_basis = an.right_kernel_basis();
    let mut cols: Vec<&Matrix> = im_basis.iter().collect();
    cols.extend(ker_basis.iter());
    let p = Matrix::hstack(&cols)?;
    if p.cols() != n || !p.is_invertible() {
        return Err(AlgebraError::HypothesisViolated(
            "image and kernel of A^n do not split the space".into(),
        ));
    }
    let conj = crate::matrix::conjugate(a, &p)?;
    let m = im_basis.len();
    let g = conj.submatrix(0, 0, m, m);
    let nil = conj.submatrix(m, m, n - m, n - m);
    if !g.is_invertible() {
        return Err(AlgebraError::HypothesisViolated(
            "invertible part of the Fitting split is singular".into(),
        ));
    }
    if !nil
        .pow(n - m)?
        .approx_eq(&Matrix::zeros(domain, n - m, n - m))
    {
        return Err(AlgebraError::HypothesisViolated(
            "nilpotent part of the Fitting split is not nilpotent".into(),
        ));
    }
    let canonical = g.direct_sum(&nil)?;
    let cert = SimilarityCertificate::new("fitting", a.clone(), p, canonical);
    cert.verify()?;
    Ok(cert)
}

// ---- skew involution canonical form ----------------------------------------------

/// Finds a scalar square root of -1 in the domain: i over the quaternions, a
/// search over GF(p) (succeeds exactly when p = 1 mod 4).
pub fn scalar_skew_involution(domain: ScalarDomain) -> Result<Scalar> {
    match domain {
        ScalarDomain::QuaternionRational | ScalarDomain::QuaternionFloat(_) => {
            Ok(Scalar::quat_unit(domain, 1))
        }
        ScalarDomain::PrimeField(p) => {
            if p == 2 {
                return Ok(Scalar::one(domain)); // -1 = 1 in char 2
            }
            for v in 1..p {
                let s = Scalar::from_i64(domain, v as i64);
                if (&(&s * &s) + &Scalar::one(domain)).is_zero() {
                    return Ok(s);
                }
            }
            Err(AlgebraError::NoScalarSkewInvolution)
        }
        ScalarDomain::Rational => Err(AlgebraError::NoScalarSkewInvolution),
    }
}

/// Canonical form of a matrix A with A^2 = -I: diag(alpha I_r, -alpha I_{n-r})
/// when the characteristic is not 2, with r = rank(A + alpha I); the
/// unitriangular block form over GF(2).
pub fn skew_involution_form(a: &Matrix) -> Result<SimilarityCertificate> {
    let n = a.rows();
    if !a.is_square() {
        return Err(AlgebraError::ShapeMismatch("square input required".into()));
    }
    let domain = a.domain();
    let minus_id = Matrix::identity(domain, n).neg();
    if !a.pow(2)?.approx_eq(&minus_id) {
        return Err(AlgebraError::NotSkewInvolution);
    }
    if domain.characteristic() == 2 {
        return skew_involution_form_char2(a);
    }
    let alpha = scalar_skew_involution(domain)?;
    let alpha_id = Matrix::scalar_matrix(n, &alpha);
    let b = a.add(&alpha_id)?;
    let r = b.rank();
    // columns of the conjugator: r of {v : Av = v alpha}, then n-r of
    // {v : Av = -v alpha}
    let plus = eigencolumns(a, &alpha)?;
    let minus = eigencolumns(a, &(-&alpha))?;
    let mut chosen: Vec<Matrix> = Vec::new();
    let mut rank = 0usize;
    for (pool, want) in [(&plus, r), (&minus, n - r)] {
        let mut taken = 0usize;
        for cand in pool {
            if taken == want {
                break;
            }
            let mut trial = chosen.clone();
            trial.push(cand.clone());
            let rk = Matrix::hstack(&trial.iter().collect::<Vec<_>>())?.rank();
            if rk > rank {
                rank = rk;
                chosen = trial;
                taken += 1;
            }
        }
        if taken != want {
            return Err(AlgebraError::HypothesisViolated(
                "eigencolumn pools do not fill the expected ranks".into(),
            ));
        }
    }
    let p = Matrix::hstack(&chosen.iter().collect::<Vec<_>>())?;
    if !p.is_invertible() {
        return Err(AlgebraError::HypothesisViolated(
            "skew involution eigenbasis is singular".into(),
        ));
    }
    let mut canonical = Matrix::zeros(domain, n, n);
    for t in 0..r {
        canonical[(t, t)] = alpha.clone();
    }
    for t in r..n {
        canonical[(t, t)] = -&alpha;
    }
    let cert = SimilarityCertificate::new("skew-involution", a.clone(), p, canonical);
    cert.verify()?;
    Ok(cert)
}

fn skew_involution_form_char2(a: &Matrix) -> Result<SimilarityCertificate> {
    let n = a.rows();
    let domain = a.domain();
    let b = a.sub(&Matrix::identity(domain, n))?;
    let jordan = nilpotent_jordan(&b)?;
    let sizes = nilpotent_block_sizes(&jordan);
    if sizes.iter().any(|&s| s > 2) {
        return Err(AlgebraError::NotSkewInvolution);
    }
    let r = sizes.iter().filter(|&&s| s == 2).count();
    // permutation taking the (2,..,2,1,..,1) block layout to
    // [[I_r, I_r],[0, I_r]] (+) I_{n-2r}: block t occupies rows 2t, 2t+1 and
    // lands at t and r+t.
    let mut perm = Matrix::zeros(domain, n, n);
    for t in 0..r {
        perm[(2 * t, t)] = Scalar::one(domain);
        perm[(2 * t + 1, r + t)] = Scalar::one(domain);
    }
    for s in 2 * r..n {
        perm[(s, s)] = Scalar::one(domain);
    }
    let p = jordan.conjugator.mul(&perm)?;
    let mut canonical = Matrix::identity(domain, n);
    for t in 0..r {
        canonical[(t, r + t)] = Scalar::one(domain);
    }
    let cert = SimilarityCertificate::new("skew-involution-char2", a.clone(), p, canonical);
    cert.verify()?;
    Ok(cert)
}

/// Right "eigencolumns" {v : Av = v alpha}. Over a field this is the kernel
/// of A - alpha I; over the quaternions the condition is only base-field
/// linear, so it is solved by real (or rational) linearization with four
/// unknown coordinates per entry.
fn eigencolumns(a: &Matrix, alpha: &Scalar) -> Result<Vec<Matrix>> {
    let n = a.rows();
    let domain = a.domain();
    if domain.is_field() {
        let shifted = a.sub(&Matrix::scalar_matrix(n, alpha))?;
        return Ok(shifted.right_kernel_basis());
    }
    let ra = right_mult_columns(alpha);
    match domain {
        ScalarDomain::QuaternionRational => {
            let rd = ScalarDomain::Rational;
            let mut rows = vec![vec![Scalar::zero(rd); 4 * n]; 4 * n];
            for i in 0..n {
                for e in 0..n {
                    for t in 0..4 {
                        let basis = if t == 0 {
                            Scalar::one(domain)
                        } else {
                            Scalar::quat_unit(domain, t)
                        };
                        // contribution of the t-th coordinate of v_e to the
                        // block row i of Av - v alpha
                        let mut contrib = &a[(i, e)] * &basis;
                        if i == e {
                            contrib = &contrib - &ra[t];
                        }
                        let coords = contrib.coords_rat()?;
                        for (row, coord) in coords.iter().enumerate() {
                            rows[4 * i + row][4 * e + t] = Scalar::Rat(coord.clone());
                        }
                    }
                }
            }
            let m = Matrix::from_rows(rd, rows)?;
            let kernel = m.right_kernel_basis();
            let mut out = Vec::new();
            for kv in kernel {
                let mut v = Matrix::zeros(domain, n, 1);
                for e in 0..n {
                    let mut acc = Scalar::zero(domain);
                    for t in 0..4 {
                        let coord = kv[(4 * e + t, 0)].clone().embed(domain)?;
                        let basis = if t == 0 {
                            Scalar::one(domain)
                        } else {
                            Scalar::quat_unit(domain, t)
                        };
                        acc = &acc + &(&basis * &coord);
                    }
                    v[(e, 0)] = acc;
                }
                out.push(v);
            }
            Ok(out)
        }
        ScalarDomain::QuaternionFloat(tol) => {
            let mut rows = vec![vec![0.0f64; 4 * n]; 4 * n];
            for i in 0..n {
                for e in 0..n {
                    for t in 0..4 {
                        let basis = if t == 0 {
                            Scalar::one(domain)
                        } else {
                            Scalar::quat_unit(domain, t)
                        };
                        let mut contrib = &a[(i, e)] * &basis;
                        if i == e {
                            contrib = &contrib - &ra[t];
                        }
                        let coords = contrib.coords_f64();
                        for (row, coord) in coords.iter().enumerate() {
                            rows[4 * i + row][4 * e + t] = *coord;
                        }
                    }
                }
            }
            let kernel = f64_kernel(rows, tol.max(1e-10));
            let mut out = Vec::new();
            for kv in kernel {
                let mut v = Matrix::zeros(domain, n, 1);
                for e in 0..n {
                    v[(e, 0)] = Scalar::quat_f64_tol(
                        [kv[4 * e], kv[4 * e + 1], kv[4 * e + 2], kv[4 * e + 3]],
                        tol,
                    );
                }
                out.push(v);
            }
            Ok(out)
        }
        _ => unreachable!(),
    }
}

/// Kernel basis of a dense f64 matrix by row reduction with a pivot
/// threshold scaled to the matrix magnitude.
#[allow(clippy::needless_range_loop)]
fn f64_kernel(mut m: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(1.0f64, f64::max);
    let threshold = tol * scale;
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let pivot = (row..rows).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()));
        let Some(pr) = pivot else { break };
        if m[pr][col].abs() <= threshold {
            continue;
        }
        m.swap(row, pr);
        let inv = 1.0 / m[row][col];
        for j in 0..cols {
            m[row][j] *= inv;
        }
        for i in 0..rows {
            if i == row {
                continue;
            }
            let f = m[i][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..cols {
                m[i][j] -= f * m[row][j];
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    let mut is_pivot = vec![false; cols];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![0.0; cols];
        v[free] = 1.0;
        for (i, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[i][free];
        }
        basis.push(v);
    }
    basis
}

// ---- zero-trace triangular commutator ------------------------------------------

/// Writes a zero-trace triangular matrix as [X, Y] = T exactly, over any of
/// the scalar domains: X is the shift along the triangle's own side, and Y is
/// filled by chasing the diagonal chains of the relation
/// [X, Y]_{ij} = Y_{i+1,j} - Y_{i,j-1} (upper case; mirrored for lower).
/// Only additions are used, which is why this works over the noncommutative
/// domains too; the main-diagonal chain closes exactly because the trace
/// vanishes.
pub fn tri_zero_trace_commutator(t: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = t.rows();
    if !t.is_square() {
        return Err(AlgebraError::ShapeMismatch("square input required".into()));
    }
    let upper = t.is_upper_triangular();
    if !upper && !t.is_lower_triangular() {
        return Err(AlgebraError::NotTriangular);
    }
    if !t.trace()?.is_zero() {
        return Err(AlgebraError::NonzeroTrace);
    }
    let domain = t.domain();
    let mut x = Matrix::zeros(domain, n, n);
    let mut y = Matrix::zeros(domain, n, n);
    if upper {
        for k in 0..n.saturating_sub(1) {
            x[(k, k + 1)] = Scalar::one(domain);
        }
        // main diagonal: Y[m+1][m] = T[0][0] + .. + T[m][m]
        let mut s = Scalar::zero(domain);
        for m in 0..n.saturating_sub(1) {
            s = &s + &t[(m, m)];
            y[(m + 1, m)] = s.clone();
        }
        // offset-t diagonals of T, t >= 1: z_0 = 0, z_{i+1} = z_i + T[i][i+t]
        for off in 1..n {
            let mut z = Scalar::zero(domain);
            for i in 0..n - off {
                z = &z + &t[(i, i + off)];
                y[(i + 1, i + off)] = z.clone();
            }
        }
    } else {
        for k in 0..n.saturating_sub(1) {
            x[(k + 1, k)] = Scalar::one(domain);
        }
        // main diagonal: Y[m][m+1] = -(T[0][0] + .. + T[m][m])
        let mut s = Scalar::zero(domain);
        for m in 0..n.saturating_sub(1) {
            s = &s + &t[(m, m)];
            y[(m, m + 1)] = -&s;
        }
        // offset-t diagonals, t >= 1: z_{k+1} = z_k - T[k+t][k]
        for off in 1..n {
            let mut z = Scalar::zero(domain);
            for k in 0..n - off {
                z = &z - &t[(k + off, k)];
                y[(k + off, k + 1)] = z.clone();
            }
        }
    }
    let replay = crate::matrix::commutator(&x, &y)?;
    if !replay.approx_eq(t) {
        return Err(AlgebraError::NormResidual {
            residual: replay.relative_residual(t),
            tolerance: domain.tolerance(),
        });
    }
    Ok((x, y))
}

// ---- zero diagonal form ------------------------------------------------------

/// Conjugates a zero-trace field matrix so every diagonal entry vanishes,
/// by recursive corner clearing; a trailing nonzero scalar block triggers a
/// randomized basis retry.
pub fn zero_diagonal_form(a: &Matrix, seed: u64) -> Result<SimilarityCertificate> {
    let n = a.rows();
    if !a.is_square() {
        return Err(AlgebraError::ShapeMismatch("square input required".into()));
    }
    if !a.domain().is_field() {
        return Err(AlgebraError::DomainMismatch(
            "zero_diagonal_form runs over a field".into(),
        ));
    }
    if !a.trace()?.is_zero() {
        return Err(AlgebraError::NonzeroTrace);
    }
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut budget = 512usize;
    let p = zero_diag_rec(a, &mut rng, &mut budget)?;
    let canonical = crate::matrix::conjugate(a, &p)?;
    for i in 0..n {
        if !canonical[(i, i)].is_zero() {
            return Err(AlgebraError::RetryExhausted {
                attempts: 512 - budget,
                context: "zero diagonal form residual diagonal".into(),
            });
        }
    }
    let cert = SimilarityCertificate::new("zero-diagonal", a.clone(), p, canonical);
    cert.verify()?;
    Ok(cert)
}

fn zero_diag_rec(a: &Matrix, rng: &mut SmallRng, budget: &mut usize) -> Result<Matrix> {
    let n = a.rows();
    let domain = a.domain();
    if (0..n).all(|i| a[(i, i)].is_zero()) {
        return Ok(Matrix::identity(domain, n));
    }
    if n == 1 || a.is_central_matrix() {
        // lambda I with lambda != 0 (n lambda = 0 in char p): no
        // zero-diagonal conjugate exists
        return Err(AlgebraError::CentralInput);
    }
    for attempt in 0..64usize {
        if *budget == 0 {
            return Err(AlgebraError::RetryExhausted {
                attempts: attempt,
                context: "zero diagonal budget".into(),
            });
        }
        *budget -= 1;
        let v = if attempt == 0 {
            non_eigenvector(a)?
        } else {
            let mut cand = Matrix::zeros(domain, n, 1);
            for t in 0..n {
                cand[(t, 0)] = random_field_element(rng, domain);
            }
            let av = a.mul(&cand)?;
            if Matrix::hstack(&[&cand, &av])?.rank() != 2 {
                continue;
            }
            cand
        };
        let av = a.mul(&v)?;
        let q = match complete_basis(vec![v, av], domain, n, rng, attempt) {
            Ok(q) => q,
            Err(_) => continue,
        };
        let m = crate::matrix::conjugate(a, &q)?;
        debug_assert!(m[(0, 0)].is_zero());
        let tail = m.submatrix(1, 1, n - 1, n - 1);
        match zero_diag_rec(&tail, rng, budget) {
            Ok(p_tail) => {
                let p = q.mul(&Matrix::identity(domain, 1).direct_sum(&p_tail)?)?;
                return Ok(p);
            }
            Err(AlgebraError::CentralInput) | Err(AlgebraError::RetryExhausted { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(AlgebraError::RetryExhausted {
        attempts: 64,
        context: "zero diagonal steering".into(),
    })
}

fn random_field_element(rng: &mut SmallRng, domain: ScalarDomain) -> Scalar {
    match domain {
        ScalarDomain::PrimeField(p) => Scalar::from_i64(domain, rng.random_range(0..p) as i64),
        _ => Scalar::from_i64(domain, rng.random_range(-3..=3)),
    }
}
