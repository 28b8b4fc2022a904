//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients (partial derivatives divided by
//! multi-index factorials) of a smooth function at an expansion point, for all
//! mixed partials up to the space's truncation order. Ring and composition
//! operations are degree-triangular: the degree-k coefficients of a result
//! depend only on coefficients of degree <= k of the operands. Consequently a
//! jet that is exact up to some degree stays exact up to that degree through
//! any arithmetic.
//!
//! [`Jet::derivative`] extracts a partial derivative as a new jet in the same
//! space. Its top-degree coefficients are unknowable from the operand and are
//! set to zero, so each extraction lowers the exact degree by one. Callers
//! that stack derivative extractions (the Finsler formulas go four deep) must
//! evaluate at a sufficiently high order; order 4 covers everything in this
//! crate.

use crate::error::{GeomError, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial basis and operation tables for jets in `n_vars` variables
/// truncated at total degree `order`.
///
/// Spaces are interned: [`JetSpace::get`] returns a shared handle, and all
/// jets constructed from the same handle may be combined.
pub struct JetSpace {
    n_vars: usize,
    order: usize,
    /// Exponent vectors in graded-lexicographic order.
    monomials: Vec<Vec<u8>>,
    /// First monomial index of each degree, plus a final sentinel.
    degree_offsets: Vec<usize>,
    /// (left, right, target) index triples for truncated multiplication.
    mul_table: Vec<(u32, u32, u32)>,
    /// `shift_up[v][i]` = index of monomial_i + e_v, or -1 if above order.
    shift_up: Vec<Vec<i32>>,
    /// Factorial of each monomial's multi-index.
    factorials: Vec<f64>,
}

fn monomials_graded_lex(n_vars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut result = Vec::new();
    let mut current = vec![0u8; n_vars];
    for degree in 0..=order {
        fn rec(current: &mut Vec<u8>, var: usize, remaining: u8, out: &mut Vec<Vec<u8>>) {
            if var + 1 == current.len() {
                current[var] = remaining;
                out.push(current.clone());
                return;
            }
            // Lexicographic within a degree: highest exponent on the first
            // variable comes first.
            for e in (0..=remaining).rev() {
                current[var] = e;
                rec(current, var + 1, remaining - e, out);
            }
            current[var] = 0;
        }
        if n_vars == 0 {
            if degree == 0 {
                result.push(Vec::new());
            }
            continue;
        }
        rec(&mut current, 0, degree as u8, &mut result);
    }
    result
}

impl JetSpace {
    fn build(n_vars: usize, order: usize) -> Arc<JetSpace> {
        assert!(n_vars >= 1, "jet space needs at least one variable");
        assert!(order >= 1, "jet space needs order >= 1");
        let monomials = monomials_graded_lex(n_vars, order);
        let index: HashMap<&[u8], usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.as_slice(), i))
            .collect();

        let mut degree_offsets = vec![0usize; order + 2];
        for m in &monomials {
            let d: usize = m.iter().map(|&e| e as usize).sum();
            degree_offsets[d + 1] += 1;
        }
        for d in 0..=order {
            degree_offsets[d + 1] += degree_offsets[d];
        }

        let mut mul_table = Vec::new();
        let mut sum = vec![0u8; n_vars];
        for (i, mi) in monomials.iter().enumerate() {
            let di: usize = mi.iter().map(|&e| e as usize).sum();
            for j in 0..degree_offsets[order - di + 1] {
                let mj = &monomials[j];
                for v in 0..n_vars {
                    sum[v] = mi[v] + mj[v];
                }
                let k = index[sum.as_slice()];
                mul_table.push((i as u32, j as u32, k as u32));
            }
        }

        let mut shift_up = Vec::with_capacity(n_vars);
        for v in 0..n_vars {
            let mut table = vec![-1i32; monomials.len()];
            for (i, mi) in monomials.iter().enumerate() {
                let d: usize = mi.iter().map(|&e| e as usize).sum();
                if d < order {
                    let mut up = mi.clone();
                    up[v] += 1;
                    table[i] = index[up.as_slice()] as i32;
                }
            }
            shift_up.push(table);
        }

        let factorials = monomials
            .iter()
            .map(|m| m.iter().map(|&e| (1..=e as u64).product::<u64>() as f64).product())
            .collect();

        Arc::new(JetSpace {
            n_vars,
            order,
            monomials,
            degree_offsets,
            mul_table,
            shift_up,
            factorials,
        })
    }

    /// Fetch (building and caching on first use) the space for the given
    /// variable count and truncation order.
    pub fn get(n_vars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry((n_vars, order))
            .or_insert_with(|| JetSpace::build(n_vars, order))
            .clone()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of monomials, binomial(n_vars + order, order).
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn monomial(&self, idx: usize) -> &[u8] {
        &self.monomials[idx]
    }

    /// Index of a multi-index, if it is within the truncation order.
    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        let degree: usize = alpha.iter().map(|&e| e as usize).sum();
        if degree > self.order || alpha.len() != self.n_vars {
            return None;
        }
        // Binary search within the degree block.
        let lo = self.degree_offsets[degree];
        let hi = self.degree_offsets[degree + 1];
        self.monomials[lo..hi]
            .binary_search_by(|m| cmp_lex(m, alpha))
            .ok()
            .map(|pos| lo + pos)
    }
}

/// Graded-lex comparison within one degree block: larger leading exponents
/// sort first.
fn cmp_lex(a: &[u8], b: &[u8]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match y.cmp(x) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(n_vars={}, order={})", self.n_vars, self.order)
    }
}

/// A truncated Taylor polynomial: one coefficient per monomial of its space.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(value={}, n={}, ord={})", self.value(), self.space.n_vars, self.space.order)
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Jet {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        Jet { space: space.clone(), coeffs }
    }

    /// Jet of the coordinate function `x_index` expanded at `value`.
    pub fn variable(space: &Arc<JetSpace>, index: usize, value: f64) -> Result<Jet> {
        if index >= space.n_vars {
            return Err(GeomError::VarIndexOutOfRange { index, n_vars: space.n_vars });
        }
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = value;
        let mut alpha = vec![0u8; space.n_vars];
        alpha[index] = 1;
        coeffs[space.index_of(&alpha).expect("order >= 1")] = 1.0;
        Ok(Jet { space: space.clone(), coeffs })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Constant term, the function value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// True mixed partial for the multi-index: coefficient times factorial.
    pub fn partial(&self, alpha: &[u8]) -> Result<f64> {
        let degree: usize = alpha.iter().map(|&e| e as usize).sum();
        match self.space.index_of(alpha) {
            Some(i) => Ok(self.coeffs[i] * self.space.factorials[i]),
            None => Err(GeomError::OrderExceeded { got: degree, max: self.space.order }),
        }
    }

    /// First partial with respect to one variable (value only).
    pub fn d(&self, var: usize) -> f64 {
        let mut alpha = vec![0u8; self.space.n_vars];
        alpha[var] = 1;
        self.partial(&alpha).expect("order >= 1")
    }

    fn same_space(&self, other: &Jet) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) {
            Ok(())
        } else {
            Err(GeomError::SpaceMismatch)
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.same_space(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.same_space(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    pub fn neg(&self) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.same_space(other)?;
        let mut coeffs = vec![0.0; self.space.len()];
        for &(i, j, k) in &self.space.mul_table {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inv(&self) -> Result<Jet> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 {
            return Err(GeomError::DivisionByZero);
        }
        // 1/(c0 + u) = (1/c0) * sum_k (-u/c0)^k with u nilpotent.
        let mut derivs = Vec::with_capacity(self.space.order + 1);
        let mut v = 1.0 / c0;
        for _ in 0..=self.space.order {
            derivs.push(v);
            v = -v / c0;
        }
        self.compose_series(&derivs)
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.mul(&other.inv()?)
    }

    /// Horner evaluation of sum_k series[k] * (self - value)^k.
    ///
    /// `series[k]` must be f^(k)(value)/k! for the analytic function being
    /// composed; the nilpotent part makes the sum exact at truncation order.
    fn compose_series(&self, series: &[f64]) -> Result<Jet> {
        let mut u = self.clone();
        u.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.space, series[self.space.order]);
        for k in (0..self.space.order).rev() {
            acc = acc.mul(&u)?;
            acc.coeffs[0] += series[k];
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Result<Jet> {
        let e = self.value().exp();
        let mut series = Vec::with_capacity(self.space.order + 1);
        let mut kfact = 1.0;
        for k in 0..=self.space.order {
            if k > 0 {
                kfact *= k as f64;
            }
            series.push(e / kfact);
        }
        self.compose_series(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        let c0 = self.value();
        if c0 <= 0.0 {
            return Err(GeomError::Domain {
                func: "ln".into(),
                detail: format!("argument {c0} is not positive"),
            });
        }
        let mut series = vec![c0.ln()];
        // d^k/dx^k ln x = (-1)^(k-1) (k-1)! / x^k, divided by k!.
        let mut sign = 1.0;
        for k in 1..=self.space.order {
            series.push(sign / (k as f64 * c0.powi(k as i32)));
            sign = -sign;
        }
        self.compose_series(&series)
    }

    pub fn sin(&self) -> Result<Jet> {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let mut series = Vec::with_capacity(self.space.order + 1);
        let mut kfact = 1.0;
        for k in 0..=self.space.order {
            if k > 0 {
                kfact *= k as f64;
            }
            series.push(cycle[k % 4] / kfact);
        }
        self.compose_series(&series)
    }

    pub fn cos(&self) -> Result<Jet> {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let mut series = Vec::with_capacity(self.space.order + 1);
        let mut kfact = 1.0;
        for k in 0..=self.space.order {
            if k > 0 {
                kfact *= k as f64;
            }
            series.push(cycle[k % 4] / kfact);
        }
        self.compose_series(&series)
    }

    pub fn tan(&self) -> Result<Jet> {
        let c = self.cos()?;
        if c.value() == 0.0 {
            return Err(GeomError::Domain {
                func: "tan".into(),
                detail: "cosine vanishes at expansion point".into(),
            });
        }
        self.sin()?.div(&c)
    }

    pub fn sinh(&self) -> Result<Jet> {
        let (sh, ch) = (self.value().sinh(), self.value().cosh());
        let mut series = Vec::with_capacity(self.space.order + 1);
        let mut kfact = 1.0;
        for k in 0..=self.space.order {
            if k > 0 {
                kfact *= k as f64;
            }
            series.push(if k % 2 == 0 { sh } else { ch } / kfact);
        }
        self.compose_series(&series)
    }

    pub fn cosh(&self) -> Result<Jet> {
        let (sh, ch) = (self.value().sinh(), self.value().cosh());
        let mut series = Vec::with_capacity(self.space.order + 1);
        let mut kfact = 1.0;
        for k in 0..=self.space.order {
            if k > 0 {
                kfact *= k as f64;
            }
            series.push(if k % 2 == 0 { ch } else { sh } / kfact);
        }
        self.compose_series(&series)
    }

    pub fn tanh(&self) -> Result<Jet> {
        self.sinh()?.div(&self.cosh()?)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if self.value() <= 0.0 {
            return Err(GeomError::Domain {
                func: "sqrt".into(),
                detail: format!("argument {} is not positive", self.value()),
            });
        }
        self.pow_real(0.5)
    }

    /// Smooth branch of |x|: sign of the constant term times the jet.
    pub fn abs(&self) -> Result<Jet> {
        let c0 = self.value();
        if c0 == 0.0 {
            return Err(GeomError::Domain {
                func: "abs".into(),
                detail: "constant term is zero; smooth branch undefined".into(),
            });
        }
        Ok(if c0 < 0.0 { self.neg() } else { self.clone() })
    }

    /// Integer exponents use binary exponentiation (valid for any base);
    /// fractional exponents use the generalized binomial series and require a
    /// positive constant term.
    pub fn pow_real(&self, p: f64) -> Result<Jet> {
        if p == p.trunc() && p.abs() <= 64.0 {
            return self.pow_int(p as i64);
        }
        let c0 = self.value();
        if c0 <= 0.0 {
            return Err(GeomError::Domain {
                func: "pow".into(),
                detail: format!("base {c0} not positive for real exponent {p}"),
            });
        }
        // series[k] = C(p, k) * c0^(p-k)
        let mut series = Vec::with_capacity(self.space.order + 1);
        let mut coef = 1.0;
        for k in 0..=self.space.order {
            series.push(coef * c0.powf(p - k as f64));
            coef *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose_series(&series)
    }

    pub fn pow_int(&self, mut n: i64) -> Result<Jet> {
        let mut base = if n < 0 {
            n = -n;
            self.inv()?
        } else {
            self.clone()
        };
        let mut acc = Jet::constant(&self.space, 1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Partial-derivative jet with respect to one variable.
    ///
    /// Coefficients at the truncation degree cannot be recovered and are set
    /// to zero: the result is exact only up to `order - 1` (one less for each
    /// nested extraction).
    pub fn derivative(&self, var: usize) -> Jet {
        let shift = &self.space.shift_up[var];
        let mut coeffs = vec![0.0; self.space.len()];
        for (i, &up) in shift.iter().enumerate() {
            if up >= 0 {
                let exponent = self.space.monomials[i][var] as f64 + 1.0;
                coeffs[i] = self.coeffs[up as usize] * exponent;
            }
        }
        Jet { space: self.space.clone(), coeffs }
    }

    /// Re-expand this jet in a larger space, mapping variable `v` of the
    /// source to `var_map[v]` of the target. The target order must not be
    /// smaller.
    pub fn embed(&self, target: &Arc<JetSpace>, var_map: &[usize]) -> Jet {
        assert_eq!(var_map.len(), self.space.n_vars);
        assert!(target.order >= self.space.order);
        let mut coeffs = vec![0.0; target.len()];
        let mut alpha = vec![0u8; target.n_vars];
        for (i, m) in self.space.monomials.iter().enumerate() {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            alpha.iter_mut().for_each(|e| *e = 0);
            for (v, &e) in m.iter().enumerate() {
                alpha[var_map[v]] = e;
            }
            coeffs[target.index_of(&alpha).expect("target order suffices")] = self.coeffs[i];
        }
        Jet { space: target.clone(), coeffs }
    }
}

/// Invert a square matrix of jets by Gauss-Jordan elimination with partial
/// pivoting on the constant terms.
pub fn jet_matrix_inverse(m: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(GeomError::DimensionMismatch("jet matrix is not square".into()));
        }
    }
    let space = m[0][0].space().clone();
    let mut a: Vec<Vec<Jet>> = m.to_vec();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(&space, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[r][col].value().abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot_abs < 1e-13 {
            return Err(GeomError::SingularMatrix { pivot: pivot_abs });
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);

        let pivot_inv = a[col][col].inv()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&pivot_inv)?;
            inv[col][j] = inv[col][j].mul(&pivot_inv)?;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.coeffs.iter().all(|&c| c == 0.0) {
                continue;
            }
            for j in 0..n {
                let t = factor.mul(&a[col][j])?;
                a[r][j] = a[r][j].sub(&t)?;
                let t = factor.mul(&inv[col][j])?;
                inv[r][j] = inv[r][j].sub(&t)?;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn space2() -> Arc<JetSpace> {
        JetSpace::get(2, 4)
    }

    #[test]
    fn monomial_count_matches_binomial() {
        // binomial(n + order, order)
        assert_eq!(JetSpace::get(2, 2).len(), 6);
        assert_eq!(JetSpace::get(3, 4).len(), 35);
        assert_eq!(JetSpace::get(1, 4).len(), 5);
    }

    #[test]
    fn coordinate_jet_coefficients() {
        let s = JetSpace::get(2, 2);
        let x = Jet::variable(&s, 0, 3.0).unwrap();
        assert_eq!(x.value(), 3.0);
        assert_eq!(x.partial(&[1, 0]).unwrap(), 1.0);
        assert_eq!(x.partial(&[0, 1]).unwrap(), 0.0);
        assert_eq!(x.partial(&[2, 0]).unwrap(), 0.0);
    }

    #[test]
    fn variable_index_out_of_range() {
        let s = space2();
        assert!(Jet::variable(&s, 2, 0.0).is_err());
    }

    #[test]
    fn square_has_expected_partials() {
        let s = space2();
        let x = Jet::variable(&s, 0, 3.0).unwrap();
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.partial(&[1, 0]).unwrap(), 6.0);
        assert_eq!(sq.partial(&[2, 0]).unwrap(), 2.0);
    }

    #[test]
    fn exp_taylor_series_at_zero() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 0.0).unwrap();
        let e = x.exp().unwrap();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (k, &c) in expected.iter().enumerate() {
            assert_relative_eq!(e.coeffs()[k], c, epsilon = 1e-14);
        }
    }

    #[test]
    fn sin_third_partial_at_zero() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 0.0).unwrap();
        assert_relative_eq!(x.sin().unwrap().partial(&[3]).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn mixed_partial_of_x_y_squared() {
        let s = space2();
        let x = Jet::variable(&s, 0, 1.3).unwrap();
        let y = Jet::variable(&s, 1, -0.4).unwrap();
        let f = x.mul(&y.mul(&y).unwrap()).unwrap();
        assert_relative_eq!(f.partial(&[1, 2]).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn mixed_partial_x2y_at_one_one() {
        let s = space2();
        let x = Jet::variable(&s, 0, 1.0).unwrap();
        let y = Jet::variable(&s, 1, 1.0).unwrap();
        let f = x.mul(&x).unwrap().mul(&y).unwrap();
        // d^3/(dx^2 dy) of x^2 y = 2
        assert_relative_eq!(f.partial(&[2, 1]).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn division_and_inverse() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 2.0).unwrap();
        let inv = x.inv().unwrap();
        assert_relative_eq!(inv.value(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(inv.d(0), -0.25, epsilon = 1e-15);
        let one = x.div(&x).unwrap();
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-15);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn division_by_zero_constant_rejected() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 0.0).unwrap();
        assert!(matches!(x.inv(), Err(GeomError::DivisionByZero)));
    }

    #[test]
    fn ln_domain_error_at_boundary() {
        let s = JetSpace::get(1, 2);
        let x = Jet::variable(&s, 0, 0.0).unwrap();
        assert!(matches!(x.ln(), Err(GeomError::Domain { .. })));
    }

    #[test]
    fn abs_smooth_branch() {
        let s = JetSpace::get(1, 3);
        let x = Jet::variable(&s, 0, -2.0).unwrap();
        let a = x.abs().unwrap();
        assert_relative_eq!(a.value(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(a.d(0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn integer_pow_on_negative_base() {
        let s = JetSpace::get(1, 3);
        let x = Jet::variable(&s, 0, -1.5).unwrap();
        let p = x.pow_real(3.0).unwrap();
        assert_relative_eq!(p.value(), -3.375, epsilon = 1e-12);
        assert_relative_eq!(p.d(0), 3.0 * 2.25, epsilon = 1e-12);
    }

    #[test]
    fn fractional_pow_matches_sqrt() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 4.0).unwrap();
        let r = x.sqrt().unwrap();
        assert_relative_eq!(r.value(), 2.0, epsilon = 1e-13);
        assert_relative_eq!(r.d(0), 0.25, epsilon = 1e-13);
    }

    #[test]
    fn derivative_extraction_shifts_down() {
        let s = space2();
        let x = Jet::variable(&s, 0, 1.7).unwrap();
        let y = Jet::variable(&s, 1, 0.3).unwrap();
        // f = x^2 y, df/dx = 2xy
        let f = x.mul(&x).unwrap().mul(&y).unwrap();
        let fx = f.derivative(0);
        assert_relative_eq!(fx.value(), 2.0 * 1.7 * 0.3, epsilon = 1e-13);
        assert_relative_eq!(fx.partial(&[1, 0]).unwrap(), 2.0 * 0.3, epsilon = 1e-13);
        assert_relative_eq!(fx.partial(&[0, 1]).unwrap(), 2.0 * 1.7, epsilon = 1e-13);
    }

    #[test]
    fn identity_matrix_inverts_to_identity() {
        let s = space2();
        let m: Vec<Vec<Jet>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| Jet::constant(&s, if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        let inv = jet_matrix_inverse(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(inv[i][j].value(), expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn diagonal_jet_inverse_is_scalar_series() {
        let s = JetSpace::get(1, 4);
        let x = Jet::variable(&s, 0, 2.0).unwrap();
        let m = vec![vec![x]];
        let inv = jet_matrix_inverse(&m).unwrap();
        assert_relative_eq!(inv[0][0].value(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(inv[0][0].d(0), -0.25, epsilon = 1e-14);
    }

    #[test]
    fn singular_matrix_reports_error() {
        let s = space2();
        let z = Jet::constant(&s, 0.0);
        let m = vec![vec![z.clone(), z.clone()], vec![z.clone(), z]];
        assert!(matches!(
            jet_matrix_inverse(&m),
            Err(GeomError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn random_matrix_inverse_multiplies_to_identity() {
        let s = JetSpace::get(2, 3);
        let mut rng = crate::rng::SplitMix64::new(42);
        let n = 4;
        let m: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut coeffs = vec![0.0; s.len()];
                        for c in coeffs.iter_mut() {
                            *c = rng.uniform(-0.4, 0.4);
                        }
                        // Diagonally dominant constant part keeps it well conditioned.
                        coeffs[0] += if i == j { 2.0 } else { 0.0 };
                        Jet { space: s.clone(), coeffs }
                    })
                    .collect()
            })
            .collect();
        let inv = jet_matrix_inverse(&m).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Jet::constant(&s, 0.0);
                for k in 0..n {
                    acc = acc.add(&m[i][k].mul(&inv[k][j]).unwrap()).unwrap();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                for (idx, c) in acc.coeffs().iter().enumerate() {
                    let target = if idx == 0 { expect } else { 0.0 };
                    assert!(
                        (c - target).abs() < 1e-10,
                        "entry ({i},{j}) coeff {idx} = {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn embed_preserves_partials() {
        let small = JetSpace::get(2, 3);
        let big = JetSpace::get(4, 3);
        let x = Jet::variable(&small, 0, 1.2).unwrap();
        let y = Jet::variable(&small, 1, -0.7).unwrap();
        let f = x.mul(&y).unwrap().add(&x).unwrap();
        let g = f.embed(&big, &[1, 3]);
        assert_relative_eq!(g.value(), f.value(), epsilon = 1e-15);
        assert_relative_eq!(g.partial(&[0, 1, 0, 1]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.partial(&[0, 1, 0, 0]).unwrap(), -0.7 + 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.partial(&[0, 0, 0, 1]).unwrap(), 1.2, epsilon = 1e-15);
        assert_eq!(g.partial(&[1, 0, 0, 0]).unwrap(), 0.0);
    }
}
