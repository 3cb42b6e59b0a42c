//! Vector fields with exact rational-trig coefficients: Lie brackets, linear
//! relations over constants, generic rank, pushforward along coordinate
//! changes, and a fixed-step numeric flow.

use crate::linalg::{f64_rank, RatMatrix};
use crate::numexpr::NumExpr;
use crate::symexpr::{subst_vars, EvalError, Expr, Rat, Ratio, RatioError};
use num::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),
    #[error("coefficient error: {0}")]
    Ratio(#[from] RatioError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("map is not invertible: {0}")]
    NotInvertible(String),
    #[error("could not sample a nonsingular point after {0} attempts")]
    SamplingExhausted(usize),
}

/// First-order differential operator `sum_a xi^a(x) d_a` on `n` coordinates.
#[derive(Debug, Clone)]
pub struct VectorField {
    n: u32,
    coeffs: Vec<Ratio>,
}

impl VectorField {
    pub fn new(n: u32, coeffs: Vec<Ratio>) -> Result<Self, FieldError> {
        if coeffs.len() != n as usize {
            return Err(FieldError::DimensionMismatch(n, coeffs.len() as u32));
        }
        for c in &coeffs {
            if c.max_var() > n {
                return Err(FieldError::DimensionMismatch(n, c.max_var()));
            }
        }
        Ok(VectorField { n, coeffs })
    }

    pub fn zero(n: u32) -> Self {
        VectorField {
            n,
            coeffs: vec![Ratio::zero(); n as usize],
        }
    }

    pub fn from_exprs(n: u32, exprs: Vec<Expr>) -> Result<Self, FieldError> {
        VectorField::new(n, exprs.into_iter().map(Ratio::from_expr).collect())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coeff(&self, a: u32) -> &Ratio {
        &self.coeffs[a as usize - 1]
    }

    pub fn coeffs(&self) -> &[Ratio] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Pad with inert coordinates up to `n >= self.n`.
    pub fn extend_to(&self, n: u32) -> VectorField {
        assert!(n >= self.n);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n as usize, Ratio::zero());
        VectorField { n, coeffs }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        if self.n != other.n {
            return Err(FieldError::DimensionMismatch(self.n, other.n));
        }
        Ok(VectorField {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> VectorField {
        VectorField {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> VectorField {
        VectorField {
            n: self.n,
            coeffs: self.coeffs.iter().map(|r| r.scale(c)).collect(),
        }
    }

    pub fn subst_param(&self, name: &str, value: &Rat) -> Result<VectorField, FieldError> {
        let coeffs: Result<Vec<_>, _> = self
            .coeffs
            .iter()
            .map(|c| c.subst_param(name, value))
            .collect();
        Ok(VectorField {
            n: self.n,
            coeffs: coeffs?,
        })
    }

    /// Transpose coordinates through a 1-based permutation table: both the
    /// variables inside coefficients and the component slots move.
    pub fn rename_vars(&self, perm: &[u32]) -> VectorField {
        let mut coeffs = vec![Ratio::zero(); self.n as usize];
        for a in 1..=self.n {
            let target = perm.get(a as usize).copied().unwrap_or(a);
            coeffs[target as usize - 1] = self.coeffs[a as usize - 1].rename_vars(perm);
        }
        VectorField { n: self.n, coeffs }
    }

    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Vec<f64>, EvalError> {
        self.coeffs.iter().map(|c| c.eval(point, params)).collect()
    }
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| a.ratio_equal(b))
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({})*d{}", c, i + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0*d1")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// JSON wire format: `{"n": int, "coeffs": [{"num": str, "den": str}, ...]}`.
#[derive(Serialize, Deserialize)]
struct FieldJson {
    n: u32,
    coeffs: Vec<CoeffJson>,
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    num: String,
    den: String,
}

impl VectorField {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FieldJson {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| CoeffJson {
                    num: c.num().to_string(),
                    den: c.den().to_string(),
                })
                .collect(),
        })
        .expect("serialization is infallible")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let fj: FieldJson = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        let coeffs: Result<Vec<Ratio>, String> = fj
            .coeffs
            .iter()
            .map(|c| {
                let num = crate::parser::parse_expr(&c.num, 0).map_err(|e| e.to_string())?;
                let den = crate::parser::parse_expr(&c.den, 0).map_err(|e| e.to_string())?;
                Ratio::new(num, den).map_err(|e| e.to_string())
            })
            .collect();
        VectorField::new(fj.n, coeffs?).map_err(|e| e.to_string())
    }
}

/// `[X, Y]_a = sum_b (X_b d_b Y_a - Y_b d_b X_a)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, FieldError> {
    if x.n != y.n {
        return Err(FieldError::DimensionMismatch(x.n, y.n));
    }
    let mut coeffs = Vec::with_capacity(x.n as usize);
    for a in 1..=x.n {
        let mut acc = Ratio::zero();
        for b in 1..=x.n {
            if !x.coeff(b).is_zero() {
                acc = acc.add(&x.coeff(b).mul(&y.coeff(a).partial(b)));
            }
            if !y.coeff(b).is_zero() {
                acc = acc.sub(&y.coeff(b).mul(&x.coeff(a).partial(b)));
            }
        }
        coeffs.push(acc);
    }
    Ok(VectorField { n: x.n, coeffs })
}

/// Basis of constant vectors `lambda` with `sum_s lambda_s e_s = 0`.
///
/// Canonical monomials are linearly independent functions, so a constant
/// relation holds iff it holds coefficient-by-coefficient on canonical
/// signatures. Each coordinate contributes one exact linear block (after
/// clearing denominators); the rational nullspace of the stack is the answer.
/// Every basis vector is re-confirmed symbolically before being returned.
pub fn constant_relations(fields: &[VectorField]) -> Result<Vec<Vec<Rat>>, FieldError> {
    let m = fields.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let n = fields[0].n;
    for f in fields {
        if f.n != n {
            return Err(FieldError::DimensionMismatch(n, f.n));
        }
    }
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for a in 1..=n {
        // clear denominators: N_s = num_s * prod_{t != s} den_t
        let nums: Vec<Expr> = (0..m)
            .map(|s| {
                let mut e = fields[s].coeff(a).num().clone();
                for (t, f) in fields.iter().enumerate() {
                    if t != s {
                        e = e.mul(f.coeff(a).den());
                    }
                }
                e
            })
            .collect();
        let mut sigs = std::collections::BTreeSet::new();
        for e in &nums {
            for mono in e.terms() {
                sigs.insert(mono.sig);
            }
        }
        for sig in sigs {
            let row: Vec<Rat> = nums
                .iter()
                .map(|e| {
                    e.terms()
                        .find(|mo| mo.sig == sig)
                        .map(|mo| mo.coeff)
                        .unwrap_or_else(Rat::zero)
                })
                .collect();
            rows.push(row);
        }
    }
    if rows.is_empty() {
        // all coefficients vanish identically: every lambda is a relation
        let id = RatMatrix::identity(m);
        return Ok((0..m)
            .map(|i| (0..m).map(|j| id[(i, j)].clone()).collect())
            .collect());
    }
    let basis = RatMatrix::from_rows(rows).nullspace();
    // symbolic confirmation of each candidate relation
    for lambda in &basis {
        let mut acc = VectorField::zero(n);
        for (s, l) in lambda.iter().enumerate() {
            acc = acc.add(&fields[s].scale(l))?;
        }
        debug_assert!(acc.is_zero(), "nullspace vector failed symbolic confirmation");
        if !acc.is_zero() {
            return Err(FieldError::NotInvertible(
                "internal: relation candidate is not a relation".into(),
            ));
        }
    }
    Ok(basis)
}

/// Draw a random rational with numerator and denominator bounded by 97.
pub fn random_rational(rng: &mut impl Rng) -> Rat {
    let p: i64 = rng.gen_range(-97..=97);
    let q: i64 = rng.gen_range(1..=97);
    Rat::new(p.into(), q.into())
}

/// Sample a point where every coefficient of every field evaluates; rejects
/// singular draws and retries.
pub fn sample_nonsingular_point(
    fields: &[VectorField],
    n: u32,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, FieldError> {
    let params = BTreeMap::new();
    const MAX_ATTEMPTS: usize = 1000;
    for _ in 0..MAX_ATTEMPTS {
        let point: Vec<f64> = (0..n)
            .map(|_| crate::symexpr::to_f64(&random_rational(rng)))
            .collect();
        let ok = fields
            .iter()
            .all(|f| f.coeffs.iter().all(|c| c.eval(&point, &params).is_ok()));
        if ok {
            return Ok(point);
        }
    }
    Err(FieldError::SamplingExhausted(MAX_ATTEMPTS))
}

/// Rank of the coefficient matrix at points in general position.
///
/// Numeric estimate: maximum f64 rank over 20 random nonsingular sample
/// points. Exact certificate: the largest size of a symbolically nonzero
/// minor. The certificate is authoritative; the numeric estimate guards it
/// from the other side (a disagreement would indicate a kernel bug).
pub fn generic_rank(fields: &[VectorField], rng: &mut impl Rng) -> Result<usize, FieldError> {
    if fields.is_empty() {
        return Ok(0);
    }
    let n = fields[0].n;
    let params = BTreeMap::new();
    let mut numeric = 0;
    for _ in 0..20 {
        let point = sample_nonsingular_point(fields, n, rng)?;
        let matrix: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| {
                f.coeffs
                    .iter()
                    .map(|c| c.eval(&point, &params))
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<_, _>>()?;
        numeric = numeric.max(f64_rank(matrix, 1e-9));
    }
    let symbolic = symbolic_rank(fields);
    debug_assert_eq!(numeric, symbolic, "numeric and symbolic rank disagree");
    Ok(symbolic)
}

/// Largest `r` such that some `r x r` minor of the coefficient matrix is a
/// nonzero ratio.
pub fn symbolic_rank(fields: &[VectorField]) -> usize {
    let m = fields.len();
    let n = fields.first().map_or(0, |f| f.n as usize);
    for r in (1..=m.min(n)).rev() {
        for rows in combinations(m, r) {
            for cols in combinations(n, r) {
                let minor = ratio_det(&rows, &cols, fields);
                if !minor.is_zero() {
                    return r;
                }
            }
        }
    }
    0
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n || k == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(j) = (0..k).rev().find(|&j| idx[j] < j + n - k) else {
            return out;
        };
        idx[j] += 1;
        for l in j + 1..k {
            idx[l] = idx[l - 1] + 1;
        }
    }
}

fn ratio_det(rows: &[usize], cols: &[usize], fields: &[VectorField]) -> Ratio {
    // Laplace expansion along the first row; sizes are at most 4
    if rows.len() == 1 {
        return fields[rows[0]].coeffs[cols[0]].clone();
    }
    let mut det = Ratio::zero();
    let sub_rows = &rows[1..];
    for (j, &c) in cols.iter().enumerate() {
        let entry = &fields[rows[0]].coeffs[c];
        if entry.is_zero() {
            continue;
        }
        let sub_cols: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &v)| v)
            .collect();
        let minor = ratio_det(sub_rows, &sub_cols, fields);
        let term = entry.mul(&minor);
        det = if j % 2 == 0 {
            det.add(&term)
        } else {
            det.sub(&term)
        };
    }
    det
}

/// Invertible coordinate change with exact rational components.
#[derive(Debug, Clone)]
pub struct SymbolicMap {
    pub n: u32,
    pub forward: Vec<Ratio>,
    pub inverse: Vec<Ratio>,
}

impl SymbolicMap {
    pub fn identity(n: u32) -> Self {
        let id: Vec<Ratio> = (1..=n).map(|v| Ratio::from_expr(Expr::var(v))).collect();
        SymbolicMap {
            n,
            forward: id.clone(),
            inverse: id,
        }
    }

    /// Pad with inert identity components up to `n >= self.n`.
    pub fn extend_to(&self, n: u32) -> SymbolicMap {
        assert!(n >= self.n);
        let mut forward = self.forward.clone();
        let mut inverse = self.inverse.clone();
        for v in self.n + 1..=n {
            forward.push(Ratio::from_expr(Expr::var(v)));
            inverse.push(Ratio::from_expr(Expr::var(v)));
        }
        SymbolicMap { n, forward, inverse }
    }

    /// The map `p -> then(self(p))`.
    pub fn compose(&self, then: &SymbolicMap) -> Result<SymbolicMap, FieldError> {
        assert_eq!(self.n, then.n);
        let subst_ratio = |r: &Ratio, subs: &[Ratio]| -> Result<Ratio, FieldError> {
            let num = subst_vars(r.num(), subs)?;
            let den = subst_vars(r.den(), subs)?;
            num.div(&den).map_err(FieldError::Ratio)
        };
        let forward: Result<Vec<Ratio>, FieldError> = then
            .forward
            .iter()
            .map(|r| subst_ratio(r, &self.forward))
            .collect();
        let inverse: Result<Vec<Ratio>, FieldError> = self
            .inverse
            .iter()
            .map(|r| subst_ratio(r, &then.inverse))
            .collect();
        Ok(SymbolicMap {
            n: self.n,
            forward: forward?,
            inverse: inverse?,
        })
    }

    /// Check `forward(inverse(y)) = y` componentwise by cross-multiplication.
    pub fn verify_inverse(&self) -> Result<(), FieldError> {
        for (a, fwd) in self.forward.iter().enumerate() {
            let num = subst_vars(fwd.num(), &self.inverse)?;
            let den = subst_vars(fwd.den(), &self.inverse)?;
            let composed = num.div(&den).map_err(FieldError::Ratio)?;
            let expected = Ratio::from_expr(Expr::var(a as u32 + 1));
            if !composed.ratio_equal(&expected) {
                return Err(FieldError::NotInvertible(format!(
                    "component {} of forward(inverse) is not the identity",
                    a + 1
                )));
            }
        }
        Ok(())
    }
}

/// Numeric-only coordinate change (square roots, inverse trig allowed).
#[derive(Debug, Clone)]
pub struct NumericMap {
    pub n_in: u32,
    pub n_out: u32,
    pub forward: Vec<NumExpr>,
    pub inverse: Vec<NumExpr>,
}

impl NumericMap {
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>, EvalError> {
        let params = BTreeMap::new();
        self.forward.iter().map(|e| e.eval(p, &params)).collect()
    }

    pub fn apply_inverse(&self, q: &[f64]) -> Result<Vec<f64>, EvalError> {
        let params = BTreeMap::new();
        self.inverse.iter().map(|e| e.eval(q, &params)).collect()
    }

    /// Check `inverse(forward(p)) = p` at a sampled point to 1e-9.
    pub fn verify_inverse_at(&self, p: &[f64]) -> Result<bool, EvalError> {
        let q = self.apply(p)?;
        let back = self.apply_inverse(&q)?;
        Ok(p.iter()
            .zip(&back)
            .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs())))
    }

    /// Jacobian of the forward map by a 5-point central stencil. At h = 1e-4
    /// the O(h^4) truncation stays near 1e-11 even close to the trig poles of
    /// the stereographic map, well inside the 1e-9 residual budget.
    pub fn jacobian(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        let params = BTreeMap::new();
        let mut jac = vec![vec![0.0; p.len()]; self.forward.len()];
        for (a, comp) in self.forward.iter().enumerate() {
            for b in 0..p.len() {
                let h = 1e-4 * (1.0 + p[b].abs());
                let shifted = |delta: f64| -> Result<f64, EvalError> {
                    let mut q = p.to_vec();
                    q[b] += delta;
                    comp.eval(&q, &params)
                };
                let d = (-shifted(2.0 * h)? + 8.0 * shifted(h)? - 8.0 * shifted(-h)?
                    + shifted(-2.0 * h)?)
                    / (12.0 * h);
                jac[a][b] = d;
            }
        }
        Ok(jac)
    }
}

/// Pushforward of `X` along a symbolic map: `Y_a = (sum_b X_b d_b F_a)` with
/// the inverse substituted, expressed in the new coordinates.
pub fn pushforward(x: &VectorField, map: &SymbolicMap) -> Result<VectorField, FieldError> {
    if x.n != map.n {
        return Err(FieldError::DimensionMismatch(x.n, map.n));
    }
    let mut coeffs = Vec::with_capacity(map.n as usize);
    for fwd in &map.forward {
        let mut acc = Ratio::zero();
        for b in 1..=x.n {
            if x.coeff(b).is_zero() {
                continue;
            }
            acc = acc.add(&x.coeff(b).mul(&fwd.partial(b)));
        }
        // express in new coordinates
        let num = subst_vars(acc.num(), &map.inverse)?;
        let den = subst_vars(acc.den(), &map.inverse)?;
        coeffs.push(num.div(&den).map_err(FieldError::Ratio)?);
    }
    VectorField::new(map.n, coeffs)
}

/// Residual report from a numeric pushforward check.
#[derive(Debug, Clone, Serialize)]
pub struct PushforwardReport {
    pub samples: usize,
    pub max_residual: f64,
}

/// Check `J_map(p) * X(p) = Y(map(p))` at the given sample points.
pub fn pushforward_check(
    x: &VectorField,
    y: &VectorField,
    map: &NumericMap,
    points: &[Vec<f64>],
) -> Result<PushforwardReport, FieldError> {
    let params = BTreeMap::new();
    let mut max_residual: f64 = 0.0;
    for p in points {
        let jac = map.jacobian(p)?;
        let xv = x.eval(p, &params)?;
        let q = map.apply(p)?;
        let yv = y.eval(&q, &params)?;
        for (a, row) in jac.iter().enumerate() {
            let pushed: f64 = row.iter().zip(&xv).map(|(j, v)| j * v).sum();
            max_residual = max_residual.max((pushed - yv[a]).abs());
        }
    }
    Ok(PushforwardReport {
        samples: points.len(),
        max_residual,
    })
}

/// Classical fixed-step RK4 for `dx/dt = X(x)` from `p` over `[0, eps]`.
///
/// Steps: `max(100, ceil(1000 * |eps|))`.
pub fn flow_rk4(
    x: &VectorField,
    p: &[f64],
    eps: f64,
    steps: Option<usize>,
) -> Result<Vec<f64>, FieldError> {
    let params = BTreeMap::new();
    let steps = steps.unwrap_or_else(|| 100usize.max((1000.0 * eps.abs()).ceil() as usize));
    let h = eps / steps as f64;
    let mut state = p.to_vec();
    let deriv = |s: &[f64]| -> Result<Vec<f64>, EvalError> { x.eval(s, &params) };
    for _ in 0..steps {
        let k1 = deriv(&state)?;
        let k2 = deriv(&axpy(&state, &k1, h / 2.0))?;
        let k3 = deriv(&axpy(&state, &k2, h / 2.0))?;
        let k4 = deriv(&axpy(&state, &k3, h))?;
        for i in 0..state.len() {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(state)
}

fn axpy(base: &[f64], dir: &[f64], h: f64) -> Vec<f64> {
    base.iter().zip(dir).map(|(b, d)| b + h * d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_field_list;
    use crate::symexpr::rat_int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fields(text: &str, n: u32) -> Vec<VectorField> {
        parse_field_list(text, n).unwrap()
    }

    #[test]
    fn bracket_sl2_generators() {
        // [d1, x1 d1 + x2 d2] = d1
        let fs = fields("d1\nx1*d1 + x2*d2", 2);
        let br = lie_bracket(&fs[0], &fs[1]).unwrap();
        assert_eq!(br, fs[0]);
    }

    #[test]
    fn bracket_theorem1_form1() {
        // [e2, e3] = e3 for R(sl2,1)
        let fs = fields("x1*d1 + x2*d2\nx1^2*d1 + 2*x1*x2*d2 + x2*d3", 3);
        let br = lie_bracket(&fs[0], &fs[1]).unwrap();
        assert_eq!(br, fs[1]);
    }

    #[test]
    fn bracket_antisymmetry() {
        let fs = fields("x1^2*d1 + 2*x1*x2*d2 + x2*d3", 3);
        let br = lie_bracket(&fs[0], &fs[0]).unwrap();
        assert!(br.is_zero());
    }

    #[test]
    fn constant_relations_faithful_and_dependent() {
        let faithful = fields("d1\nx1*d1\nx1^2*d1", 1);
        assert!(constant_relations(&faithful).unwrap().is_empty());

        let dup = fields("d1\nd1", 1);
        let rel = constant_relations(&dup).unwrap();
        assert_eq!(rel.len(), 1);
        // basis vector proportional to (1, -1)
        assert_eq!(rel[0][0], -rel[0][1].clone());

        let dep = fields("d1\nx1*d1\n(x1+1)*d1", 1);
        let rel = constant_relations(&dep).unwrap();
        assert_eq!(rel.len(), 1);
        let l = &rel[0];
        // lambda must satisfy l0 = -l2, l1 = -l2 (i.e. (1,1,-1) direction)
        assert_eq!(l[0], l[1]);
        assert_eq!(l[0], -l[2].clone());
    }

    #[test]
    fn generic_rank_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let single = fields("d1\nx1*d1\nx1^2*d1", 1);
        assert_eq!(generic_rank(&single, &mut rng).unwrap(), 1);

        let r1 = fields("d1\nx1*d1 + x2*d2\nx1^2*d1 + 2*x1*x2*d2 + x2*d3", 3);
        assert_eq!(generic_rank(&r1, &mut rng).unwrap(), 3);

        let so31 = fields(
            "-sin(x1)*tan(x2)*d1 - cos(x1)*d2\n-cos(x1)*tan(x2)*d1 + sin(x1)*d2\nd1",
            2,
        );
        assert_eq!(generic_rank(&so31, &mut rng).unwrap(), 2);
    }

    #[test]
    fn pushforward_translation_and_scaling() {
        // translation x~1 = x1 + 1
        let map = SymbolicMap {
            n: 1,
            forward: vec![Ratio::from_expr(Expr::var(1).add(&Expr::one()))],
            inverse: vec![Ratio::from_expr(Expr::var(1).sub(&Expr::one()))],
        };
        map.verify_inverse().unwrap();
        let x = fields("d1", 1).remove(0);
        assert_eq!(pushforward(&x, &map).unwrap(), x);

        // scaling x~1 = 2 x1 fixes the Euler field x1 d1
        let map = SymbolicMap {
            n: 1,
            forward: vec![Ratio::from_expr(Expr::var(1).scale(&rat_int(2)))],
            inverse: vec![Ratio::new(Expr::var(1), Expr::int(2)).unwrap()],
        };
        map.verify_inverse().unwrap();
        let euler = fields("x1*d1", 1).remove(0);
        assert_eq!(pushforward(&euler, &map).unwrap(), euler);
    }

    #[test]
    fn flow_rk4_examples() {
        // constant field
        let x = fields("d1", 2).remove(0);
        let out = flow_rk4(&x, &[0.0, 0.0], 1.0, None).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12 && out[1].abs() < 1e-12);

        // rotation field x1 d2 - x2 d1 over a quarter turn
        let rot = fields("x1*d2 - x2*d1", 2).remove(0);
        let out = flow_rk4(&rot, &[1.0, 0.0], std::f64::consts::FRAC_PI_2, None).unwrap();
        assert!((out[0]).abs() < 1e-8 && (out[1] - 1.0).abs() < 1e-8);

        // exponential flow of the Euler field
        let euler = fields("x1*d1", 1).remove(0);
        let out = flow_rk4(&euler, &[1.0], 1.0, None).unwrap();
        assert!((out[0] - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn json_round_trip() {
        let f = fields("x1^2*d1 + 2*x1*x2*d2 + x2*d3", 3).remove(0);
        let j = f.to_json();
        let back = VectorField::from_json(&j).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(2, 3).len(), 0);
    }
}
