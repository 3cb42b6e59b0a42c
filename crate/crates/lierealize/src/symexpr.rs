//! Exact arithmetic for trig-Laurent polynomials over the rationals.
//!
//! Every coefficient appearing in the realization catalog lives in the ring
//! generated by rational constants, coordinate powers `x_v^k`, trig atoms
//! `sin x_v`, `cos x_v^c` (with `c` possibly negative, encoding `tan` and
//! `sec`), and formal parameter symbols. The canonical form keeps the
//! sin-exponent of each variable in {0, 1} by rewriting
//! `sin^2 x = 1 - cos^2 x`, which makes the zero test a structural check:
//! an expression is identically zero iff it has no terms.

use num::{BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p.into(), q.into())
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(p.into())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("singular point: cos(x{var}) vanishes under a negative exponent")]
    SingularCos { var: u32 },
    #[error("singular point: {context} vanishes in a denominator")]
    DivisionByZero { context: String },
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("point has dimension {got}, need at least {need}")]
    PointDim { got: usize, need: usize },
    #[error("square root of negative value {0}")]
    NegativeSqrt(f64),
}

/// Exponent signature of a monomial: everything except the rational coefficient.
///
/// `trig` maps a variable to `(s, c)` meaning `sin^s(x_v) * cos^c(x_v)` with
/// `s` in {0, 1} and `c` any integer; `(0, 0)` is never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Signature {
    pub poly: BTreeMap<u32, u32>,
    pub trig: BTreeMap<u32, (u8, i64)>,
    pub params: BTreeMap<String, u32>,
}

impl Signature {
    pub fn is_empty(&self) -> bool {
        self.poly.is_empty() && self.trig.is_empty() && self.params.is_empty()
    }

    /// Highest coordinate index mentioned (poly or trig), 0 if none.
    pub fn max_var(&self) -> u32 {
        let p = self.poly.keys().max().copied().unwrap_or(0);
        let t = self.trig.keys().max().copied().unwrap_or(0);
        p.max(t)
    }
}

/// A monomial: rational coefficient times an exponent signature.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: Rat,
    pub sig: Signature,
}

/// Canonical sum of monomials with pairwise distinct signatures.
///
/// The empty term map is the zero expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Expr {
    terms: BTreeMap<Signature, Rat>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut e = Expr::default();
        if !c.is_zero() {
            e.terms.insert(Signature::default(), c);
        }
        e
    }

    pub fn int(k: i64) -> Self {
        Expr::constant(rat_int(k))
    }

    pub fn var(v: u32) -> Self {
        assert!(v >= 1, "variables are 1-based");
        let mut sig = Signature::default();
        sig.poly.insert(v, 1);
        Expr::monomial(Rat::one(), sig)
    }

    pub fn param(name: &str) -> Self {
        let mut sig = Signature::default();
        sig.params.insert(name.to_string(), 1);
        Expr::monomial(Rat::one(), sig)
    }

    pub fn sin(v: u32) -> Self {
        let mut sig = Signature::default();
        sig.trig.insert(v, (1, 0));
        Expr::monomial(Rat::one(), sig)
    }

    pub fn cos(v: u32) -> Self {
        Expr::cos_pow(v, 1)
    }

    /// `cos^c(x_v)` for any integer `c` (negative encodes `sec`).
    pub fn cos_pow(v: u32, c: i64) -> Self {
        if c == 0 {
            return Expr::one();
        }
        let mut sig = Signature::default();
        sig.trig.insert(v, (0, c));
        Expr::monomial(Rat::one(), sig)
    }

    /// `tan x_v = sin x_v * cos^{-1} x_v`.
    pub fn tan(v: u32) -> Self {
        let mut sig = Signature::default();
        sig.trig.insert(v, (1, -1));
        Expr::monomial(Rat::one(), sig)
    }

    /// `sec x_v = cos^{-1} x_v`.
    pub fn sec(v: u32) -> Self {
        Expr::cos_pow(v, -1)
    }

    pub fn monomial(coeff: Rat, sig: Signature) -> Self {
        let mut e = Expr::default();
        e.add_term(sig, coeff);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Signature::default())
                .is_some_and(|c| c.is_one())
    }

    /// The constant value, if the expression is a rational constant.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Signature::default()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.iter().map(|(sig, coeff)| Monomial {
            coeff: coeff.clone(),
            sig: sig.clone(),
        })
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn max_var(&self) -> u32 {
        self.terms.keys().map(|s| s.max_var()).max().unwrap_or(0)
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.terms
            .keys()
            .flat_map(|s| s.params.keys().map(|k| k.as_str()))
    }

    fn add_term(&mut self, sig: Signature, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(sig) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut out = self.clone();
        for (sig, c) in &other.terms {
            out.add_term(sig.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(s, c)| (s.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(s, k)| (s.clone(), k * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                for (sig, c) in mul_signatures(sa, sb) {
                    out.add_term(sig, ca * cb * c);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Expr {
        let mut out = Expr::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to coordinate `v`.
    ///
    /// Parameter symbols are constants: their derivative is zero.
    pub fn partial(&self, v: u32) -> Expr {
        let mut out = Expr::zero();
        for (sig, coeff) in &self.terms {
            // polynomial factor
            if let Some(&k) = sig.poly.get(&v) {
                let mut s = sig.clone();
                if k == 1 {
                    s.poly.remove(&v);
                } else {
                    s.poly.insert(v, k - 1);
                }
                out.add_term(s, coeff * rat_int(k as i64));
            }
            // trig factor: d/dx sin^s cos^c with s in {0,1}
            if let Some(&(s, c)) = sig.trig.get(&v) {
                if s == 1 {
                    // (1+c) cos^{c+1} - c cos^{c-1}
                    let mut s1 = sig.clone();
                    set_trig(&mut s1, v, 0, c + 1);
                    out.add_term(s1, coeff * rat_int(1 + c));
                    if c != 0 {
                        let mut s2 = sig.clone();
                        set_trig(&mut s2, v, 0, c - 1);
                        out.add_term(s2, coeff * rat_int(-c));
                    }
                } else {
                    // -c sin cos^{c-1}
                    let mut s1 = sig.clone();
                    set_trig(&mut s1, v, 1, c - 1);
                    out.add_term(s1, coeff * rat_int(-c));
                }
            }
        }
        out
    }

    /// Substitute a rational value for a parameter symbol.
    pub fn subst_param(&self, name: &str, value: &Rat) -> Expr {
        let mut out = Expr::zero();
        for (sig, coeff) in &self.terms {
            if let Some(&e) = sig.params.get(name) {
                let mut s = sig.clone();
                s.params.remove(name);
                let mut c = coeff.clone();
                for _ in 0..e {
                    c *= value;
                }
                out.add_term(s, c);
            } else {
                out.add_term(sig.clone(), coeff.clone());
            }
        }
        out
    }

    /// Rename coordinate variables through `perm` (1-based on both sides).
    ///
    /// `perm[v]` is the new index of old variable `v`; `perm[0]` is unused.
    pub fn rename_vars(&self, perm: &[u32]) -> Expr {
        let map = |v: u32| -> u32 {
            perm.get(v as usize).copied().unwrap_or(v)
        };
        let mut out = Expr::zero();
        for (sig, coeff) in &self.terms {
            let mut s = Signature {
                params: sig.params.clone(),
                ..Default::default()
            };
            for (&v, &k) in &sig.poly {
                s.poly.insert(map(v), k);
            }
            for (&v, &t) in &sig.trig {
                s.trig.insert(map(v), t);
            }
            out.add_term(s, coeff.clone());
        }
        out
    }

    /// True when no trig atom mentions any coordinate (pure polynomial in x,
    /// possibly with parameters).
    pub fn is_trig_free(&self) -> bool {
        self.terms.keys().all(|s| s.trig.is_empty())
    }

    /// Numeric evaluation at a point (1-based variable `v` reads `point[v-1]`).
    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for (sig, coeff) in &self.terms {
            total += eval_monomial(sig, coeff, point, params)?;
        }
        Ok(total)
    }
}

fn set_trig(sig: &mut Signature, v: u32, s: u8, c: i64) {
    if s == 0 && c == 0 {
        sig.trig.remove(&v);
    } else {
        sig.trig.insert(v, (s, c));
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // BigRational to f64 via string is robust for the magnitudes we use
    let n: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    n / d
}

/// Convert an exact rational to f64.
pub fn to_f64(r: &Rat) -> f64 {
    rat_to_f64(r)
}

const SINGULAR_EPS: f64 = 1e-12;

fn eval_monomial(
    sig: &Signature,
    coeff: &Rat,
    point: &[f64],
    params: &BTreeMap<String, f64>,
) -> Result<f64, EvalError> {
    let mut val = rat_to_f64(coeff);
    for (&v, &k) in &sig.poly {
        let x = *point
            .get(v as usize - 1)
            .ok_or(EvalError::PointDim { got: point.len(), need: v as usize })?;
        val *= x.powi(k as i32);
    }
    for (&v, &(s, c)) in &sig.trig {
        let x = *point
            .get(v as usize - 1)
            .ok_or(EvalError::PointDim { got: point.len(), need: v as usize })?;
        if s == 1 {
            val *= x.sin();
        }
        if c != 0 {
            let cx = x.cos();
            if c < 0 && cx.abs() < SINGULAR_EPS {
                return Err(EvalError::SingularCos { var: v });
            }
            val *= cx.powi(c as i32);
        }
    }
    for (name, &e) in &sig.params {
        let p = *params
            .get(name)
            .ok_or_else(|| EvalError::UnboundParam(name.clone()))?;
        val *= p.powi(e as i32);
    }
    Ok(val)
}

/// Product of two signatures, expanded so every sin-exponent is back in {0,1}.
///
/// Returns (signature, extra rational factor) pairs; the factor is ±1.
fn mul_signatures(a: &Signature, b: &Signature) -> Vec<(Signature, Rat)> {
    let mut base = Signature::default();
    for (&v, &k) in a.poly.iter().chain(b.poly.iter()) {
        *base.poly.entry(v).or_insert(0) += k;
    }
    for (name, &k) in a.params.iter().chain(b.params.iter()) {
        *base.params.entry(name.clone()).or_insert(0) += k;
    }
    let mut reduce = Vec::new(); // variables where sin^2 appeared
    let mut trig: BTreeMap<u32, (u8, i64)> = BTreeMap::new();
    for (&v, &(s, c)) in a.trig.iter().chain(b.trig.iter()) {
        let e = trig.entry(v).or_insert((0, 0));
        e.0 += s;
        e.1 += c;
    }
    for (&v, e) in trig.iter_mut() {
        if e.0 == 2 {
            e.0 = 0;
            reduce.push(v);
        }
    }
    trig.retain(|_, &mut (s, c)| s != 0 || c != 0);
    base.trig = trig;

    // expand product over reduce of (1 - cos^2 x_v)
    let mut out = vec![(base, Rat::one())];
    for v in reduce {
        let mut next = Vec::with_capacity(out.len() * 2);
        for (sig, c) in out {
            let mut with_cos = sig.clone();
            let e = with_cos.trig.entry(v).or_insert((0, 0));
            e.1 += 2;
            if *e == (0, 0) {
                with_cos.trig.remove(&v);
            }
            next.push((sig, c.clone()));
            next.push((with_cos, -c));
        }
        out = next;
    }
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (sig, coeff)) in self.terms.iter().enumerate() {
            let neg = coeff.is_negative();
            let mag = coeff.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write_monomial(f, sig, &mag)?;
        }
        Ok(())
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, sig: &Signature, mag: &Rat) -> fmt::Result {
    let mut factors: Vec<String> = Vec::new();
    for (name, &e) in &sig.params {
        factors.push(if e == 1 {
            name.clone()
        } else {
            format!("{name}^{e}")
        });
    }
    for (&v, &k) in &sig.poly {
        factors.push(if k == 1 {
            format!("x{v}")
        } else {
            format!("x{v}^{k}")
        });
    }
    for (&v, &(s, c)) in &sig.trig {
        // re-sugar negative cos powers as tan / sec
        if c >= 0 {
            if s == 1 {
                factors.push(format!("sin(x{v})"));
            }
            match c {
                0 => {}
                1 => factors.push(format!("cos(x{v})")),
                _ => factors.push(format!("cos(x{v})^{c}")),
            }
        } else if s == 1 {
            factors.push(format!("tan(x{v})"));
            match -c - 1 {
                0 => {}
                1 => factors.push(format!("sec(x{v})")),
                k => factors.push(format!("sec(x{v})^{k}")),
            }
        } else {
            match -c {
                1 => factors.push(format!("sec(x{v})")),
                k => factors.push(format!("sec(x{v})^{k}")),
            }
        }
    }
    if factors.is_empty() {
        return write!(f, "{mag}");
    }
    if !mag.is_one() {
        write!(f, "{mag}*")?;
    }
    write!(f, "{}", factors.join("*"))
}

/// Graded-lex comparison of signatures for the division algorithm: total
/// degree over poly and param exponents, then lex with ascending variable
/// priority, then the trig part as a plain tie-break. This is a genuine
/// monomial order with respect to multiplication by trig-free monomials.
fn cmp_monomial(a: &Signature, b: &Signature) -> std::cmp::Ordering {
    let deg = |s: &Signature| -> u64 {
        s.poly.values().map(|&k| k as u64).sum::<u64>()
            + s.params.values().map(|&k| k as u64).sum::<u64>()
    };
    deg(a)
        .cmp(&deg(b))
        .then_with(|| lex_cmp(&a.poly, &b.poly))
        .then_with(|| lex_cmp(&a.params, &b.params))
        .then_with(|| a.trig.cmp(&b.trig))
}

/// Lex comparison of exponent maps, earliest key decides, missing = 0.
fn lex_cmp<K: Ord + Clone>(a: &BTreeMap<K, u32>, b: &BTreeMap<K, u32>) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let mut ai = a.iter().peekable();
    let mut bi = b.iter().peekable();
    loop {
        match (ai.peek(), bi.peek()) {
            (None, None) => return Ordering::Equal,
            // a has an extra variable with positive exponent
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(ka, ea)), Some(&(kb, eb))) => match ka.cmp(kb) {
                // the earlier key has a positive exponent only on one side
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(eb);
                    }
                    ai.next();
                    bi.next();
                }
            },
        }
    }
}

impl Expr {
    /// Exact sparse polynomial division: `Some(q)` with `self = q * divisor`,
    /// or `None` if the division does not come out even.
    ///
    /// The divisor must be trig-free (the sin/cos monomial basis is not
    /// closed under division); the dividend may carry trig atoms, which pass
    /// through to the quotient untouched.
    pub fn try_div_exact(&self, divisor: &Expr) -> Option<Expr> {
        if divisor.is_zero() || !divisor.is_trig_free() {
            return None;
        }
        if let Some(c) = divisor.as_constant() {
            return Some(self.scale(&(Rat::one() / c)));
        }
        let (lead_sig, lead_coeff) = divisor
            .terms
            .iter()
            .max_by(|(a, _), (b, _)| cmp_monomial(a, b))
            .map(|(s, c)| (s.clone(), c.clone()))
            .expect("nonzero divisor");
        let mut remainder = self.clone();
        let mut quotient = Expr::zero();
        while !remainder.is_zero() {
            let (r_sig, r_coeff) = remainder
                .terms
                .iter()
                .max_by(|(a, _), (b, _)| cmp_monomial(a, b))
                .map(|(s, c)| (s.clone(), c.clone()))
                .expect("nonzero remainder");
            // componentwise divisibility of the leading monomials
            let mut t_sig = Signature {
                trig: r_sig.trig.clone(),
                ..Default::default()
            };
            for (v, &e) in &lead_sig.poly {
                let have = r_sig.poly.get(v).copied().unwrap_or(0);
                if have < e {
                    return None;
                }
            }
            for (name, &e) in &lead_sig.params {
                let have = r_sig.params.get(name).copied().unwrap_or(0);
                if have < e {
                    return None;
                }
            }
            for (&v, &e) in &r_sig.poly {
                let k = e - lead_sig.poly.get(&v).copied().unwrap_or(0);
                if k > 0 {
                    t_sig.poly.insert(v, k);
                }
            }
            for (name, &e) in &r_sig.params {
                let k = e - lead_sig.params.get(name).copied().unwrap_or(0);
                if k > 0 {
                    t_sig.params.insert(name.clone(), k);
                }
            }
            let t = Expr::monomial(r_coeff / &lead_coeff, t_sig);
            remainder = remainder.sub(&t.mul(divisor));
            quotient = quotient.add(&t);
        }
        Some(quotient)
    }
}

/// Formal quotient of two expressions; the denominator is never zero.
///
/// No full gcd reduction is performed, but every operation attempts exact
/// division to cancel divisible numerator/denominator pairs — without this
/// the degree of stacked denominators grows multiplicatively through
/// pushforward pipelines. Equality and the zero test still go through
/// cross-multiplication and the canonical-form zero test on `Expr`.
#[derive(Debug, Clone)]
pub struct Ratio {
    num: Expr,
    den: Expr,
}

impl Ratio {
    pub fn new(num: Expr, den: Expr) -> Result<Self, RatioError> {
        if den.is_zero() {
            return Err(RatioError::ZeroDenominator);
        }
        Ok(Ratio::reduced(num, den))
    }

    /// Cancel the denominator when it divides the numerator exactly.
    fn reduced(num: Expr, den: Expr) -> Ratio {
        if den.is_one() {
            return Ratio { num, den };
        }
        if num.is_zero() {
            return Ratio::zero();
        }
        if let Some(q) = num.try_div_exact(&den) {
            return Ratio {
                num: q,
                den: Expr::one(),
            };
        }
        Ratio { num, den }
    }

    pub fn from_expr(num: Expr) -> Self {
        Ratio {
            num,
            den: Expr::one(),
        }
    }

    pub fn zero() -> Self {
        Ratio::from_expr(Expr::zero())
    }

    pub fn one() -> Self {
        Ratio::from_expr(Expr::one())
    }

    pub fn num(&self) -> &Expr {
        &self.num
    }

    pub fn den(&self) -> &Expr {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Ratio) -> Ratio {
        if self.den == other.den {
            return Ratio::reduced(self.num.add(&other.num), self.den.clone());
        }
        // one denominator dividing the other is the common case in
        // pushforward pipelines where both are powers of the same factor
        if let Some(q) = other.den.try_div_exact(&self.den) {
            return Ratio::reduced(self.num.mul(&q).add(&other.num), other.den.clone());
        }
        if let Some(q) = self.den.try_div_exact(&other.den) {
            return Ratio::reduced(self.num.add(&other.num.mul(&q)), self.den.clone());
        }
        Ratio::reduced(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> Ratio {
        Ratio {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Ratio) -> Ratio {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Ratio) -> Ratio {
        // cancel across the product before multiplying out
        let (mut n1, mut d2) = (self.num.clone(), other.den.clone());
        if !d2.is_one() {
            if let Some(q) = n1.try_div_exact(&d2) {
                n1 = q;
                d2 = Expr::one();
            }
        }
        let (mut n2, mut d1) = (other.num.clone(), self.den.clone());
        if !d1.is_one() {
            if let Some(q) = n2.try_div_exact(&d1) {
                n2 = q;
                d1 = Expr::one();
            }
        }
        Ratio::reduced(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn scale(&self, c: &Rat) -> Ratio {
        Ratio {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Result<Ratio, RatioError> {
        if self.num.is_zero() {
            return Err(RatioError::ZeroDenominator);
        }
        Ok(Ratio {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    pub fn div(&self, other: &Ratio) -> Result<Ratio, RatioError> {
        Ok(self.mul(&other.recip()?))
    }

    /// Quotient rule: d(n/d) = (n' d - n d') / d^2.
    pub fn partial(&self, v: u32) -> Ratio {
        if self.den.is_one() {
            return Ratio::from_expr(self.num.partial(v));
        }
        Ratio::reduced(
            self.num.partial(v).mul(&self.den).sub(&self.num.mul(&self.den.partial(v))),
            self.den.mul(&self.den),
        )
    }

    /// Equality by cross-multiplication.
    pub fn ratio_equal(&self, other: &Ratio) -> bool {
        self.num.mul(&other.den).sub(&other.num.mul(&self.den)).is_zero()
    }

    pub fn subst_param(&self, name: &str, value: &Rat) -> Result<Ratio, RatioError> {
        Ratio::new(
            self.num.subst_param(name, value),
            self.den.subst_param(name, value),
        )
    }

    pub fn rename_vars(&self, perm: &[u32]) -> Ratio {
        Ratio {
            num: self.num.rename_vars(perm),
            den: self.den.rename_vars(perm),
        }
    }

    pub fn max_var(&self) -> u32 {
        self.num.max_var().max(self.den.max_var())
    }

    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        let d = self.den.eval(point, params)?;
        if d.abs() < SINGULAR_EPS {
            return Err(EvalError::DivisionByZero {
                context: self.den.to_string(),
            });
        }
        Ok(self.num.eval(point, params)? / d)
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.ratio_equal(other)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatioError {
    #[error("denominator is the zero expression")]
    ZeroDenominator,
    #[error("substitution requires trig-free expressions, found trig atom on x{var}")]
    TrigSubstitution { var: u32 },
}

/// Substitute coordinate variables by ratios in a trig-free expression.
///
/// `subs[v-1]` replaces `x_v`; every poly variable of `self` must be covered.
pub fn subst_vars(expr: &Expr, subs: &[Ratio]) -> Result<Ratio, RatioError> {
    if let Some(sig) = expr.terms.keys().find(|s| !s.trig.is_empty()) {
        let var = *sig.trig.keys().next().unwrap();
        return Err(RatioError::TrigSubstitution { var });
    }
    let mut out = Ratio::zero();
    for (sig, coeff) in &expr.terms {
        let mut term = Ratio::from_expr(Expr::monomial(
            coeff.clone(),
            Signature {
                params: sig.params.clone(),
                ..Default::default()
            },
        ));
        for (&v, &k) in &sig.poly {
            let r = subs
                .get(v as usize - 1)
                .expect("substitution list shorter than variable count");
            for _ in 0..k {
                term = term.mul(r);
            }
        }
        out = out.add(&term);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_inverse_cancels() {
        let x = Expr::var(1);
        assert!(x.sub(&x).is_zero());
        assert!(x.add(&x.neg()).is_zero());
    }

    #[test]
    fn sin_squared_reduces() {
        let s = Expr::sin(1);
        let got = s.mul(&s);
        let want = Expr::one().sub(&Expr::cos(1).mul(&Expr::cos(1)));
        assert_eq!(got, want);
    }

    #[test]
    fn pythagorean_identity_is_zero() {
        let s = Expr::sin(1);
        let c = Expr::cos(1);
        let e = s.mul(&s).add(&c.mul(&c)).sub(&Expr::one());
        assert!(e.is_zero());
    }

    #[test]
    fn tan_times_cos_is_sin() {
        let got = Expr::tan(2).mul(&Expr::cos(2));
        assert_eq!(got, Expr::sin(2));
    }

    #[test]
    fn partial_of_square() {
        let e = Expr::var(1).pow(2);
        assert_eq!(e.partial(1), Expr::var(1).scale(&rat_int(2)));
    }

    #[test]
    fn partial_of_tan_is_sec_squared() {
        // d/dx tan x = cos^{-2} x
        assert_eq!(Expr::tan(2).partial(2), Expr::cos_pow(2, -2));
    }

    #[test]
    fn partial_of_sin_sec_product() {
        // d/dx2 [sin x1 * sec x2] = sin x1 * sin x2 * cos^{-2} x2
        let e = Expr::sin(1).mul(&Expr::sec(2));
        let want = Expr::sin(1)
            .mul(&Expr::monomial(Rat::one(), {
                let mut s = Signature::default();
                s.trig.insert(2, (1, -2));
                s
            }));
        assert_eq!(e.partial(2), want);
        // finite-difference cross-check at random points
        let params = BTreeMap::new();
        let d = e.partial(2);
        for i in 0..10 {
            let p = [0.3 + 0.07 * i as f64, 0.2 + 0.09 * i as f64];
            let h = 1e-5;
            let fd = (e.eval(&[p[0], p[1] + h], &params).unwrap()
                - e.eval(&[p[0], p[1] - h], &params).unwrap())
                / (2.0 * h);
            let sym = d.eval(&p, &params).unwrap();
            assert!((fd - sym).abs() < 1e-6, "fd {fd} vs sym {sym}");
        }
    }

    #[test]
    fn partials_commute() {
        let e = Expr::sin(1)
            .mul(&Expr::tan(2))
            .mul(&Expr::var(1).pow(3))
            .add(&Expr::sec(2).mul(&Expr::var(2)));
        assert_eq!(e.partial(1).partial(2), e.partial(2).partial(1));
    }

    #[test]
    fn sin_minus_cos_not_zero() {
        assert!(!Expr::sin(1).sub(&Expr::cos(1)).is_zero());
    }

    #[test]
    fn eval_singularities() {
        let params = BTreeMap::new();
        let e = Expr::var(1).pow(2);
        assert_eq!(e.eval(&[3.0], &params).unwrap(), 9.0);
        let t = Expr::tan(2);
        let err = t.eval(&[0.0, std::f64::consts::FRAC_PI_2], &params);
        assert_eq!(err, Err(EvalError::SingularCos { var: 2 }));
        let sec = Expr::sec(2);
        assert!((sec.eval(&[0.0, 0.0], &params).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_cross_multiplication() {
        let x1 = Expr::var(1);
        let a = Ratio::from_expr(x1.clone());
        let b = Ratio::new(x1.pow(2), x1.clone()).unwrap();
        assert!(a.ratio_equal(&b));

        // 1/(1-x3) vs (1+x3)/(1-x3^2)
        let x3 = Expr::var(3);
        let c = Ratio::new(Expr::one(), Expr::one().sub(&x3)).unwrap();
        let d = Ratio::new(
            Expr::one().add(&x3),
            Expr::one().sub(&x3.pow(2)),
        )
        .unwrap();
        assert!(c.ratio_equal(&d));

        let e = Ratio::new(Expr::one(), Expr::var(1)).unwrap();
        let f = Ratio::new(Expr::one(), Expr::var(2)).unwrap();
        assert!(!e.ratio_equal(&f));
    }

    #[test]
    fn param_derivative_is_zero() {
        let e = Expr::param("c").mul(&Expr::param("alpha"));
        assert!(e.partial(1).is_zero());
        assert!(e.partial(3).is_zero());
    }

    #[test]
    fn subst_param_value() {
        let e = Expr::param("c").mul(&Expr::var(3).pow(2)).add(&Expr::param("c").pow(2));
        let got = e.subst_param("c", &rat_int(-1));
        let want = Expr::var(3).pow(2).neg().add(&Expr::one());
        assert_eq!(got, want);
    }

    #[test]
    fn rename_swaps_trig_vars() {
        // swap x1 <-> x3 in sin x1 * tan x2
        let e = Expr::sin(1).mul(&Expr::tan(2));
        let perm = [0u32, 3, 2, 1];
        assert_eq!(e.rename_vars(&perm), Expr::sin(3).mul(&Expr::tan(2)));
    }

    #[test]
    fn subst_vars_rational() {
        // x1^2 + x2 with x1 := 1/x2, x2 := x1  ->  1/x2^2 + x1... using subs list
        let e = Expr::var(1).pow(2).add(&Expr::var(2));
        let subs = [
            Ratio::new(Expr::one(), Expr::var(2)).unwrap(),
            Ratio::from_expr(Expr::var(1)),
        ];
        let got = subst_vars(&e, &subs).unwrap();
        let want = Ratio::new(
            Expr::one().add(&Expr::var(1).mul(&Expr::var(2).pow(2))),
            Expr::var(2).pow(2),
        )
        .unwrap();
        assert!(got.ratio_equal(&want));
    }

    #[test]
    fn subst_vars_rejects_trig() {
        let e = Expr::sin(1);
        let subs = [Ratio::from_expr(Expr::var(2))];
        assert!(matches!(
            subst_vars(&e, &subs),
            Err(RatioError::TrigSubstitution { var: 1 })
        ));
    }
}
