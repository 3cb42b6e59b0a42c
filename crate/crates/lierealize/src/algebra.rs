//! Abstract Lie algebra layer: structure constants, Killing form,
//! identification of the four unsolvable algebras of dimension <= 4, and
//! verification that vector-field sets realize a given algebra.

use crate::liefield::{constant_relations, lie_bracket, FieldError, VectorField};
use crate::linalg::RatMatrix;
use crate::symexpr::{rat_int, Rat};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The four named algebras, plus `Unknown` for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgebraTag {
    #[serde(rename = "sl2R")]
    Sl2R,
    #[serde(rename = "so3")]
    So3,
    #[serde(rename = "sl2R_plus_A1")]
    Sl2RPlusA1,
    #[serde(rename = "so3_plus_A1")]
    So3PlusA1,
    #[serde(rename = "unknown")]
    Unknown,
}

impl AlgebraTag {
    pub fn parse(s: &str) -> Option<AlgebraTag> {
        match s {
            "sl2R" | "sl2" | "sl(2,R)" => Some(AlgebraTag::Sl2R),
            "so3" | "so(3)" => Some(AlgebraTag::So3),
            "sl2R_plus_A1" | "sl2R+A1" => Some(AlgebraTag::Sl2RPlusA1),
            "so3_plus_A1" | "so3+A1" => Some(AlgebraTag::So3PlusA1),
            _ => None,
        }
    }
}

impl fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgebraTag::Sl2R => "sl2R",
            AlgebraTag::So3 => "so3",
            AlgebraTag::Sl2RPlusA1 => "sl2R_plus_A1",
            AlgebraTag::So3PlusA1 => "so3_plus_A1",
            AlgebraTag::Unknown => "unknown",
        };
        write!(f, "{s}")
    }
}

/// Antisymmetric array `c_{ij}^k` with `[e_i, e_j] = c_{ij}^k e_k`
/// (0-based storage, 1-based in the wire format).
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    pub m: usize,
    c: Vec<Rat>, // m^3 entries, index (i*m + j)*m + k
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// `c_{ij}^k != -c_{ji}^k` at the named triple (1-based).
    Antisymmetry { i: usize, j: usize, k: usize },
    /// Jacobi sum nonzero at the named quadruple (1-based).
    Jacobi { i: usize, j: usize, k: usize, s: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { i, j, k } => {
                write!(f, "antisymmetry fails at c_{{{i}{j}}}^{k}")
            }
            Violation::Jacobi { i, j, k, s } => {
                write!(f, "Jacobi identity fails at (i,j,k,s) = ({i},{j},{k},{s})")
            }
        }
    }
}

impl StructureConstants {
    pub fn zeros(m: usize) -> Self {
        StructureConstants {
            m,
            c: vec![Rat::zero(); m * m * m],
        }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.c[(i * self.m + j) * self.m + k]
    }

    /// Set `c_{ij}^k` and its antisymmetric partner (0-based indices).
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Rat) {
        self.c[(j * self.m + i) * self.m + k] = -v.clone();
        self.c[(i * self.m + j) * self.m + k] = v;
    }

    /// Set one entry without touching the partner (used by basis changes).
    fn set_raw(&mut self, i: usize, j: usize, k: usize, v: Rat) {
        self.c[(i * self.m + j) * self.m + k] = v;
    }

    /// The paper's sl(2,R): [e1,e2]=e1, [e1,e3]=2e2, [e2,e3]=e3.
    pub fn sl2r() -> Self {
        let mut sc = StructureConstants::zeros(3);
        sc.set(0, 1, 0, Rat::one());
        sc.set(0, 2, 1, rat_int(2));
        sc.set(1, 2, 2, Rat::one());
        sc
    }

    /// The paper's so(3): [e1,e2]=e3, [e3,e1]=e2, [e2,e3]=e1.
    pub fn so3() -> Self {
        let mut sc = StructureConstants::zeros(3);
        sc.set(0, 1, 2, Rat::one());
        sc.set(2, 0, 1, Rat::one());
        sc.set(1, 2, 0, Rat::one());
        sc
    }

    /// Direct sum with a central A1 generator appended as `e_{m+1}`.
    pub fn plus_a1(&self) -> Self {
        let mut sc = StructureConstants::zeros(self.m + 1);
        for i in 0..self.m {
            for j in 0..self.m {
                for k in 0..self.m {
                    sc.set_raw(i, j, k, self.get(i, j, k).clone());
                }
            }
        }
        sc
    }

    pub fn for_tag(tag: AlgebraTag) -> Option<Self> {
        match tag {
            AlgebraTag::Sl2R => Some(Self::sl2r()),
            AlgebraTag::So3 => Some(Self::so3()),
            AlgebraTag::Sl2RPlusA1 => Some(Self::sl2r().plus_a1()),
            AlgebraTag::So3PlusA1 => Some(Self::so3().plus_a1()),
            AlgebraTag::Unknown => None,
        }
    }

    /// Exact check of antisymmetry and the Jacobi identity; reports the first
    /// violated triple.
    pub fn validate(&self) -> Result<(), Violation> {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if self.get(i, j, k) != &(-self.get(j, i, k).clone()) {
                        return Err(Violation::Antisymmetry {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for s in 0..m {
                        let mut sum = Rat::zero();
                        for l in 0..m {
                            sum += self.get(i, j, l) * self.get(l, k, s);
                            sum += self.get(j, k, l) * self.get(l, i, s);
                            sum += self.get(k, i, l) * self.get(l, j, s);
                        }
                        if !sum.is_zero() {
                            return Err(Violation::Jacobi {
                                i: i + 1,
                                j: j + 1,
                                k: k + 1,
                                s: s + 1,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Matrix of `ad e_i` acting on the algebra: `(ad e_i)^k_j = c_{ij}^k`.
    pub fn ad(&self, i: usize) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.m, self.m);
        for j in 0..self.m {
            for k in 0..self.m {
                m[(k, j)] = self.get(i, j, k).clone();
            }
        }
        m
    }

    /// Killing form `K(e_i, e_j) = trace(ad e_i . ad e_j)`, exact.
    pub fn killing_form(&self) -> RatMatrix {
        let ads: Vec<RatMatrix> = (0..self.m).map(|i| self.ad(i)).collect();
        let mut k = RatMatrix::zeros(self.m, self.m);
        for i in 0..self.m {
            for j in i..self.m {
                let prod = ads[i].matmul(&ads[j]);
                let mut tr = Rat::zero();
                for d in 0..self.m {
                    tr += prod[(d, d)].clone();
                }
                k[(i, j)] = tr.clone();
                k[(j, i)] = tr;
            }
        }
        k
    }

    /// Transform constants to the basis `e'_i = sum_j P_{ji} e_j`
    /// (columns of `P` are the new basis vectors in the old basis).
    pub fn change_basis(&self, p: &RatMatrix) -> Option<StructureConstants> {
        let pinv = p.inverse()?;
        let m = self.m;
        let mut out = StructureConstants::zeros(m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let mut v = Rat::zero();
                    for a in 0..m {
                        for b in 0..m {
                            if p[(a, i)].is_zero() || p[(b, j)].is_zero() {
                                continue;
                            }
                            for l in 0..m {
                                v += &p[(a, i)] * &p[(b, j)] * self.get(a, b, l) * &pinv[(k, l)];
                            }
                        }
                    }
                    out.set_raw(i, j, k, v);
                }
            }
        }
        Some(out)
    }

    /// Span of all bracket vectors `[e_i, e_j]` as rows of an rref basis.
    pub fn derived_subalgebra_basis(&self) -> Vec<Vec<Rat>> {
        let m = self.m;
        let mut rows = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                let row: Vec<Rat> = (0..m).map(|k| self.get(i, j, k).clone()).collect();
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            return Vec::new();
        }
        let mut mat = RatMatrix::from_rows(rows);
        let pivots = mat.rref();
        (0..pivots.len())
            .map(|r| (0..m).map(|c| mat[(r, c)].clone()).collect())
            .collect()
    }

    /// Center: vectors `z` with `[z, e_j] = 0` for all `j`.
    pub fn center_basis(&self) -> Vec<Vec<Rat>> {
        let m = self.m;
        // rows indexed by (j, k): sum_i z_i c_{ij}^k = 0
        let mut rows = Vec::new();
        for j in 0..m {
            for k in 0..m {
                rows.push((0..m).map(|i| self.get(i, j, k).clone()).collect());
            }
        }
        RatMatrix::from_rows(rows).nullspace()
    }

    /// Wire format: `{"m": int, "c": [[i, j, k, "p/q"], ...]}` with 1-based
    /// `i < j`; antisymmetric completion is implied.
    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        for i in 0..self.m {
            for j in i + 1..self.m {
                for k in 0..self.m {
                    let v = self.get(i, j, k);
                    if !v.is_zero() {
                        entries.push(serde_json::json!([i + 1, j + 1, k + 1, v.to_string()]));
                    }
                }
            }
        }
        serde_json::json!({"m": self.m, "c": entries})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let m = v
            .get("m")
            .and_then(|x| x.as_u64())
            .ok_or("missing integer field `m`")? as usize;
        let mut sc = StructureConstants::zeros(m);
        let entries = v
            .get("c")
            .and_then(|x| x.as_array())
            .ok_or("missing array field `c`")?;
        for e in entries {
            let arr = e.as_array().ok_or("entry is not an array")?;
            if arr.len() != 4 {
                return Err("entry must be [i, j, k, \"p/q\"]".into());
            }
            let idx = |t: &serde_json::Value| -> Result<usize, String> {
                let u = t.as_u64().ok_or("index must be a positive integer")? as usize;
                if u == 0 || u > m {
                    return Err(format!("index {u} out of range 1..={m}"));
                }
                Ok(u - 1)
            };
            let (i, j, k) = (idx(&arr[0])?, idx(&arr[1])?, idx(&arr[2])?);
            if i >= j {
                return Err(format!("entries must have i < j, got ({}, {})", i + 1, j + 1));
            }
            let s = arr[3].as_str().ok_or("coefficient must be a string")?;
            let val = parse_rat(s)?;
            sc.set(i, j, k, val);
        }
        Ok(sc)
    }
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1, s),
    };
    let (p, q) = match body.split_once('/') {
        Some((p, q)) => (p, q),
        None => (body, "1"),
    };
    let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
    let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
    if q == 0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rat::new((sign * p).into(), q.into()))
}

/// Decide which of the paper's four algebras the constants describe.
///
/// Dimension 3 with nondegenerate Killing form: signature (2,1,0) is
/// sl(2,R), (0,3,0) is so(3). Dimension 4 with Killing rank 3: the derived
/// subalgebra must be 3-dimensional with a central 1-dimensional complement;
/// recurse on the derived part. Anything else is `Unknown`.
pub fn identify(sc: &StructureConstants) -> AlgebraTag {
    if sc.validate().is_err() {
        return AlgebraTag::Unknown;
    }
    match sc.m {
        3 => identify3(sc),
        4 => {
            let k = sc.killing_form();
            if k.rank() != 3 {
                return AlgebraTag::Unknown;
            }
            let derived = sc.derived_subalgebra_basis();
            if derived.len() != 3 {
                return AlgebraTag::Unknown;
            }
            // the radical complement must be central
            let center = sc.center_basis();
            if center.len() != 1 {
                return AlgebraTag::Unknown;
            }
            // center must complement the derived subalgebra
            let mut rows = derived.clone();
            rows.push(center[0].clone());
            if RatMatrix::from_rows(rows).rank() != 4 {
                return AlgebraTag::Unknown;
            }
            // constants of the derived subalgebra in its rref basis
            let Some(dsc) = restrict_to_span(sc, &derived) else {
                return AlgebraTag::Unknown;
            };
            match identify3(&dsc) {
                AlgebraTag::Sl2R => AlgebraTag::Sl2RPlusA1,
                AlgebraTag::So3 => AlgebraTag::So3PlusA1,
                _ => AlgebraTag::Unknown,
            }
        }
        _ => AlgebraTag::Unknown,
    }
}

fn identify3(sc: &StructureConstants) -> AlgebraTag {
    debug_assert_eq!(sc.m, 3);
    let k = sc.killing_form();
    match k.signature() {
        (2, 1, 0) => AlgebraTag::Sl2R,
        (0, 3, 0) => AlgebraTag::So3,
        _ => AlgebraTag::Unknown,
    }
}

/// Structure constants of a bracket-closed span, expressed in the given
/// basis vectors (rows over the ambient algebra). `None` if not closed.
fn restrict_to_span(sc: &StructureConstants, basis: &[Vec<Rat>]) -> Option<StructureConstants> {
    let d = basis.len();
    let m = sc.m;
    // solve [b_i, b_j] = sum_k lambda_k b_k for each pair
    let bmat = RatMatrix::from_rows(basis.to_vec()).transpose(); // m x d
    let mut out = StructureConstants::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mut bracket = vec![Rat::zero(); m];
            for a in 0..m {
                for b in 0..m {
                    if basis[i][a].is_zero() || basis[j][b].is_zero() {
                        continue;
                    }
                    for (k, bk) in bracket.iter_mut().enumerate() {
                        *bk += &basis[i][a] * &basis[j][b] * sc.get(a, b, k);
                    }
                }
            }
            let lambda = bmat.solve(&bracket)?;
            for (k, v) in lambda.iter().enumerate().take(d) {
                out.set_raw(i, j, k, v.clone());
            }
        }
    }
    Some(out)
}

/// Exact constants `lambda` with `X = sum_s lambda_s e_s`, or `None`.
///
/// Same canonical-coefficient linear algebra as `constant_relations`, with an
/// inhomogeneous right-hand side; the solution is re-verified symbolically.
pub fn express_in_span(x: &VectorField, fields: &[VectorField]) -> Result<Option<Vec<Rat>>, FieldError> {
    let m = fields.len();
    let n = x.n();
    for f in fields {
        if f.n() != n {
            return Err(FieldError::DimensionMismatch(n, f.n()));
        }
    }
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Rat> = Vec::new();
    for a in 1..=n {
        // common denominator of X_a and all e_{s,a}
        let mut nums: Vec<crate::symexpr::Expr> = Vec::with_capacity(m);
        for s in 0..m {
            let mut e = fields[s].coeff(a).num().clone();
            for (t, f) in fields.iter().enumerate() {
                if t != s {
                    e = e.mul(f.coeff(a).den());
                }
            }
            e = e.mul(x.coeff(a).den());
            nums.push(e);
        }
        let mut target = x.coeff(a).num().clone();
        for f in fields {
            target = target.mul(f.coeff(a).den());
        }
        let mut sigs = std::collections::BTreeSet::new();
        for e in nums.iter().chain(std::iter::once(&target)) {
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
            let b = target
                .terms()
                .find(|mo| mo.sig == sig)
                .map(|mo| mo.coeff)
                .unwrap_or_else(Rat::zero);
            rows.push(row);
            rhs.push(b);
        }
    }
    if rows.is_empty() {
        return Ok(Some(vec![Rat::zero(); m]));
    }
    let Some(lambda) = RatMatrix::from_rows(rows).solve(&rhs) else {
        return Ok(None);
    };
    // symbolic confirmation
    let mut acc = VectorField::zero(n);
    for (s, l) in lambda.iter().enumerate() {
        acc = acc.add(&fields[s].scale(l))?;
    }
    if !acc.sub(x)?.is_zero() {
        return Ok(None);
    }
    Ok(Some(lambda))
}

/// Why a set of fields fails to realize an algebra.
#[derive(Debug, Clone, Serialize)]
pub enum RealizationFailure {
    /// `[e_i, e_j] - c_{ij}^k e_k` is not the zero field (1-based pair).
    BracketMismatch { i: usize, j: usize, residual: String },
    /// Nonzero constant relation: the realization is unfaithful.
    Unfaithful { relation: Vec<String> },
    /// Field count differs from the algebra dimension.
    WrongCount { fields: usize, dimension: usize },
}

impl fmt::Display for RealizationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealizationFailure::BracketMismatch { i, j, residual } => {
                write!(f, "bracket ({i},{j}) mismatch, residual {residual}")
            }
            RealizationFailure::Unfaithful { relation } => {
                write!(f, "unfaithful: relation ({})", relation.join(", "))
            }
            RealizationFailure::WrongCount { fields, dimension } => {
                write!(f, "{fields} fields for a {dimension}-dimensional algebra")
            }
        }
    }
}

/// Check `[e_i, e_j] = c_{ij}^k e_k` exactly for all `i < j`, plus
/// faithfulness (no constant relations).
pub fn verify_realization(
    fields: &[VectorField],
    sc: &StructureConstants,
) -> Result<Result<(), RealizationFailure>, FieldError> {
    if fields.len() != sc.m {
        return Ok(Err(RealizationFailure::WrongCount {
            fields: fields.len(),
            dimension: sc.m,
        }));
    }
    let n = fields[0].n();
    for i in 0..sc.m {
        for j in i + 1..sc.m {
            let mut expected = VectorField::zero(n);
            for (k, field) in fields.iter().enumerate().take(sc.m) {
                let c = sc.get(i, j, k);
                if !c.is_zero() {
                    expected = expected.add(&field.scale(c))?;
                }
            }
            let bracket = lie_bracket(&fields[i], &fields[j])?;
            let residual = bracket.sub(&expected)?;
            if !residual.is_zero() {
                return Ok(Err(RealizationFailure::BracketMismatch {
                    i: i + 1,
                    j: j + 1,
                    residual: residual.to_string(),
                }));
            }
        }
    }
    let relations = constant_relations(fields)?;
    if let Some(rel) = relations.first() {
        return Ok(Err(RealizationFailure::Unfaithful {
            relation: rel.iter().map(|r| r.to_string()).collect(),
        }));
    }
    Ok(Ok(()))
}

/// Extract structure constants from a bracket-closed field set.
pub fn constants_from_fields(
    fields: &[VectorField],
) -> Result<Result<StructureConstants, (usize, usize)>, FieldError> {
    let m = fields.len();
    let mut sc = StructureConstants::zeros(m);
    for i in 0..m {
        for j in i + 1..m {
            let bracket = lie_bracket(&fields[i], &fields[j])?;
            match express_in_span(&bracket, fields)? {
                Some(lambda) => {
                    for (k, v) in lambda.into_iter().enumerate() {
                        sc.set_raw(i, j, k, v.clone());
                        sc.set_raw(j, i, k, -v);
                    }
                }
                None => return Ok(Err((i + 1, j + 1))),
            }
        }
    }
    Ok(Ok(sc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_field_list;

    #[test]
    fn paper_tables_validate() {
        assert_eq!(StructureConstants::sl2r().validate(), Ok(()));
        assert_eq!(StructureConstants::so3().validate(), Ok(()));
        assert_eq!(StructureConstants::sl2r().plus_a1().validate(), Ok(()));
        assert_eq!(StructureConstants::so3().plus_a1().validate(), Ok(()));
    }

    #[test]
    fn mutated_sl2r_fails_jacobi() {
        let mut sc = StructureConstants::sl2r();
        sc.set(0, 1, 0, rat_int(2));
        assert!(matches!(sc.validate(), Err(Violation::Jacobi { .. })));
    }

    #[test]
    fn killing_values_from_ad_traces() {
        let k = StructureConstants::sl2r().killing_form();
        assert_eq!(k[(1, 1)], rat_int(2));
        assert_eq!(k[(0, 2)], rat_int(-4));
        assert_eq!(k[(0, 0)], rat_int(0));
        assert_eq!(k[(2, 2)], rat_int(0));
        assert_eq!(k.signature(), (2, 1, 0));

        let k = StructureConstants::so3().killing_form();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { rat_int(-2) } else { rat_int(0) };
                assert_eq!(k[(i, j)], want);
            }
        }
        assert_eq!(k.signature(), (0, 3, 0));

        let abelian = StructureConstants::zeros(3);
        assert_eq!(abelian.killing_form().signature(), (0, 0, 3));
    }

    #[test]
    fn identify_paper_tables() {
        assert_eq!(identify(&StructureConstants::sl2r()), AlgebraTag::Sl2R);
        assert_eq!(identify(&StructureConstants::so3()), AlgebraTag::So3);
        assert_eq!(
            identify(&StructureConstants::sl2r().plus_a1()),
            AlgebraTag::Sl2RPlusA1
        );
        assert_eq!(
            identify(&StructureConstants::so3().plus_a1()),
            AlgebraTag::So3PlusA1
        );
        assert_eq!(identify(&StructureConstants::zeros(4)), AlgebraTag::Unknown);
    }

    #[test]
    fn identify_under_basis_change() {
        let p = RatMatrix::from_rows(vec![
            vec![rat_int(1), rat_int(2), rat_int(0)],
            vec![rat_int(0), rat_int(1), rat_int(3)],
            vec![rat_int(1), rat_int(0), rat_int(1)],
        ]);
        let sc = StructureConstants::so3().change_basis(&p).unwrap();
        assert_eq!(sc.validate(), Ok(()));
        assert_eq!(identify(&sc), AlgebraTag::So3);
    }

    #[test]
    fn killing_is_basis_covariant() {
        let p = RatMatrix::from_rows(vec![
            vec![rat_int(2), rat_int(1), rat_int(0)],
            vec![rat_int(1), rat_int(1), rat_int(1)],
            vec![rat_int(0), rat_int(3), rat_int(1)],
        ]);
        let sc = StructureConstants::sl2r();
        let changed = sc.change_basis(&p).unwrap();
        let want = p.transpose().matmul(&sc.killing_form()).matmul(&p);
        assert_eq!(changed.killing_form(), want);
    }

    #[test]
    fn express_in_span_examples() {
        let fields =
            parse_field_list("d1\nx1*d1 + x2*d2\nx1^2*d1 + 2*x1*x2*d2 + x2*d3", 3).unwrap();
        let lam = express_in_span(&fields[2], &fields).unwrap().unwrap();
        assert_eq!(lam, vec![rat_int(0), rat_int(0), rat_int(1)]);

        let x = fields[1].scale(&rat_int(2));
        let lam = express_in_span(&x, &fields).unwrap().unwrap();
        assert_eq!(lam, vec![rat_int(0), rat_int(2), rat_int(0)]);

        let outside = parse_field_list("x3*d1", 3).unwrap().remove(0);
        assert!(express_in_span(&outside, &fields).unwrap().is_none());
    }

    #[test]
    fn verify_realization_so3_and_mismatch() {
        let so31 = parse_field_list(
            "-sin(x1)*tan(x2)*d1 - cos(x1)*d2\n-cos(x1)*tan(x2)*d1 + sin(x1)*d2\nd1",
            2,
        )
        .unwrap();
        assert!(verify_realization(&so31, &StructureConstants::so3())
            .unwrap()
            .is_ok());

        let sl21 =
            parse_field_list("d1\nx1*d1 + x2*d2\nx1^2*d1 + 2*x1*x2*d2 + x2*d3", 3).unwrap();
        let failure = verify_realization(&sl21, &StructureConstants::so3())
            .unwrap()
            .unwrap_err();
        assert!(matches!(
            failure,
            RealizationFailure::BracketMismatch { i: 1, j: 2, .. }
        ));
    }

    #[test]
    fn constants_json_round_trip() {
        let sc = StructureConstants::sl2r().plus_a1();
        let j = sc.to_json();
        let back = StructureConstants::from_json(&j).unwrap();
        assert_eq!(sc, back);
    }

    #[test]
    fn constants_from_closed_fields() {
        let fields =
            parse_field_list("d1\nx1*d1 + x2*d2\nx1^2*d1 + 2*x1*x2*d2 + x2*d3", 3).unwrap();
        let sc = constants_from_fields(&fields).unwrap().unwrap();
        assert_eq!(sc, StructureConstants::sl2r());

        let open = parse_field_list("d1\nx1^2*d1", 1).unwrap();
        assert_eq!(constants_from_fields(&open).unwrap(), Err((1, 2)));
    }
}
