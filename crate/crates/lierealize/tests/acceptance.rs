//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (visible with `--nocapture`).

use lie_realize::algebra::{identify, AlgebraTag, StructureConstants, Violation};
use lie_realize::catalog::{list_catalog, verify_all};
use lie_realize::liefield::{generic_rank, lie_bracket, pushforward, random_rational, VectorField};
use lie_realize::linalg::RatMatrix;
use lie_realize::proofcheck;
use lie_realize::symexpr::{rat, rat_int, Expr, Rat, Signature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

const SEED: u64 = 7;

fn report(n: usize, name: &str, ok: bool) {
    println!(
        "criterion {n} ({name}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} ({name}) failed");
}

#[test]
fn criterion_1_catalog_soundness() {
    // every entry, every admissible parameter, n in {n_min, n_min + 1},
    // exact commutation relations and faithfulness, within 60 s
    let start = Instant::now();
    let discrepancies = verify_all(1, true).unwrap();
    let elapsed = start.elapsed();
    for d in &discrepancies {
        eprintln!("discrepancy: R({}, {}) at n={}: {}", d.algebra, d.index, d.n, d.failure);
    }
    report(
        1,
        "catalog soundness",
        discrepancies.is_empty() && elapsed.as_secs() < 60,
    );
}

fn random_invertible(m: usize, rng: &mut impl Rng) -> RatMatrix {
    loop {
        let rows: Vec<Vec<Rat>> = (0..m)
            .map(|_| (0..m).map(|_| random_rational(rng)).collect())
            .collect();
        let p = RatMatrix::from_rows(rows);
        if p.rank() == m {
            return p;
        }
    }
}

#[test]
fn criterion_2_identification() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tags = [
        AlgebraTag::Sl2R,
        AlgebraTag::So3,
        AlgebraTag::Sl2RPlusA1,
        AlgebraTag::So3PlusA1,
    ];
    let mut ok = true;
    for tag in tags {
        let sc = StructureConstants::for_tag(tag).unwrap();
        ok &= identify(&sc) == tag;
        for _ in 0..50 {
            let p = random_invertible(sc.m, &mut rng);
            let changed = sc.change_basis(&p).unwrap();
            ok &= identify(&changed) == tag;
        }
        // a single-entry mutation must break the Jacobi identity
        let mut mutated = sc.clone();
        let old = mutated.get(0, 1, 0).clone();
        mutated.set(0, 1, 0, old + rat_int(1));
        ok &= matches!(mutated.validate(), Err(Violation::Jacobi { .. }));
    }
    ok &= StructureConstants::sl2r().killing_form().signature() == (2, 1, 0);
    ok &= StructureConstants::so3().killing_form().signature() == (0, 3, 0);
    report(2, "identification", ok);
}

#[test]
fn criterion_3_transform_invariance() {
    let r = proofcheck::transform_suite(20, SEED, true).unwrap();
    report(
        3,
        "form and invariant preservation",
        r.forms_preserved && r.ansatz_preserved && r.invariant_preserved,
    );
}

#[test]
fn criterion_4_commutant_solution() {
    let mut ok = true;
    for alpha in 0..=1u8 {
        ok &= proofcheck::check_commutant_system(alpha).unwrap().ok();
    }
    report(4, "commutant general solution", ok);
}

#[test]
fn criterion_5_ode_oracle() {
    let ode = proofcheck::lie_ode_suite(50, SEED, true).unwrap();
    let rho4 = proofcheck::rho4_suite(50, SEED, true).unwrap();
    report(
        5,
        "closed form vs RK4",
        ode.max_deviation <= 1e-8
            && ode.max_norm_drift <= 1e-10
            && rho4.max_final_norm <= 1e-8
            && rho4.min_abs_det > 0.0,
    );
}

#[test]
fn criterion_6_remark_pushforwards() {
    let r = proofcheck::remark_coordinate_checks(120, SEED).unwrap();
    println!(
        "  planar assignment {:?}, cartesian assignment {:?}",
        r.planar.assignment, r.cartesian.assignment
    );
    report(
        6,
        "stereographic and spherical pushforwards",
        r.planar.samples >= 100
            && r.planar.max_residual <= 1e-9
            && r.cartesian.max_residual <= 1e-9,
    );
}

/// Random trig-polynomial field on `n` coordinates, kept small enough that
/// finite differences stay well conditioned.
fn random_field(n: u32, rng: &mut impl Rng) -> VectorField {
    let comps: Vec<Expr> = (0..n)
        .map(|_| {
            let mut e = Expr::zero();
            for _ in 0..rng.gen_range(1..=3) {
                let mut sig = Signature::default();
                for _ in 0..rng.gen_range(0..=2) {
                    let v = rng.gen_range(1..=n);
                    *sig.poly.entry(v).or_insert(0) += 1;
                }
                if rng.gen_bool(0.5) {
                    let v = rng.gen_range(1..=n);
                    let s: u8 = rng.gen_range(0..=1);
                    let c: i64 = rng.gen_range(-1..=2);
                    if (s, c) != (0, 0) {
                        sig.trig.insert(v, (s, c));
                    }
                }
                let coeff = rat(rng.gen_range(-5..=5), rng.gen_range(1..=3));
                if !coeff.numer().eq(&0.into()) {
                    e = e.add(&Expr::monomial(coeff, sig));
                }
            }
            e
        })
        .collect();
    VectorField::from_exprs(n, comps).unwrap()
}

fn fd_partial(f: &lie_realize::symexpr::Ratio, p: &[f64], b: usize) -> f64 {
    let params = BTreeMap::new();
    let h = 1e-4;
    let at = |delta: f64| {
        let mut q = p.to_vec();
        q[b] += delta;
        f.eval(&q, &params).unwrap()
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

#[test]
fn criterion_7_kernel_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 3u32;
    let params = BTreeMap::new();
    let mut ok = true;

    // symbolic bracket vs finite differences on 200 random pairs
    let mut max_err: f64 = 0.0;
    for _ in 0..200 {
        let x = random_field(n, &mut rng);
        let y = random_field(n, &mut rng);
        let br = lie_bracket(&x, &y).unwrap();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let xv = x.eval(&p, &params).unwrap();
        let yv = y.eval(&p, &params).unwrap();
        let bv = br.eval(&p, &params).unwrap();
        for (a, bva) in bv.iter().enumerate() {
            let mut fd = 0.0;
            for b in 0..n as usize {
                fd += xv[b] * fd_partial(y.coeff(a as u32 + 1), &p, b)
                    - yv[b] * fd_partial(x.coeff(a as u32 + 1), &p, b);
            }
            max_err = max_err.max((fd - bva).abs());
        }
    }
    ok &= max_err <= 1e-6;
    println!("  bracket finite-difference error: {max_err:.3e}");

    // second partials commute exactly
    for _ in 0..50 {
        let f = random_field(n, &mut rng);
        for c in f.coeffs() {
            let e = c.num();
            ok &= e.partial(1).partial(2) == e.partial(2).partial(1);
        }
    }

    // canonical zero implies numeric zero: the same product assembled
    // through sin^2 and through 1 - cos^2 at 100 points
    for _ in 0..100 {
        let f = random_field(n, &mut rng);
        let e = f.coeff(1).num().clone();
        let a = e.mul(&Expr::sin(1)).mul(&Expr::sin(1));
        let b = e.mul(&Expr::one().sub(&Expr::cos(1).mul(&Expr::cos(1))));
        ok &= a.sub(&b).is_zero();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let (av, bv) = (a.eval(&p, &params).unwrap(), b.eval(&p, &params).unwrap());
        ok &= (av - bv).abs() <= 1e-9;
    }
    report(7, "kernel oracles", ok);
}

#[test]
fn criterion_8_generic_ranks() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let expected: Vec<(AlgebraTag, u32, usize)> = vec![
        (AlgebraTag::Sl2R, 1, 3),
        (AlgebraTag::Sl2R, 2, 2),
        (AlgebraTag::Sl2R, 3, 2),
        (AlgebraTag::Sl2R, 4, 2),
        (AlgebraTag::Sl2R, 5, 1),
        (AlgebraTag::Sl2RPlusA1, 1, 4),
        (AlgebraTag::Sl2RPlusA1, 2, 3),
        (AlgebraTag::Sl2RPlusA1, 3, 3),
        (AlgebraTag::Sl2RPlusA1, 4, 3),
        (AlgebraTag::Sl2RPlusA1, 5, 3),
        (AlgebraTag::Sl2RPlusA1, 6, 3),
        (AlgebraTag::Sl2RPlusA1, 7, 2),
        (AlgebraTag::Sl2RPlusA1, 8, 2),
        (AlgebraTag::Sl2RPlusA1, 9, 2),
        (AlgebraTag::So3, 1, 2),
        (AlgebraTag::So3, 2, 3),
        (AlgebraTag::So3PlusA1, 1, 3),
        (AlgebraTag::So3PlusA1, 2, 3),
        (AlgebraTag::So3PlusA1, 3, 3),
        (AlgebraTag::So3PlusA1, 4, 4),
    ];
    let mut ok = true;
    for entry in list_catalog() {
        let want = expected
            .iter()
            .find(|(a, i, _)| *a == entry.algebra && *i == entry.index)
            .map(|(_, _, r)| *r)
            .unwrap();
        for params in entry.param_assignments() {
            let fields = entry.instantiate(entry.n_min, &params).unwrap();
            let got = generic_rank(&fields, &mut rng).unwrap();
            if got != want {
                eprintln!("R({}, {}): rank {got}, expected {want}", entry.algebra, entry.index);
                ok = false;
                continue;
            }
            // rank is a diffeomorphism invariant: polynomial entries through
            // the form-preserving rational map (padding the fields with zero
            // components first, which leaves the rank unchanged), trig
            // entries through a coordinate transposition
            let transformed: Vec<VectorField> = if fields
                .iter()
                .all(|f| f.coeffs().iter().all(|c| c.num().is_trig_free() && c.den().is_trig_free()))
            {
                let n = entry.n_min.max(3);
                let tp = proofcheck::TransformParams::rational(
                    rat(1, 2),
                    rat_int(3),
                    rat_int(-1),
                )
                .unwrap();
                let map = tp.to_map().unwrap().extend_to(n);
                fields
                    .iter()
                    .map(|f| pushforward(&f.extend_to(n), &map).unwrap())
                    .collect()
            } else {
                let mut perm: Vec<u32> = (0..=entry.n_min).collect();
                perm.swap(1, 2);
                fields.iter().map(|f| f.rename_vars(&perm)).collect()
            };
            ok &= generic_rank(&transformed, &mut rng).unwrap() == want;
        }
    }
    report(8, "generic ranks", ok);
}
