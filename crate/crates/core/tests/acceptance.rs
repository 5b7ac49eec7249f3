//! Acceptance suite: one test per criterion. Each prints a `PASS`/`FAIL`
//! line with the measured quantities before asserting, so the log of a run
//! doubles as the acceptance record.

use std::collections::BTreeSet;
use std::sync::Arc;

use hopfchar::charalg::{infinitesimal_basis, Functional};
use hopfchar::ck::butcher::{
    exact_flow_character, gamma_rational, random_augmentation, random_character, random_infinitesimal, random_rational,
    rk_character, tableaux,
};
use hopfchar::ck::{bseries_eval, ck_truncation, compose, gen_trees, order_of, CkHopf, PolyField, RootedTree};
use hopfchar::coeff::{int, rat, rational_to_f64};
use hopfchar::evolution::{convergence_table, evolve, CurveSpec};
use hopfchar::findim::norms::banach_samples;
use hopfchar::findim::{
    banach_norm_check, exp_character_equivalence, gn_iterated_check, kappa_check, multifalt_check, random_functional,
    shipped, tensor_truncation, TensorSquare,
};
use hopfchar::par::{sample_rng, Execution};
use hopfchar::primitive::PrimitivePolynomial;
use hopfchar::{verify_axioms, Degree, HopfAlgebra, TruncPoly, Truncation};
use num_rational::BigRational;
use num_traits::One;

const SEED: u64 = 0;

fn verdict(criterion: u32, ok: bool, detail: String) {
    // written to the process's stderr directly so the line survives libtest's output capture
    let line = format!("{} criterion {criterion}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::Write::write_all(&mut std::io::stderr().lock(), line.as_bytes());
    assert!(ok, "criterion {criterion} failed: {detail}");
}

// ------------------------------------------------------------------ 1

fn axiom_summary(r: &hopfchar::hopf::AxiomReport, has_product: bool) -> (bool, String) {
    use hopfchar::hopf::CheckStatus;
    let count = |st: CheckStatus| r.checks.iter().filter(|c| c.status == st).count();
    let antipodes_pass = ["antipode-left", "antipode-right"]
        .iter()
        .all(|a| r.status(a) == Some(CheckStatus::Pass));
    let core_pass = ["coassociativity", "counit", "coproduct-grading"]
        .iter()
        .all(|a| r.status(a) == Some(CheckStatus::Pass));
    let ok = r.all_pass() && core_pass && (!has_product || antipodes_pass);
    let line = format!(
        "{} ({} basis elements, {} pass, {} not applicable)",
        r.instance,
        r.basis_size,
        count(CheckStatus::Pass),
        count(CheckStatus::NotApplicable)
    );
    (ok, line)
}

#[test]
fn criterion_1_hopf_axioms_exact_to_degree_6() {
    let mut lines = Vec::new();
    let mut ok = true;
    let (pass, line) = axiom_summary(&verify_axioms(&CkHopf::new(), Degree::int(6)), true);
    ok &= pass;
    lines.push(line);
    for c in shipped::all() {
        // a bare coalgebra has no antipode to check; every other instance must pass both identities
        let (pass, line) = axiom_summary(&verify_axioms(&c, Degree::int(6)), c.has_product());
        ok &= pass;
        lines.push(line);
    }
    verdict(1, ok, format!("axioms exact to degree 6 on {}", lines.join(", ")));
}

// ------------------------------------------------------------------ 2

#[test]
fn criterion_2_group_laws_on_random_characters() {
    let tr = ck_truncation(6);
    let unit = Functional::unit(&tr);
    let mut failures = Vec::new();
    for s in 0..100u64 {
        let mut rng = sample_rng(SEED, s);
        let a = random_character(&mut rng, &tr);
        let b = random_character(&mut rng, &tr);
        let c = random_character(&mut rng, &tr);
        let ab = a.convolve(&b).unwrap();
        let checks = [
            ("closure", ab.is_character()),
            (
                "associativity",
                ab.convolve(&c).unwrap() == a.convolve(&b.convolve(&c).unwrap()).unwrap(),
            ),
            ("unit", a.convolve(&unit).unwrap() == a && unit.convolve(&a).unwrap() == a),
            ("antipode", {
                // φ∘S, built directly from the antipode of each basis forest
                let a_s = Functional::from_fn(&tr, |f: &hopfchar::ck::Forest| {
                    tr.antipode_of(f)
                        .unwrap()
                        .iter()
                        .fold(BigRational::from_integer(0.into()), |acc, (g, c)| acc + a.at(g) * c)
                });
                a.convolve(&a_s).unwrap() == unit && a_s.convolve(&a).unwrap() == unit && a_s == a.char_inverse().unwrap()
            }),
            ("inverse", {
                let inv = a.char_inverse().unwrap();
                inv.is_character()
                    && a.convolve(&inv).unwrap() == unit
                    && inv.convolve(&a).unwrap() == unit
                    && inv == a.unit_inverse().unwrap()
            }),
        ];
        failures.extend(checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| format!("{name}@{s}")));
    }
    verdict(
        2,
        failures.is_empty(),
        format!("100 random characters at cutoff 6: closure, associativity, unit, φ⋆(φ∘S) = unit = (φ∘S)⋆φ, char_inverse ≡ unit_inverse; failures: {failures:?}"),
    );
}

// ------------------------------------------------------------------ 3

#[test]
fn criterion_3_exp_log_predicates_and_round_trips() {
    let tr6 = ck_truncation(6);
    let tr5 = ck_truncation(5);
    let mut failures = Vec::new();
    for s in 0..100u64 {
        let mut rng = sample_rng(SEED, s);
        let delta = random_infinitesimal(&mut rng, &tr6);
        let a = random_character(&mut rng, &tr6);
        if !delta.exp_star().unwrap().is_character() {
            failures.push(format!("exp-character@{s}"));
        }
        if !a.log_star().unwrap().is_infinitesimal() {
            failures.push(format!("log-infinitesimal@{s}"));
        }
        let d5 = random_infinitesimal(&mut rng, &tr5);
        let a5 = random_character(&mut rng, &tr5);
        if d5.exp_star().unwrap().log_star().unwrap() != d5 {
            failures.push(format!("log-exp@{s}"));
        }
        if a5.log_star().unwrap().exp_star().unwrap() != a5 {
            failures.push(format!("exp-log@{s}"));
        }
    }
    verdict(
        3,
        failures.is_empty(),
        format!("100 samples: exp(g) ⊂ G, log(G) ⊂ g at cutoff 6; both round trips at cutoff 5; failures: {failures:?}"),
    );
}

// ------------------------------------------------------------------ 4

#[derive(Default)]
struct EquivTally {
    samples: usize,
    p1: usize,
    pattern_failures: usize,
    equivalence_failures: usize,
}

fn equivalence_tally<H: HopfAlgebra>(
    trunc: &Arc<Truncation<H>>,
    samples: u64,
    draw: impl Fn(&mut rand_chacha::ChaCha8Rng, u64) -> Functional<H, BigRational>,
) -> EquivTally {
    let tt = tensor_truncation(trunc).unwrap();
    let mut t = EquivTally::default();
    for s in 0..samples {
        let mut rng = sample_rng(SEED, 1000 + s);
        let r = exp_character_equivalence(&draw(&mut rng, s), &tt, 1e-9).unwrap();
        t.samples += 1;
        t.p1 += usize::from(r.p1);
        t.pattern_failures += usize::from(!r.pattern_holds());
        t.equivalence_failures += usize::from(!r.full_equivalence());
    }
    t
}

#[test]
fn criterion_4_multifalt_and_exp_character_equivalence() {
    let mut ok = true;
    let mut detail = Vec::new();

    // multifalt identities on CK and on the findim instances with a product
    let tr = ck_truncation(4);
    let tt = tensor_truncation(&tr).unwrap();
    let quads: Vec<[Functional<CkHopf, BigRational>; 4]> = (0..50u64)
        .map(|s| {
            let mut rng = sample_rng(SEED, s);
            std::array::from_fn(|_| random_functional(&mut rng, &tr, false))
        })
        .collect();
    let mf = multifalt_check(&tt, &quads, 1e-9).unwrap();
    ok &= mf.pass() && mf.samples == 50;
    detail.push(format!("multifalt {}: {} quadruples pass={}", mf.instance, mf.samples, mf.pass()));
    for c in [shipped::group_primitive(), shipped::z3_functions()] {
        let trc = Truncation::new(c.clone(), c.top_degree().map_or(Degree::int(4), |t| t.min(Degree::int(4)))).unwrap();
        let ttc = tensor_truncation(&trc).unwrap();
        let quads: Vec<[Functional<_, BigRational>; 4]> = (0..50u64)
            .map(|s| {
                let mut rng = sample_rng(SEED, s);
                std::array::from_fn(|_| random_functional(&mut rng, &trc, false))
            })
            .collect();
        let mf = multifalt_check(&ttc, &quads, 1e-9).unwrap();
        ok &= mf.pass();
        detail.push(format!("multifalt {}: pass={}", mf.instance, mf.pass()));
    }

    // CK: half infinitesimal characters, half arbitrary augmentations
    let ck = equivalence_tally(&tr, 50, |rng, s| {
        if s % 2 == 0 {
            random_infinitesimal(rng, &tr)
        } else {
            random_augmentation(rng, &tr)
        }
    });
    ok &= ck.pattern_failures == 0 && ck.equivalence_failures == 0 && ck.p1 == 25;
    detail.push(format!(
        "CK equivalence: {} samples, {} with P1, pattern failures {}, P1⇔P3 failures {}",
        ck.samples, ck.p1, ck.pattern_failures, ck.equivalence_failures
    ));

    // a connected instance with rational degrees, drawing infinitesimals from
    // the exact nullspace and the rest from arbitrary augmentations
    let poly = PrimitivePolynomial::parse("1/2,1/3").unwrap();
    let trp = Truncation::new(poly.clone(), Degree::int(2)).unwrap();
    let basis = infinitesimal_basis(&trp).unwrap();
    let p = equivalence_tally(&trp, 50, |rng, s| {
        if s % 2 == 0 {
            basis.iter().fold(Functional::zero(&trp), |acc, b| {
                acc.add(&b.scale_rational(&random_rational(rng, 3, 5))).unwrap()
            })
        } else {
            random_functional(rng, &trp, true)
        }
    });
    ok &= p.pattern_failures == 0 && p.equivalence_failures == 0 && p.p1 == 25;
    detail.push(format!(
        "{} equivalence: {} samples, {} with P1, pattern failures {}, P1⇔P3 failures {}",
        poly.name(),
        p.samples,
        p.p1,
        p.pattern_failures,
        p.equivalence_failures
    ));
    verdict(4, ok, detail.join("; "));
}

// ------------------------------------------------------------------ 5

#[test]
fn criterion_5_banach_bounds_and_kappa() {
    let mut ok = true;
    let mut detail = Vec::new();
    for c in shipped::all() {
        let pairs = banach_samples(&c, 1000, SEED);
        let b = banach_norm_check(&c, &pairs, Execution::default()).unwrap();
        let gn = gn_iterated_check(&c, 5, 200, SEED, Execution::default());
        let kp = kappa_check::<TruncPoly<2>>(&c, 20, SEED);
        let kr = kappa_check::<BigRational>(&c, 20, SEED);
        ok &= b.pass() && b.samples == 1000 && gn.pass() && kp.pass() && kr.pass();
        detail.push(format!(
            "{}: K={} banach max ratio {:.4} ({} violations), (KM)^n max ratio {:.4} ({} violations), kappa rank {}/{}",
            c.name(),
            b.k,
            b.max_ratio,
            b.violations,
            gn.max_ratio,
            gn.violations,
            kp.rank,
            kp.expected_rank
        ));
    }
    verdict(5, ok, detail.join("; "));
}

// ------------------------------------------------------------------ 6

/// Rooted trees on `n` nodes by brute force: every parent array with
/// `parent[i] < i`, canonicalized by sorting child strings bottom-up.
fn oracle_trees(n: usize) -> BTreeSet<String> {
    fn canon(children: &[Vec<usize>], v: usize) -> String {
        let mut parts: Vec<String> = children[v].iter().map(|&c| canon(children, c)).collect();
        parts.sort();
        format!("({})", parts.concat())
    }
    let mut out = BTreeSet::new();
    let mut parent = vec![0usize; n];
    loop {
        let mut children = vec![Vec::new(); n];
        for i in 1..n {
            children[parent[i]].push(i);
        }
        out.insert(canon(&children, 0));
        // odometer over parent[i] in 0..i
        let mut i = n;
        loop {
            i -= 1;
            if i == 0 {
                return out;
            }
            parent[i] += 1;
            if parent[i] < i {
                break;
            }
            parent[i] = 0;
        }
    }
}

/// The oracle's parenthesis string for a library tree.
fn oracle_form(t: &RootedTree) -> String {
    let mut parts: Vec<String> = t.children().iter().map(oracle_form).collect();
    parts.sort();
    format!("({})", parts.concat())
}

#[test]
fn criterion_6_butcher_group_numerics() {
    let mut detail = Vec::new();
    let mut ok = true;

    // tree counts by two canonicalizations
    let expected = [1usize, 1, 2, 4, 9, 20, 48, 115];
    let trees = gen_trees(8);
    let mut counts = Vec::new();
    for n in 1..=8 {
        let lib: BTreeSet<String> = trees.iter().filter(|t| t.order() == n).map(oracle_form).collect();
        let lib_count = trees.iter().filter(|t| t.order() == n).count();
        let oracle = oracle_trees(n);
        ok &= lib_count == expected[n - 1] && lib == oracle && lib.len() == lib_count;
        counts.push(lib_count);
    }
    detail.push(format!("tree counts {counts:?}"));

    // exact flow: e(τ)γ(τ) = 1
    let tr6 = ck_truncation(6);
    let e = exact_flow_character::<BigRational>(&tr6);
    let bad: Vec<String> = gen_trees(6)
        .iter()
        .filter(|t| e.at(&hopfchar::ck::Forest::single((*t).clone())) * gamma_rational(t) != BigRational::one())
        .map(ToString::to_string)
        .collect();
    ok &= bad.is_empty();
    detail.push(format!("e·γ = 1 on all {} trees of order ≤ 6", gen_trees(6).len()));

    // classical RK4: order exactly 4, with an order-5 witness
    let report = order_of(&tableaux::classical_rk4::<BigRational>(), 6);
    let witness = report.first_violation_tree.clone().unwrap_or_default();
    let witness_order = RootedTree::parse(&witness).map_or(0, |t| t.order());
    ok &= report.order == 4 && witness_order == 5;
    detail.push(format!("RK4 order {} with witness {witness} (order {witness_order})", report.order));

    // Euler⋆Euler on y' = y is the two-step map (1 + h)^2
    let tr = ck_truncation(5);
    let euler = rk_character(&tableaux::explicit_euler::<BigRational>(), &tr);
    let two = compose(&euler, &euler).unwrap();
    let lin = PolyField::monomial_1d(int(1), 1);
    let mut two_step_ok = true;
    for h in [rat(1, 10), rat(1, 3), rat(-2, 7)] {
        let y = bseries_eval(&two, &lin, &[int(1)], &h, 5).unwrap();
        let closed = (BigRational::one() + &h) * (BigRational::one() + &h);
        two_step_ok &= y == vec![closed];
    }
    ok &= two_step_ok;
    detail.push(format!("Euler⋆Euler = (1+h)^2 exactly: {two_step_ok}"));

    // exact-flow B-series, y' = y^2, y(0) = 1, cutoff 4: local error slope
    let tr4 = ck_truncation(4);
    let ef = exact_flow_character::<BigRational>(&tr4);
    let sq = PolyField::monomial_1d(int(1), 2);
    let errors: Vec<f64> = (0..4)
        .map(|k| {
            let h = rat(1, 10 << k);
            let y = bseries_eval(&ef, &sq, &[int(1)], &h, 4).unwrap();
            let exact = BigRational::one() / (BigRational::one() - &h);
            rational_to_f64(&(exact - &y[0]))
        })
        .collect();
    let slopes: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    ok &= min_slope >= 4.7;
    detail.push(format!("y'=y^2 exact-flow slopes {slopes:.3?} (min {min_slope:.3})"));

    verdict(6, ok, detail.join("; "));
}

// ------------------------------------------------------------------ 7

fn leaf_delta(tr: &Arc<Truncation<CkHopf>>) -> Functional<CkHopf, BigRational> {
    let mut d = Functional::zero(tr);
    d.set(tr.index_of_id("[]").unwrap(), BigRational::one());
    d
}

#[test]
fn criterion_7_evolution() {
    let mut ok = true;
    let mut detail = Vec::new();

    // order-4 convergence for a constant curve; cutoff 6 so RK4 is not exact
    let tr6 = ck_truncation(6);
    let curve = CurveSpec::constant(&leaf_delta(&tr6)).unwrap();
    let table = convergence_table(&curve, &BigRational::one(), 10, 4).unwrap();
    let slope = table.final_slope().unwrap();
    ok &= table.reference == "exact" && (slope - 4.0).abs() <= 0.3;
    detail.push(format!("constant δ slope {slope:.3}"));

    // piecewise-constant curve against the ordered product of exponentials
    let tr5 = ck_truncation(5);
    let mut rng = sample_rng(SEED, 7);
    let x = random_infinitesimal(&mut rng, &tr5);
    let y = random_infinitesimal(&mut rng, &tr5);
    let pw = CurveSpec::new(&tr5, vec![(rat(1, 2), vec![x.clone()]), (int(1), vec![y.clone()])]).unwrap();
    let got = evolve(&pw, 1.0, 1000).unwrap();
    let expect = x
        .scale_rational(&rat(1, 2))
        .exp_star()
        .unwrap()
        .convolve(&y.scale_rational(&rat(1, 2)).exp_star().unwrap())
        .unwrap()
        .map_to(rational_to_f64);
    let pw_err = got.max_diff(&expect).unwrap();
    ok &= pw_err <= 1e-8;
    detail.push(format!("piecewise error {pw_err:.2e}"));

    // character preservation for time-dependent curves on three instances
    let mut worst: f64 = 0.0;
    for s in 0..10u64 {
        let mut rng = sample_rng(SEED, 100 + s);
        let coeffs: Vec<_> = (0..3).map(|_| random_infinitesimal(&mut rng, &tr5)).collect();
        let c = CurveSpec::polynomial(&tr5, coeffs).unwrap();
        for t1 in [0.25, 1.0] {
            worst = worst.max(evolve(&c, t1, 2000).unwrap().character_defect().unwrap());
        }
    }
    let poly = PrimitivePolynomial::parse("1/2,1/3").unwrap();
    let trp = Truncation::new(poly, Degree::int(2)).unwrap();
    let pbasis = infinitesimal_basis(&trp).unwrap();
    let pc = CurveSpec::polynomial(&trp, vec![pbasis[0].clone(), pbasis[1].scale_rational(&int(-2))]).unwrap();
    worst = worst.max(evolve(&pc, 1.0, 2000).unwrap().character_defect().unwrap());
    ok &= worst <= 1e-9;
    detail.push(format!("max character defect {worst:.2e}"));

    // truncation locality: low-degree output does not depend on the cutoff
    let mut rng = sample_rng(SEED, 11);
    let coeffs6: Vec<_> = (0..2).map(|_| random_infinitesimal(&mut rng, &tr6)).collect();
    let tr4 = ck_truncation(4);
    let coeffs4: Vec<_> = coeffs6
        .iter()
        .map(|c| Functional::from_fn(&tr4, |f| c.at(f)))
        .collect();
    let hi = evolve(&CurveSpec::polynomial(&tr6, coeffs6).unwrap(), 1.0, 50).unwrap();
    let lo = evolve(&CurveSpec::polynomial(&tr4, coeffs4).unwrap(), 1.0, 50).unwrap();
    let local = tr4.basis().iter().all(|f| hi.at(f).to_bits() == lo.at(f).to_bits());
    ok &= local;
    detail.push(format!("truncation locality (bitwise, cutoff 6 vs 4): {local}"));

    verdict(7, ok, detail.join("; "));
}

#[test]
fn tensor_square_axioms_support_criterion_4() {
    // the tensor square used by criterion 4 is itself a Hopf algebra
    let r = verify_axioms(&TensorSquare::new(CkHopf::new()), Degree::int(4));
    assert!(r.all_pass(), "{r:?}");
}
