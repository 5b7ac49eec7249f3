//! Numeric oracles for the Butcher-group layer: B-series built from
//! characters are compared, in exact rational arithmetic, against directly
//! computed Runge–Kutta steps on a nonlinear polynomial field.

use hopfchar::charalg::Functional;
use hopfchar::ck::butcher::{exact_flow_character, rk_character, tableaux};
use hopfchar::ck::{bseries_eval, ck_truncation, compose, gen_trees, CkHopf, Forest, PolyField, Polynomial};
use hopfchar::coeff::{int, rat, rational_to_f64};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

type Q = BigRational;

/// `y1' = y2`, `y2' = -y1 + y1^2`: nonlinear, so all elementary
/// differentials of small trees are generically nonzero.
fn field() -> PolyField {
    PolyField::new(vec![
        Polynomial::from_terms(2, [(vec![0, 1], int(1))]),
        Polynomial::from_terms(2, [(vec![1, 0], int(-1)), (vec![2, 0], int(1))]),
    ])
    .unwrap()
}

fn f(y: &[Q]) -> Vec<Q> {
    field().eval(y)
}

/// One explicit Runge–Kutta step, computed directly from the stage equations.
fn rk_step(a: &[Vec<Q>], b: &[Q], y: &[Q], h: &Q) -> Vec<Q> {
    let mut ks: Vec<Vec<Q>> = Vec::new();
    for row in a {
        let mut yi = y.to_vec();
        for (aij, kj) in row.iter().zip(&ks) {
            for (v, k) in yi.iter_mut().zip(kj) {
                *v += h * aij * k;
            }
        }
        ks.push(f(&yi));
    }
    let mut out = y.to_vec();
    for (bi, ki) in b.iter().zip(&ks) {
        for (v, k) in out.iter_mut().zip(ki) {
            *v += h * bi * k;
        }
    }
    out
}

fn euler_tab() -> (Vec<Vec<Q>>, Vec<Q>) {
    (vec![vec![]], vec![int(1)])
}

fn midpoint_tab() -> (Vec<Vec<Q>>, Vec<Q>) {
    (vec![vec![], vec![rat(1, 2)]], vec![int(0), int(1)])
}

fn rk4_tab() -> (Vec<Vec<Q>>, Vec<Q>) {
    (
        vec![vec![], vec![rat(1, 2)], vec![int(0), rat(1, 2)], vec![int(0), int(0), int(1)]],
        vec![rat(1, 6), rat(1, 3), rat(1, 3), rat(1, 6)],
    )
}

fn max_abs_diff(a: &[Q], b: &[Q]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rational_to_f64(&(x - y).abs())).fold(0.0, f64::max)
}

/// Observed orders `log2(e(h)/e(h/2))` for `h = 1/8, 1/16, 1/32, 1/64`.
fn slopes(err: impl Fn(&Q) -> f64) -> Vec<f64> {
    let e: Vec<f64> = (0..4).map(|k| err(&rat(1, 8 << k))).collect();
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Asserts `err(h) = O(h^p)` on `h = 1/8 … 1/64`: the scaled error
/// `err(h)/h^p` may not grow as `h` halves (a lower-order term would double
/// it each time). An identically zero error passes.
fn assert_remainder_order(what: &str, p: i32, err: impl Fn(&Q) -> f64) {
    let scaled: Vec<f64> = (0..4)
        .map(|k| {
            let h = rat(1, 8 << k);
            err(&h) / rational_to_f64(&h).powi(p)
        })
        .collect();
    for w in scaled.windows(2) {
        assert!(w[1] <= 1.25 * w[0] + 1e-12, "{what}: err/h^{p} = {scaled:?}");
    }
}

fn y0() -> Vec<Q> {
    vec![rat(1, 2), rat(1, 3)]
}

#[test]
fn bseries_of_rk_character_matches_one_step() {
    const CUTOFF: usize = 5;
    let tr = ck_truncation(CUTOFF);
    let cases = [
        ("euler", tableaux::explicit_euler::<Q>(), euler_tab()),
        ("midpoint", tableaux::explicit_midpoint::<Q>(), midpoint_tab()),
        ("rk4", tableaux::classical_rk4::<Q>(), rk4_tab()),
    ];
    for (name, tab, (a, b)) in cases {
        let ch = rk_character(&tab, &tr);
        assert_remainder_order(name, CUTOFF as i32 + 1, |h| {
            let series = bseries_eval(&ch, &field(), &y0(), h, CUTOFF).unwrap();
            max_abs_diff(&series, &rk_step(&a, &b, &y0(), h))
        });
    }
    // Euler's step is exactly its two-term series
    let euler = rk_character(&tableaux::explicit_euler::<Q>(), &tr);
    let (ea, eb) = euler_tab();
    let h = rat(1, 8);
    assert_eq!(bseries_eval(&euler, &field(), &y0(), &h, CUTOFF).unwrap(), rk_step(&ea, &eb, &y0(), &h));
    // RK4's step is a polynomial of degree > 5 in h here, so the remainder is really there
    let rk4 = rk_character(&tableaux::classical_rk4::<Q>(), &tr);
    let (ra, rb) = rk4_tab();
    let gap = max_abs_diff(&bseries_eval(&rk4, &field(), &y0(), &h, CUTOFF).unwrap(), &rk_step(&ra, &rb, &y0(), &h));
    assert!(gap > 0.0);
}

/// Classical RK4 in floats, used where exact rationals would blow up.
fn rk4_f64(y: &[f64], h: f64, substeps: usize) -> Vec<f64> {
    let fl = field();
    let dt = h / substeps as f64;
    let mut y = y.to_vec();
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..substeps {
        let k1 = fl.eval_f64(&y);
        let k2 = fl.eval_f64(&axpy(&y, &k1, dt / 2.0));
        let k3 = fl.eval_f64(&axpy(&y, &k2, dt / 2.0));
        let k4 = fl.eval_f64(&axpy(&y, &k3, dt));
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

#[test]
fn exact_flow_matches_high_order_reference() {
    // reference: 64 float RK4 substeps have error O(h^5 / 64^4), far below
    // the truncation remainder O(h^5) of the cutoff-4 exact-flow series
    let tr = ck_truncation(4);
    let e = exact_flow_character::<Q>(&tr);
    let y0f: Vec<f64> = y0().iter().map(rational_to_f64).collect();
    let s = slopes(|h| {
        let series = bseries_eval(&e, &field(), &y0(), h, 4).unwrap();
        let reference = rk4_f64(&y0f, rational_to_f64(h), 64);
        series
            .iter()
            .zip(&reference)
            .map(|(a, b)| (rational_to_f64(a) - b).abs())
            .fold(0.0, f64::max)
    });
    assert!(s.iter().all(|sl| *sl > 4.6), "slopes {s:?}");
}

/// The character of the same method run with step `h/2`.
fn half_step(a: &Functional<CkHopf, Q>) -> Functional<CkHopf, Q> {
    Functional::from_fn(a.truncation(), |fo: &Forest| {
        let mut v = a.at(fo);
        for _ in 0..fo.degree() {
            v /= int(2);
        }
        v
    })
}

#[test]
fn compose_means_first_a_then_b() {
    const CUTOFF: usize = 5;
    let tr = ck_truncation(CUTOFF);
    let euler = rk_character(&tableaux::explicit_euler::<Q>(), &tr);
    let mid = rk_character(&tableaux::explicit_midpoint::<Q>(), &tr);
    let (ea, eb) = euler_tab();
    let (ma, mb) = midpoint_tab();
    let direct = |h: &Q| rk_step(&ma, &mb, &rk_step(&ea, &eb, &y0(), h), h);

    let forward = compose(&euler, &mid).unwrap();
    let backward = compose(&mid, &euler).unwrap();
    assert_remainder_order("euler then midpoint", CUTOFF as i32 + 1, |h| {
        max_abs_diff(&bseries_eval(&forward, &field(), &y0(), h, CUTOFF).unwrap(), &direct(h))
    });
    let bwd = slopes(|h| max_abs_diff(&bseries_eval(&backward, &field(), &y0(), h, CUTOFF).unwrap(), &direct(h)));
    // the two orders genuinely differ: the reversed composition is off at low order
    assert!(bwd.iter().all(|s| *s < 3.5), "midpoint-then-euler slopes {bwd:?}");
}

/// Lowest tree order where `a` disagrees with the exact flow, minus one.
fn order_against_exact(a: &Functional<CkHopf, Q>, max: usize) -> usize {
    let e = exact_flow_character::<Q>(a.truncation());
    gen_trees(max)
        .into_iter()
        .find(|t| {
            let f = Forest::single(t.clone());
            a.at(&f) != e.at(&f)
        })
        .map_or(max, |t| t.order() - 1)
}

#[test]
fn half_step_pairs_keep_the_order() {
    let tr = ck_truncation(5);
    for (p, tab) in [(1, tableaux::explicit_euler::<Q>()), (2, tableaux::explicit_midpoint::<Q>())] {
        let a = rk_character(&tab, &tr);
        assert_eq!(order_against_exact(&a, 5), p);
        let h = half_step(&a);
        let pair = compose(&h, &h).unwrap();
        assert!(pair.is_character());
        assert!(order_against_exact(&pair, 5) >= p);
    }
    // Euler followed by its adjoint (implicit Euler) gives the trapezoidal rule, order 2
    let euler = rk_character(&tableaux::explicit_euler::<Q>(), &tr);
    let implicit = rk_character(
        &hopfchar::ck::ButcherTableau::<Q>::new(vec![vec![int(1)]], vec![int(1)], vec![int(1)]).unwrap(),
        &tr,
    );
    let trap = compose(&half_step(&euler), &half_step(&implicit)).unwrap();
    assert_eq!(order_against_exact(&trap, 5), 2);
}

#[test]
fn exact_flow_is_a_one_parameter_group() {
    // e_{h/2} ⋆ e_{h/2} = e_h, exactly
    let tr = ck_truncation(6);
    let e = exact_flow_character::<Q>(&tr);
    let h = half_step(&e);
    assert_eq!(compose(&h, &h).unwrap(), e);
    let nonzero_on_trees = gen_trees(6).into_iter().all(|t| !e.at(&Forest::single(t)).is_zero());
    assert!(nonzero_on_trees);
    assert!(e.at(&Forest::empty()).is_one());
}
